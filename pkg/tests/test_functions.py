"""Set functions, exhaustive property checkers, and fast index paths."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpsubmax.functions import (
    CappedModularFunction,
    CoverageFunction,
    GroundSet,
    check_monotone,
    check_submodular,
    check_unit_range,
    default_ground,
    marginal_vector,
    marginals_at_indices,
    oracle_from_json,
    oracle_to_json,
    value_at_indices,
)


def test_ground_set_indexing():
    g = GroundSet(("b", "a", "c"))
    assert g.items == ("b", "a", "c")
    assert g.index("a") == 1
    assert list(g.indices(["c", "b"])) == [2, 0]
    assert "c" in g and "z" not in g
    with pytest.raises(ValueError, match="unknown item"):
        g.index("z")


def test_ground_set_rejects_duplicates():
    with pytest.raises(ValueError):
        GroundSet(("a", "a"))


def test_default_ground_name_order_is_index_order():
    g = default_ground(12)
    assert g.items == tuple(sorted(g.items))
    assert g.n == 12


def test_coverage_value():
    fn = CoverageFunction(p={"a": 0.9, "b": 0.1, "c": 0.5})
    assert fn.value([]) == 0.0
    assert fn.value(["a"]) == pytest.approx(0.9)
    # 1 - (1-.9)(1-.1) = 0.91
    assert fn.value(["a", "b"]) == pytest.approx(0.91)
    assert fn.value(["a", "b", "c"]) == pytest.approx(1 - 0.1 * 0.9 * 0.5)
    # duplicates in the membership list do not double-count
    assert fn.value(["a", "a"]) == pytest.approx(0.9)


def test_capped_modular_value():
    fn = CappedModularFunction(w={"a": 0.4, "b": 0.5}, cap=0.6)
    assert fn.value([]) == 0.0
    assert fn.value(["a"]) == pytest.approx(0.4)
    assert fn.value(["a", "b"]) == pytest.approx(0.6)


def test_function_validation():
    with pytest.raises(ValueError):
        CoverageFunction(p={"a": 1.5})
    with pytest.raises(ValueError):
        CoverageFunction(p={"a": -0.1})
    with pytest.raises(ValueError):
        CoverageFunction(p={})
    with pytest.raises(ValueError):
        CappedModularFunction(w={"a": 0.5}, cap=0.0)
    with pytest.raises(ValueError):
        CappedModularFunction(w={"a": 0.5}, cap=1.2)
    with pytest.raises(ValueError):
        CappedModularFunction(w={"a": -0.5}, cap=1.0)


def test_param_vector_binding():
    g = GroundSet(("a", "b", "c"))
    fn = CoverageFunction(p={"a": 0.9, "b": 0.1, "c": 0.5})
    assert np.allclose(fn.param_vector(g), [0.9, 0.1, 0.5])
    with pytest.raises(ValueError):
        fn.param_vector(GroundSet(("a", "b")))       # stray key c
    with pytest.raises(ValueError):
        fn.param_vector(GroundSet(("a", "b", "c", "d")))  # missing item d


def test_oracle_json_round_trip():
    for fn in (CoverageFunction(p={"a": 0.25, "b": 1.0}),
               CappedModularFunction(w={"a": 0.3}, cap=0.75)):
        again = oracle_from_json(oracle_to_json(fn))
        assert again == fn


def test_oracle_from_json_rejects_unknown_family():
    with pytest.raises(ValueError, match="family"):
        oracle_from_json({"family": "mystery", "params": {}})


def test_value_at_indices_matches_name_path():
    g = GroundSet(("a", "b", "c", "d"))
    rng = np.random.default_rng(0)
    p = rng.random(4)
    fn = CoverageFunction(p=dict(zip(g.items, p)))
    w = rng.random(4) / 4
    cm = CappedModularFunction(w=dict(zip(g.items, w)), cap=0.5)
    for idx in ([], [2], [0, 3], [0, 1, 2, 3]):
        names = [g.items[i] for i in idx]
        assert value_at_indices("coverage", p, None, np.array(idx, dtype=np.intp)) \
            == pytest.approx(fn.value(names))
        assert value_at_indices("capped_modular", w, 0.5, np.array(idx, dtype=np.intp)) \
            == pytest.approx(cm.value(names))


def test_marginals_at_indices_matches_definition():
    g = GroundSet(("a", "b", "c"))
    p = np.array([0.9, 0.1, 0.5])
    fn = CoverageFunction(p=dict(zip(g.items, p)))
    prefix = np.array([0], dtype=np.intp)
    got = marginals_at_indices("coverage", p, None, prefix)
    want = [fn.value(["a", x]) - fn.value(["a"]) for x in g.items]
    assert np.allclose(got, want)
    # items already in the prefix contribute zero gain
    assert got[0] == 0.0


def test_marginal_vector_names():
    g = GroundSet(("a", "b"))
    fn = CoverageFunction(p={"a": 0.6, "b": 0.8})
    vec = marginal_vector(fn, g, ["a"])
    assert vec[0] == pytest.approx(0.0)
    assert vec[1] == pytest.approx(fn.value(["a", "b"]) - fn.value(["a"]))


def test_checkers_pass_on_coverage_and_capped_modular():
    g = default_ground(5)
    rng = np.random.default_rng(42)
    cov = CoverageFunction(p=dict(zip(g.items, rng.random(5))))
    cm = CappedModularFunction(w=dict(zip(g.items, rng.random(5) / 3)),
                               cap=0.7)
    for fn in (cov, cm):
        assert check_unit_range(fn, g) == (True, None)
        assert check_monotone(fn, g) == (True, None)
        assert check_submodular(fn, g) == (True, None)


def test_planted_counterexample_witness():
    # Supermodular on two items: joint value exceeds the sum of singletons.
    vals = {frozenset(): 0.0, frozenset("a"): 0.2, frozenset("b"): 0.2,
            frozenset("ab"): 0.9}
    fn = lambda s: vals[frozenset(s)]  # noqa: E731
    g = GroundSet(("a", "b"))
    ok, witness = check_submodular(fn, g)
    assert not ok
    assert witness == ((), ("a",), "b")
    assert check_monotone(fn, g) == (True, None)
    assert check_unit_range(fn, g) == (True, None)


def test_monotone_witness():
    vals = {frozenset(): 0.0, frozenset("a"): 0.5, frozenset("b"): 0.1,
            frozenset("ab"): 0.3}
    fn = lambda s: vals[frozenset(s)]  # noqa: E731
    ok, witness = check_monotone(fn, GroundSet(("a", "b")))
    assert not ok
    a, b = witness
    assert set(a) <= set(b)
    assert vals[frozenset(a)] > vals[frozenset(b)]


def test_unit_range_witness():
    fn = lambda s: 1.5 if len(s) == 2 else 0.0  # noqa: E731
    ok, witness = check_unit_range(fn, GroundSet(("a", "b")))
    assert not ok
    assert witness == (("a", "b"), 1.5)


def test_nonzero_empty_set_fails_unit_range():
    fn = lambda s: 0.25  # noqa: E731
    ok, witness = check_unit_range(fn, GroundSet(("a",)))
    assert not ok and witness[0] == ()


def test_check_size_guard():
    g = default_ground(13)
    fn = CoverageFunction(p={name: 0.5 for name in g.items})
    with pytest.raises(ValueError, match="12"):
        check_monotone(fn, g)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_random_coverage_always_passes(n, seed):
    g = default_ground(n)
    rng = np.random.default_rng(seed)
    fn = CoverageFunction(p=dict(zip(g.items, rng.random(n))))
    assert check_unit_range(fn, g)[0]
    assert check_monotone(fn, g)[0]
    assert check_submodular(fn, g)[0]


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1),
       st.floats(0.05, 1.0))
def test_random_capped_modular_always_passes(n, seed, cap):
    g = default_ground(n)
    rng = np.random.default_rng(seed)
    fn = CappedModularFunction(w=dict(zip(g.items, rng.random(n) / n)),
                               cap=cap)
    assert check_unit_range(fn, g)[0]
    assert check_monotone(fn, g)[0]
    assert check_submodular(fn, g)[0]


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_marginals_diminish_along_prefix(n, seed):
    """Marginal gains shrink as the prefix grows (submodularity, used by the
    cascade feedback)."""
    g = default_ground(n)
    rng = np.random.default_rng(seed)
    p = rng.random(n)
    small = marginals_at_indices("coverage", p, None,
                                 np.array([0], dtype=np.intp))
    large = marginals_at_indices("coverage", p, None,
                                 np.array([0, 1], dtype=np.intp))
    assert np.all(large <= small + 1e-12)


def test_marginals_never_negative_or_above_one():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = rng.integers(2, 7)
        p = rng.random(n)
        prefix = rng.permutation(n)[: rng.integers(0, n)].astype(np.intp)
        for family, vec, cap in (("coverage", p, None),
                                 ("capped_modular", p / n, 0.5)):
            gains = marginals_at_indices(family, vec, cap, prefix)
            assert np.all(gains >= 0.0)
            assert np.all(gains <= 1.0)


def test_value_table_matches_math():
    g = GroundSet(("a", "b"))
    fn = CoverageFunction(p={"a": 0.5, "b": 0.25})
    # spot-check all four subsets through the checker path
    assert check_unit_range(fn, g) == (True, None)
    assert fn.value(["a", "b"]) == pytest.approx(1 - 0.5 * 0.75)
    assert math.isclose(fn.value(["b"]), 0.25)
