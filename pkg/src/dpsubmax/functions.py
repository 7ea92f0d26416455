"""Ground sets, monotone submodular set functions, and exhaustive property checks.

Two concrete families are provided, both normalized to [0, 1]:

  * ``CoverageFunction``: probabilistic coverage, f(S) = 1 - prod_{a in S} (1 - p_a).
  * ``CappedModularFunction``: budget-saturated additive value,
    f(S) = min(cap, sum_{a in S} w_a) with cap in (0, 1].

The checkers (`check_monotone`, `check_submodular`, `check_unit_range`) are
exhaustive over the ground set and therefore restricted to n <= 12 items.
They accept either one of the family objects above or an arbitrary callable
mapping a frozenset of item names to a float, so candidate counterexamples
can be screened with the same tooling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

# Exhaustive checks enumerate all (A, B, x) triples, so cap the ground size.
MAX_CHECK_ITEMS = 12

# Numerical tolerance for the exhaustive checkers: float noise below this is
# not treated as a property violation.
CHECK_TOL = 1e-12


@dataclass(frozen=True)
class GroundSet:
    """An ordered, immutable universe of item names.

    Item order is fixed at construction and defines the index space used by
    every array-valued operation in the package (marginal vectors, expert
    distributions, traces).
    """

    items: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.items) == 0:
            raise ValueError("ground set must contain at least one item")
        if len(set(self.items)) != len(self.items):
            raise ValueError("ground set items must be distinct")
        if not all(isinstance(a, str) and a for a in self.items):
            raise ValueError("ground set items must be non-empty strings")
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(self.items)})

    @property
    def n(self) -> int:
        return len(self.items)

    def index(self, item: str) -> int:
        try:
            return self._index[item]  # type: ignore[attr-defined]
        except KeyError:
            raise ValueError(f"unknown item {item!r}") from None

    def indices(self, items: Iterable[str]) -> np.ndarray:
        return np.array([self.index(a) for a in items], dtype=np.intp)

    def __contains__(self, item: object) -> bool:
        return item in self._index  # type: ignore[attr-defined]

    def __len__(self) -> int:
        return len(self.items)


def default_ground(n: int) -> GroundSet:
    """Ground set with n items named e0, e1, ... (zero-padded, so name order
    equals index order)."""
    if n < 1:
        raise ValueError(f"need at least one item, got n={n}")
    width = len(str(n - 1))
    return GroundSet(tuple(f"e{i:0{width}d}" for i in range(n)))


def _as_param_map(values: Mapping[str, float], what: str) -> dict[str, float]:
    out = {}
    for key, val in values.items():
        if not isinstance(key, str):
            raise ValueError(f"{what} keys must be item names, got {key!r}")
        v = float(val)
        if not np.isfinite(v):
            raise ValueError(f"{what}[{key!r}] must be finite, got {val!r}")
        out[key] = v
    if not out:
        raise ValueError(f"{what} must be non-empty")
    return out


@dataclass(frozen=True)
class CoverageFunction:
    """Probabilistic coverage: f(S) = 1 - prod_{a in S} (1 - p_a), p_a in [0, 1].

    Monotone and submodular for any parameter vector; f(empty) = 0 and
    f(S) <= 1 always hold.
    """

    p: dict[str, float]
    family: str = field(default="coverage", init=False, repr=False)

    def __post_init__(self) -> None:
        p = _as_param_map(self.p, "p")
        for key, val in p.items():
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"p[{key!r}] must lie in [0, 1], got {val}")
        object.__setattr__(self, "p", p)

    def value(self, items: Iterable[str]) -> float:
        misses = 1.0
        seen = set()
        for a in items:
            if a in seen:
                continue
            seen.add(a)
            try:
                misses *= 1.0 - self.p[a]
            except KeyError:
                raise ValueError(f"unknown item {a!r}") from None
        return 1.0 - misses

    def param_vector(self, ground: GroundSet) -> np.ndarray:
        return _bind_params(self.p, ground, "p")

    def params_json(self) -> dict:
        return {"p": dict(sorted(self.p.items()))}


@dataclass(frozen=True)
class CappedModularFunction:
    """Budget-saturated additive value: f(S) = min(cap, sum_{a in S} w_a).

    Weights are nonnegative and the cap lies in (0, 1], so f maps into [0, 1].
    Monotone and submodular (concave function of a modular one).
    """

    w: dict[str, float]
    cap: float
    family: str = field(default="capped_modular", init=False, repr=False)

    def __post_init__(self) -> None:
        w = _as_param_map(self.w, "w")
        for key, val in w.items():
            if val < 0.0:
                raise ValueError(f"w[{key!r}] must be >= 0, got {val}")
        cap = float(self.cap)
        if not 0.0 < cap <= 1.0:
            raise ValueError(f"cap must lie in (0, 1], got {cap}")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "cap", cap)

    def value(self, items: Iterable[str]) -> float:
        total = 0.0
        seen = set()
        for a in items:
            if a in seen:
                continue
            seen.add(a)
            try:
                total += self.w[a]
            except KeyError:
                raise ValueError(f"unknown item {a!r}") from None
        return min(self.cap, total)

    def param_vector(self, ground: GroundSet) -> np.ndarray:
        return _bind_params(self.w, ground, "w")

    def params_json(self) -> dict:
        return {"w": dict(sorted(self.w.items())), "cap": self.cap}


SetFunction = CoverageFunction | CappedModularFunction


def _bind_params(params: Mapping[str, float], ground: GroundSet, what: str) -> np.ndarray:
    stray = set(params) - set(ground.items)
    if stray:
        raise ValueError(f"{what} has keys outside the ground set: {sorted(stray)}")
    try:
        vec = np.array([params[a] for a in ground.items], dtype=np.float64)
    except KeyError as exc:
        raise ValueError(f"{what} is missing ground item {exc.args[0]!r}") from None
    vec.setflags(write=False)
    return vec


def oracle_from_json(obj: Mapping) -> SetFunction:
    """Reconstruct a set function from its {"family", "params"} JSON form."""
    family = obj.get("family")
    params = obj.get("params")
    if not isinstance(params, Mapping):
        raise ValueError("oracle JSON must carry a 'params' mapping")
    if family == "coverage":
        return CoverageFunction(p=dict(params["p"]))
    if family == "capped_modular":
        return CappedModularFunction(w=dict(params["w"]), cap=params["cap"])
    raise ValueError(f"unknown function family {family!r}")


def oracle_to_json(fn: SetFunction) -> dict:
    return {"family": fn.family, "params": fn.params_json()}


# ---------------------------------------------------------------------------
# Index-based fast paths.  The online learners address items by their ground
# index; these helpers avoid per-round name lookups.
# ---------------------------------------------------------------------------


def value_at_indices(family: str, vec: np.ndarray, cap: float | None, idx) -> float:
    """f(S) for S given as an array of distinct ground indices."""
    if family == "coverage":
        if len(idx) == 0:
            return 0.0
        return float(1.0 - np.prod(1.0 - vec[idx]))
    if family == "capped_modular":
        if len(idx) == 0:
            return 0.0
        return float(min(cap, vec[idx].sum()))
    raise ValueError(f"unknown function family {family!r}")


def marginals_at_indices(family: str, vec: np.ndarray, cap: float | None,
                         prefix) -> np.ndarray:
    """Vector of marginal gains f(prefix + a) - f(prefix), one entry per item.

    Entries for items already in the prefix are exactly 0.  Tiny negative
    values from float cancellation are clamped to 0, which is exact for a
    monotone function.
    """
    if family == "coverage":
        if len(prefix) == 0:
            out = vec.copy()
        else:
            stay = float(np.prod(1.0 - vec[prefix]))
            out = stay * vec
    elif family == "capped_modular":
        base = float(vec[prefix].sum()) if len(prefix) else 0.0
        before = min(cap, base)
        out = np.minimum(cap, base + vec) - before
        np.clip(out, 0.0, None, out=out)
    else:
        raise ValueError(f"unknown function family {family!r}")
    if len(prefix):
        out[prefix] = 0.0
    return out


def marginal_vector(fn: SetFunction, ground: GroundSet,
                    prefix: Iterable[str]) -> np.ndarray:
    """Marginal gains of every ground item on top of ``prefix``, in ground order."""
    vec = fn.param_vector(ground)
    cap = fn.cap if isinstance(fn, CappedModularFunction) else None
    idx = ground.indices(set(prefix))
    return marginals_at_indices(fn.family, vec, cap, idx)


# ---------------------------------------------------------------------------
# Exhaustive property checkers.
# ---------------------------------------------------------------------------


def _value_table(fn, ground: GroundSet) -> np.ndarray:
    """f evaluated at every subset, indexed by bitmask over ground order."""
    n = ground.n
    if n > MAX_CHECK_ITEMS:
        raise ValueError(
            f"exhaustive check needs n <= {MAX_CHECK_ITEMS} items, got n={n}")
    items = ground.items
    if isinstance(fn, (CoverageFunction, CappedModularFunction)):
        evaluate = lambda members: fn.value(members)  # noqa: E731
    elif callable(fn):
        evaluate = lambda members: float(fn(frozenset(members)))  # noqa: E731
    else:
        raise ValueError("fn must be a set-function object or a callable")
    table = np.empty(1 << n, dtype=np.float64)
    for mask in range(1 << n):
        members = [items[i] for i in range(n) if mask >> i & 1]
        table[mask] = evaluate(members)
    return table


def _mask_items(mask: int, ground: GroundSet) -> tuple[str, ...]:
    return tuple(ground.items[i] for i in range(ground.n) if mask >> i & 1)


def check_unit_range(fn, ground: GroundSet, tol: float = CHECK_TOL):
    """Check f(empty) = 0 and 0 <= f(S) <= 1 over all subsets.

    Returns (True, None) or (False, witness) with witness = (set, value).
    """
    table = _value_table(fn, ground)
    if abs(table[0]) > tol:
        return False, ((), float(table[0]))
    bad = np.flatnonzero((table < -tol) | (table > 1.0 + tol))
    if bad.size:
        mask = int(bad[0])
        return False, (_mask_items(mask, ground), float(table[mask]))
    return True, None


def check_monotone(fn, ground: GroundSet, tol: float = CHECK_TOL):
    """Exhaustively check f(A) <= f(B) for all A subseteq B.

    Returns (True, None) or (False, (A, B)) for the first violating pair in
    ascending bitmask order of B, then of A.
    """
    table = _value_table(fn, ground)
    n = ground.n
    # best[B] = max_{A subseteq B} f(A), via the subset-max zeta transform.
    best = table.copy()
    masks = np.arange(1 << n)
    for j in range(n):
        bit = 1 << j
        has = np.flatnonzero(masks & bit)
        best[has] = np.maximum(best[has], best[has ^ bit])
    violating = np.flatnonzero(best > table + tol)
    if not violating.size:
        return True, None
    b_mask = int(violating[0])
    for a_mask in range(b_mask + 1):
        if a_mask & ~b_mask:
            continue
        if table[a_mask] > table[b_mask] + tol:
            return False, (_mask_items(a_mask, ground), _mask_items(b_mask, ground))
    raise AssertionError("unreachable: violation vanished on rescan")


def check_submodular(fn, ground: GroundSet, tol: float = CHECK_TOL):
    """Exhaustively check the diminishing-returns inequality
    f(A + x) - f(A) >= f(B + x) - f(B) for all A subseteq B and x outside B.

    Returns (True, None) or (False, (A, B, x)) for the first violating triple
    in ascending bitmask order of B, then of x, then of A.
    """
    table = _value_table(fn, ground)
    n = ground.n
    masks = np.arange(1 << n)
    margs = []
    leasts = []
    any_bad = False
    for x in range(n):
        bit = 1 << x
        without = np.flatnonzero(~(masks & bit).astype(bool))
        # marg[S] = f(S + x) - f(S) for every S not containing x.
        marg = np.full(1 << n, np.inf)
        marg[without] = table[without | bit] - table[without]
        # least[B] = min_{A subseteq B} marg[A], subset-min zeta transform.
        least = marg.copy()
        for j in range(n):
            jbit = 1 << j
            has = np.flatnonzero(masks & jbit)
            least[has] = np.minimum(least[has], least[has ^ jbit])
        margs.append(marg)
        leasts.append(least)
        any_bad = any_bad or bool(np.any(least[without] < marg[without] - tol))
    if not any_bad:
        return True, None
    # Re-scan in canonical order (B, then x, then A) to report the first triple.
    for b_mask in range(1 << n):
        for x in range(n):
            if b_mask >> x & 1:
                continue
            if leasts[x][b_mask] >= margs[x][b_mask] - tol:
                continue
            for a_mask in range(b_mask + 1):
                if a_mask & ~b_mask:
                    continue
                if margs[x][a_mask] < margs[x][b_mask] - tol:
                    return False, (_mask_items(a_mask, ground),
                                   _mask_items(b_mask, ground),
                                   ground.items[x])
    raise AssertionError("unreachable: violation vanished on rescan")
