"""Empirical privacy auditing: outcome counting, eps_hat, bandit delta."""

import json
import math
from collections import Counter

import numpy as np
import pytest

from dpsubmax.audit import (
    AuditConfig,
    AuditReport,
    _eps_hat,
    _resolve_granularity,
    _sequence_space,
    _trial_seeds,
    audit_bandit_delta,
    bandit_mechanism,
    distinguishing_pair,
    estimate_epsilon,
    full_info_mechanism,
)
from dpsubmax.functions import CoverageFunction
from dpsubmax.streams import (
    StreamSpec,
    differing_rounds,
    generate_stream,
    neighboring_stream,
)

pytestmark = pytest.mark.filterwarnings("ignore:n_trials")


def small_pair(horizon=3):
    return distinguishing_pair(n=2, horizon=horizon)


# --- configuration ----------------------------------------------------------

def test_config_requires_neighbors():
    f = generate_stream(StreamSpec(family="coverage", n=3, horizon=6, seed=0,
                                   params={}))
    names = f.ground.items
    repl = CoverageFunction(p={name: 0.42 for name in names})
    g1 = neighboring_stream(f, 2, repl)
    AuditConfig(mechanism=full_info_mechanism(1), stream=f, neighbor=g1,
                n_trials=10)
    g2 = neighboring_stream(g1, 5, repl)
    assert differing_rounds(f, g2) == [2, 5]
    with pytest.raises(ValueError, match=r"rounds \[2, 5\]"):
        AuditConfig(mechanism=full_info_mechanism(1), stream=f, neighbor=g2,
                    n_trials=10)


def test_config_validation():
    f, g = small_pair()
    mech = full_info_mechanism(1)
    with pytest.raises(ValueError):
        AuditConfig(mechanism=mech, stream=f, neighbor=g, n_trials=0)
    with pytest.raises(ValueError):
        AuditConfig(mechanism=mech, stream=f, neighbor=g, n_trials=10,
                    granularity="per-round")
    with pytest.raises(ValueError):
        AuditConfig(mechanism=mech, stream=f, neighbor=g, n_trials=10,
                    alpha=0.0)
    short = distinguishing_pair(n=2, horizon=2)[0]
    with pytest.raises(ValueError, match="horizon"):
        AuditConfig(mechanism=mech, stream=f, neighbor=short, n_trials=10)


def test_distinguishing_pair_structure():
    f, g = distinguishing_pair(n=3, horizon=4, p_hi=0.8, p_lo=0.2)
    assert f.ground == g.ground
    assert differing_rounds(f, g) == [1]
    names = f.ground.items
    # F favors the first item every round; F' favors the second in round 1
    assert f.rounds[0].value([names[0]]) == pytest.approx(0.8)
    assert g.rounds[0].value([names[1]]) == pytest.approx(0.8)
    assert g.rounds[0].value([names[0]]) == pytest.approx(0.2)
    assert g.rounds[1].value([names[0]]) == pytest.approx(0.8)
    with pytest.raises(ValueError):
        distinguishing_pair(n=1)
    with pytest.raises(ValueError):
        distinguishing_pair(horizon=0)


def test_trial_seeds_deterministic_and_distinct():
    f1, g1 = _trial_seeds(7, 100)
    f2, g2 = _trial_seeds(7, 100)
    assert np.array_equal(f1, f2) and np.array_equal(g1, g2)
    assert len(set(f1.tolist()) & set(g1.tolist())) == 0
    f3, _ = _trial_seeds(8, 100)
    assert not np.array_equal(f1, f3)


# --- granularity ------------------------------------------------------------

def test_sequence_space():
    f, _ = small_pair(horizon=3)
    # n=2, k=1: 2 singletons per round, 2^3 sequences
    assert _sequence_space(f, 1) == 8.0
    assert _sequence_space(f, 2) == 27.0  # {a},{b},{a,b} per round


def test_granularity_resolution():
    mech = full_info_mechanism(1)
    f, g = small_pair(horizon=3)
    cfg = AuditConfig(mechanism=mech, stream=f, neighbor=g, n_trials=10)
    assert _resolve_granularity(cfg, 1) == "full"
    f5, g5 = small_pair(horizon=5)  # horizon above the auto cutoff
    cfg5 = AuditConfig(mechanism=mech, stream=f5, neighbor=g5, n_trials=10)
    assert _resolve_granularity(cfg5, 1) == "per_round"
    cfg5_full = AuditConfig(mechanism=mech, stream=f5, neighbor=g5,
                            n_trials=10, granularity="full")
    assert _resolve_granularity(cfg5_full, 1) == "full"  # 32 outcomes: fine
    big_f, big_g = distinguishing_pair(n=8, horizon=6)
    cfg_big = AuditConfig(mechanism=mech, stream=big_f, neighbor=big_g,
                          n_trials=10, granularity="full")
    with pytest.raises(ValueError, match="per_round"):
        _resolve_granularity(cfg_big, 3)
    assert _resolve_granularity(
        AuditConfig(mechanism=mech, stream=big_f, neighbor=big_g,
                    n_trials=10), 3) == "per_round"


# --- the estimator itself ----------------------------------------------------

def test_eps_hat_symmetric_and_smoothed():
    cf = Counter({"A": 90, "B": 10})
    cg = Counter({"A": 60, "B": 40})
    e = _eps_hat(cf, cg, alpha=0.5)
    assert e == pytest.approx(math.log(40.5 / 10.5))
    assert _eps_hat(cg, cf, alpha=0.5) == pytest.approx(e)
    # an outcome seen on only one side is handled by the smoothing
    cg["C"] = 3
    assert _eps_hat(cf, cg, alpha=0.5) == pytest.approx(math.log(3.5 / 0.5))


def test_eps_hat_nonincreasing_in_alpha():
    cf = Counter({"A": 90, "B": 10})
    cg = Counter({"A": 60, "B": 40})
    values = [_eps_hat(cf, cg, alpha=a) for a in (0.25, 0.5, 1.0, 5.0, 50.0)]
    assert all(x >= y - 1e-12 for x, y in zip(values, values[1:]))


def test_eps_hat_empty_counts():
    assert _eps_hat(Counter(), Counter(), alpha=0.5) == 0.0


def test_null_audit_reports_small_epsilon():
    """Same stream on both sides: any eps_hat is pure sampling noise."""
    f, _ = small_pair()
    cfg = AuditConfig(mechanism=full_info_mechanism(1, eps=0.5),
                      stream=f, neighbor=f, n_trials=2000, seed=0)
    report = estimate_epsilon(cfg)
    assert report.granularity == "full"
    assert 0.0 <= report.eps_hat <= 0.5
    assert report.se > 0.0
    assert report.exceedance is None


def test_estimate_epsilon_deterministic():
    f, g = small_pair()
    cfg = AuditConfig(mechanism=full_info_mechanism(1, eps=0.5),
                      stream=f, neighbor=g, n_trials=500, seed=3)
    r1, r2 = estimate_epsilon(cfg), estimate_epsilon(cfg)
    assert r1.eps_hat == r2.eps_hat
    assert r1.se == r2.se


def test_non_private_mechanism_is_flagged():
    """With a huge learning rate the round-1 difference shows up immediately:
    eps_hat must blow past any honest budget."""
    f, g = small_pair(horizon=3)
    cfg = AuditConfig(mechanism=full_info_mechanism(1, eta=50.0),
                      stream=f, neighbor=g, n_trials=2000, seed=1)
    report = estimate_epsilon(cfg)
    assert report.eps_hat > 1.0


def test_ratio_table_sorted_and_consistent():
    f, g = small_pair()
    cfg = AuditConfig(mechanism=full_info_mechanism(1, eps=0.5),
                      stream=f, neighbor=g, n_trials=1000, seed=0)
    report = estimate_epsilon(cfg)
    mags = [abs(row["log_ratio"]) for row in report.ratio_table]
    assert mags == sorted(mags, reverse=True)
    assert report.eps_hat == pytest.approx(mags[0])
    total_f = sum(row["count_f"] for row in report.ratio_table)
    assert total_f == 1000  # full granularity: one outcome per trial


def test_small_trial_count_warns():
    f, g = small_pair()
    cfg = AuditConfig(mechanism=full_info_mechanism(1), stream=f, neighbor=g,
                      n_trials=50)
    with pytest.warns(UserWarning, match="too noisy"):
        estimate_epsilon(cfg)


def test_report_json_keys():
    report = AuditReport(eps_hat=0.2, se=0.01, n_trials=100,
                         granularity="full", alpha=0.5)
    obj = json.loads(report.to_json())
    assert set(obj) == {"eps_hat", "slack", "exceedance", "bound", "trials",
                        "granularity", "se", "alpha", "eps_hat_conditional",
                        "caveat"}
    assert obj["slack"] == 0.1
    assert "one-sided" in obj["caveat"]


# --- bandit delta audit -------------------------------------------------------

def test_bandit_delta_exceedance_matches_binomial_tail():
    f, g = small_pair(horizon=3)
    mech = bandit_mechanism("interval", k=1, gamma=0.5, eta=0.5)
    cfg = AuditConfig(mechanism=mech, stream=f, neighbor=g, n_trials=2000,
                      seed=0)
    report = audit_bandit_delta(cfg)
    # M ~ Binomial(3, 1/2); P(M >= 3) = 1/8
    assert report.exceedance == pytest.approx(0.125, abs=0.03)
    assert report.exceedance_bound == pytest.approx(math.exp(-6.0))
    assert report.eps_hat_conditional is not None
    assert not math.isnan(report.eps_hat_conditional)
    assert report.eps_hat >= 0.0


def test_bandit_delta_gamma_override_and_probe():
    f, g = small_pair(horizon=3)
    mech = bandit_mechanism("interval", k=1, gamma=0.25, eta=0.5)
    cfg = AuditConfig(mechanism=mech, stream=f, neighbor=g, n_trials=400,
                      seed=0)
    auto = audit_bandit_delta(cfg)
    assert auto.exceedance_bound == pytest.approx(math.exp(-8 * 0.0625 * 3))
    manual = audit_bandit_delta(cfg, gamma=0.5)
    assert manual.exceedance_bound == pytest.approx(math.exp(-6.0))


def test_bandit_delta_rejects_full_info():
    f, g = small_pair()
    cfg = AuditConfig(mechanism=full_info_mechanism(1), stream=f, neighbor=g,
                      n_trials=10)
    with pytest.raises(ValueError, match="bandit"):
        audit_bandit_delta(cfg)


def test_presampled_variant_audits_cleanly():
    f, g = small_pair(horizon=3)
    mech = bandit_mechanism("presampled", k=1, eps=1.0, gamma=0.3)
    cfg = AuditConfig(mechanism=mech, stream=f, neighbor=g, n_trials=400,
                      seed=2)
    report = audit_bandit_delta(cfg)
    assert 0.0 <= report.exceedance <= 1.0
    assert report.granularity == "full"


def test_mechanism_factories():
    f, _ = small_pair()
    tr = full_info_mechanism(k=2, eps=1.0)(f, 5)
    assert tr.algo == "full_info"
    assert tr.k == 2
    tr = bandit_mechanism("naive", k=1, gamma=0.4)(f, 5)
    assert tr.algo == "bandit:naive"
    assert tr.params["gamma"] == 0.4
