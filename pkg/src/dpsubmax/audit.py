"""Empirical differential-privacy estimation on neighboring streams.

Runs a mechanism many times on two streams that differ in at most one round,
counts output frequencies, and reports the largest smoothed log-likelihood
ratio over observed outcomes:

    eps_hat = max_o | ln((count_F(o) + alpha) / (count_F'(o) + alpha)) |

with Jeffreys-style pseudo-count alpha = 0.5.  The estimate is one-sided: a
large eps_hat (beyond the claimed eps plus slack, with bootstrap confidence)
refutes a privacy claim, but a small one never certifies it — at this scale
the delta term, rare outcomes, and unseen event mass are all invisible.
delta is folded into the reporting slack rather than estimated.

Outcomes are counted either as whole played-set sequences ("full", feasible
for tiny horizons) or as pooled per-round (t, set) events ("per_round").
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bandit import BanditConfig, run_bandit
from .full_info import run_full_info
from .functions import CoverageFunction
from .streams import FunctionStream, canonical_dumps, differing_rounds
from .trace import Trace

DEFAULT_ALPHA = 0.5
DEFAULT_SLACK = 0.1
MIN_REPORTED_TRIALS = 10_000
MAX_FULL_OUTCOMES = 10_000
AUTO_FULL_MAX_HORIZON = 4

Mechanism = Callable[[FunctionStream, int], Trace]


@dataclass
class AuditConfig:
    """One audit: a mechanism, a neighboring stream pair, and trial counts."""

    mechanism: Mechanism
    stream: FunctionStream
    neighbor: FunctionStream
    n_trials: int = 10_000
    granularity: str = "auto"          # auto | full | per_round
    alpha: float = DEFAULT_ALPHA
    seed: int = 0
    n_bootstrap: int = 50

    def __post_init__(self) -> None:
        if self.n_trials < 1:
            raise ValueError(f"n_trials must be >= 1, got {self.n_trials}")
        if self.granularity not in ("auto", "full", "per_round"):
            raise ValueError(
                f"granularity must be auto, full, or per_round, "
                f"got {self.granularity!r}")
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.n_bootstrap < 0:
            raise ValueError(f"n_bootstrap must be >= 0, got {self.n_bootstrap}")
        if self.stream.ground != self.neighbor.ground:
            raise ValueError("stream pair must share a ground set")
        if self.stream.horizon != self.neighbor.horizon:
            raise ValueError("stream pair must share a horizon")
        diff = differing_rounds(self.stream, self.neighbor)
        if len(diff) > 1:
            raise ValueError(
                f"streams must be neighbors (differ in at most one round); "
                f"these differ in rounds {diff}")


@dataclass
class AuditReport:
    """Result of one empirical privacy estimate."""

    eps_hat: float
    se: float
    n_trials: int
    granularity: str
    alpha: float
    slack: float = DEFAULT_SLACK
    ratio_table: list = field(default_factory=list, repr=False)
    exceedance: float | None = None      # empirical P(M >= 2*gamma*T), bandit only
    exceedance_bound: float | None = None  # analytic exp(-8 gamma^2 T)
    eps_hat_conditional: float | None = None  # restricted to runs with M < 2*gamma*T
    caveat: str = ("one-sided: a large eps_hat refutes the privacy claim; "
                   "a small one does not certify it")

    def to_json(self) -> str:
        def finite(v):
            # canonical JSON has no NaN; absent estimates serialize as null
            return None if isinstance(v, float) and not math.isfinite(v) else v

        return canonical_dumps({
            "eps_hat": finite(self.eps_hat),
            "slack": self.slack,
            "exceedance": self.exceedance,
            "bound": self.exceedance_bound,
            "trials": self.n_trials,
            "granularity": self.granularity,
            "se": finite(self.se),
            "alpha": self.alpha,
            "eps_hat_conditional": finite(self.eps_hat_conditional),
            "caveat": self.caveat,
        })


def _trial_seeds(seed: int, n_trials: int) -> tuple[np.ndarray, np.ndarray]:
    """Independent per-trial seeds for the two sides of the audit."""
    side_f, side_g = np.random.SeedSequence(seed).spawn(2)
    return (side_f.generate_state(n_trials, dtype=np.uint64),
            side_g.generate_state(n_trials, dtype=np.uint64))


def _sequence_space(stream: FunctionStream, k: int) -> float:
    """Upper bound on distinct full-output sequences: every played set is a
    nonempty subset of size <= k, so the space is (sum_j C(n,j))^T."""
    n = len(stream.ground.items)
    per_round = sum(math.comb(n, j) for j in range(1, min(k, n) + 1))
    return float(per_round) ** stream.horizon


def _resolve_granularity(config: AuditConfig, k: int) -> str:
    if config.granularity == "per_round":
        return "per_round"
    space = _sequence_space(config.stream, k)
    if config.granularity == "full":
        if space > MAX_FULL_OUTCOMES:
            raise ValueError(
                f"full-sequence outcome space ~{space:.3g} exceeds "
                f"{MAX_FULL_OUTCOMES}; use granularity='per_round'")
        return "full"
    # auto: whole sequences only when the horizon is tiny and the space small
    if config.stream.horizon <= AUTO_FULL_MAX_HORIZON and space <= MAX_FULL_OUTCOMES:
        return "full"
    return "per_round"


def _run_side(mechanism: Mechanism, stream: FunctionStream, seeds: np.ndarray,
              granularity: str) -> tuple[Counter, np.ndarray]:
    """Run all trials on one stream; returns (outcome counts, explore counts).

    Full granularity counts one sequence key per trial; per_round counts one
    (t, set) event per round per trial (totals then differ by a factor of T,
    identically on both sides).
    """
    counts: Counter = Counter()
    explore_counts = np.empty(seeds.shape[0], dtype=np.int64)
    for i, s in enumerate(seeds):
        trace = mechanism(stream, int(s))
        sets = tuple(trace.played_sets())
        if granularity == "full":
            counts[sets] += 1
        else:
            for t, played in enumerate(sets):
                counts[(t, played)] += 1
        explore_counts[i] = trace.explore_count
    return counts, explore_counts


def _eps_hat(counts_f: Counter, counts_g: Counter, alpha: float,
             with_table: bool = False):
    """Symmetric max smoothed log-ratio over outcomes observed on either side.

    Both sides must hold the same number of trials so raw counts are
    directly comparable.
    """
    keys = sorted(set(counts_f) | set(counts_g))
    if not keys:
        return (0.0, []) if with_table else 0.0
    cf = np.array([counts_f.get(o, 0) for o in keys], dtype=np.float64)
    cg = np.array([counts_g.get(o, 0) for o in keys], dtype=np.float64)
    ratios = np.log(cf + alpha) - np.log(cg + alpha)
    best = float(np.max(np.abs(ratios)))
    if not with_table:
        return best
    order = np.argsort(-np.abs(ratios))
    table = [{"outcome": _format_outcome(keys[i]),
              "count_f": int(cf[i]), "count_g": int(cg[i]),
              "log_ratio": float(ratios[i])}
             for i in order]
    return best, table


def _format_outcome(key) -> str:
    if len(key) == 2 and isinstance(key[0], int) and not isinstance(key[1], int):
        t, played = key
        return f"t{t + 1}:{{{','.join(map(str, played))}}}"
    return "|".join("{" + ",".join(map(str, played)) + "}" for played in key)


def _bootstrap_se(counts_f: Counter, counts_g: Counter, alpha: float,
                  n_bootstrap: int, rng: np.random.Generator) -> float:
    """Monte-Carlo SE of eps_hat under multinomial resampling of both sides."""
    if n_bootstrap < 2:
        return float("nan")
    keys = sorted(set(counts_f) | set(counts_g))
    cf = np.array([counts_f.get(o, 0) for o in keys], dtype=np.float64)
    cg = np.array([counts_g.get(o, 0) for o in keys], dtype=np.float64)
    nf, ng = int(cf.sum()), int(cg.sum())
    reps = np.empty(n_bootstrap)
    for b in range(n_bootstrap):
        rf = rng.multinomial(nf, cf / nf)
        rg = rng.multinomial(ng, cg / ng)
        reps[b] = np.max(np.abs(np.log(rf + alpha) - np.log(rg + alpha)))
    return float(np.std(reps, ddof=1))


def estimate_epsilon(config: AuditConfig) -> AuditReport:
    """Empirical epsilon for a mechanism on a neighboring stream pair."""
    if config.n_trials < MIN_REPORTED_TRIALS:
        warnings.warn(
            f"n_trials={config.n_trials} < {MIN_REPORTED_TRIALS}: the "
            f"estimate is too noisy to report", stacklevel=2)
    probe = config.mechanism(config.stream, 0)
    granularity = _resolve_granularity(config, probe.k)
    seeds_f, seeds_g = _trial_seeds(config.seed, config.n_trials)
    counts_f, _ = _run_side(config.mechanism, config.stream, seeds_f, granularity)
    counts_g, _ = _run_side(config.mechanism, config.neighbor, seeds_g, granularity)
    eps_hat, table = _eps_hat(counts_f, counts_g, config.alpha, with_table=True)
    se = _bootstrap_se(counts_f, counts_g, config.alpha, config.n_bootstrap,
                       np.random.default_rng(np.random.SeedSequence(config.seed).spawn(3)[2]))
    return AuditReport(eps_hat=eps_hat, se=se, n_trials=config.n_trials,
                       granularity=granularity, alpha=config.alpha,
                       ratio_table=table[:50])


def audit_bandit_delta(config: AuditConfig, gamma: float | None = None) -> AuditReport:
    """Bandit audit with explicit explore-count accounting.

    Reports the empirical exceedance rate P(M >= 2*gamma*T) pooled over both
    sides, the analytic tail bound exp(-8 gamma^2 T), the unconditional
    eps_hat, and eps_hat restricted to trials with M < 2*gamma*T (the regime
    where interval-variant privacy accounting applies; the complement is
    covered by the delta excess).  gamma is read from the mechanism's traces
    unless given.
    """
    if config.n_trials < MIN_REPORTED_TRIALS:
        warnings.warn(
            f"n_trials={config.n_trials} < {MIN_REPORTED_TRIALS}: the "
            f"estimate is too noisy to report", stacklevel=2)
    probe = config.mechanism(config.stream, 0)
    if not str(probe.algo).startswith("bandit"):
        raise ValueError(
            f"audit_bandit_delta needs a bandit mechanism, got {probe.algo!r}")
    if gamma is None:
        gamma = float(probe.params["gamma"])
    T = config.stream.horizon
    granularity = _resolve_granularity(config, probe.k)

    seeds_f, seeds_g = _trial_seeds(config.seed, config.n_trials)
    threshold = 2.0 * gamma * T

    def run(stream, seeds):
        counts: Counter = Counter()
        kept: Counter = Counter()
        n_kept = 0
        exceed = 0
        for s in seeds:
            trace = config.mechanism(stream, int(s))
            m = trace.explore_count
            sets = tuple(trace.played_sets())
            keys = ([sets] if granularity == "full"
                    else [(t, played) for t, played in enumerate(sets)])
            counts.update(keys)
            if m >= threshold:
                exceed += 1
            else:
                kept.update(keys)
                n_kept += 1
        return counts, kept, n_kept, exceed

    counts_f, kept_f, nf_kept, exceed_f = run(config.stream, seeds_f)
    counts_g, kept_g, ng_kept, exceed_g = run(config.neighbor, seeds_g)

    eps_unconditional, table = _eps_hat(counts_f, counts_g, config.alpha,
                                        with_table=True)
    # Conditioning can leave the two sides with different trial counts;
    # rescale the smaller side's counts so raw counts stay comparable.
    if nf_kept > 0 and ng_kept > 0:
        scale = nf_kept / ng_kept
        kept_g = Counter({o: c * scale for o, c in kept_g.items()})
        eps_conditional = _eps_hat(kept_f, kept_g, config.alpha)
    else:
        eps_conditional = float("nan")
    se = _bootstrap_se(counts_f, counts_g, config.alpha, config.n_bootstrap,
                       np.random.default_rng(np.random.SeedSequence(config.seed).spawn(3)[2]))
    exceedance = (exceed_f + exceed_g) / (2.0 * config.n_trials)
    return AuditReport(
        eps_hat=eps_unconditional, se=se, n_trials=config.n_trials,
        granularity=granularity, alpha=config.alpha, ratio_table=table[:50],
        exceedance=exceedance,
        exceedance_bound=math.exp(-8.0 * gamma * gamma * T),
        eps_hat_conditional=eps_conditional)


def full_info_mechanism(k: int, eps: float = 1.0, delta: float = 1e-3,
                        eta: float | None = None) -> Mechanism:
    """Mechanism factory: the full-information cascade as (stream, seed) -> Trace."""

    def mech(stream: FunctionStream, seed: int) -> Trace:
        return run_full_info(stream, k=k, eps=eps, delta=delta, seed=seed,
                             eta=eta)

    return mech


def bandit_mechanism(variant: str, k: int, eps: float = 1.0,
                     delta: float = 1e-3, gamma: float | None = None,
                     eta: float | None = None) -> Mechanism:
    """Mechanism factory: a bandit variant as (stream, seed) -> Trace."""

    def mech(stream: FunctionStream, seed: int) -> Trace:
        cfg = BanditConfig(variant=variant, k=k, eps=eps, delta=delta,
                           gamma=gamma, eta=eta, horizon=stream.horizon,
                           seed=seed)
        return run_bandit(stream, cfg)

    return mech


def distinguishing_pair(n: int = 2, horizon: int = 3,
                        p_hi: float = 0.9, p_lo: float = 0.1
                        ) -> tuple[FunctionStream, FunctionStream]:
    """A maximally distinguishing neighboring pair for negative tests.

    F repeats one coverage function whose best singleton is the first item;
    F' replaces round 1 with the same function under a swap that moves the
    best singleton to the second item.
    """
    if n < 2:
        raise ValueError(f"need n >= 2 items, got {n}")
    if horizon < 1:
        raise ValueError(f"need horizon >= 1, got {horizon}")
    from .functions import default_ground
    ground = default_ground(n)
    names = ground.items
    base = {name: p_lo for name in names}
    f = CoverageFunction(p={**base, names[0]: p_hi})
    f_swapped = CoverageFunction(p={**base, names[1]: p_hi})
    stream = FunctionStream(ground=ground, rounds=(f,) * horizon)
    neighbor = FunctionStream(ground=ground,
                              rounds=(f_swapped,) + (f,) * (horizon - 1))
    return stream, neighbor
