"""Bandit-feedback private online submodular maximization.

Three variants share structure: k Hedge experts, a Bernoulli(gamma) explore
coin each round, and one-point feedback.  On an explore round the learner
picks a uniform (expert i, item a), plays the union of expert i's prefix and
a, and feeds the observed set value to expert i at coordinate a (every other
expert receives the all-zero vector, a Hedge identity).

  * ``interval``: the held set is replayed unchanged on exploit rounds and
    resampled only after explores; eta budgets for the high-probability
    exploration count 2*gamma*T.
  * ``presampled``: all T explore flags are drawn up front; eta is a function
    of the realized count M, removing the delta-excess of the interval
    variant at the cost of Theta(T) flag storage.
  * ``naive``: experts resample every round; exploit rounds feed genuine
    all-zero updates; eta budgets for all T rounds.

RNG discipline: one master seed spawns (coin, expert-index, item, k expert)
streams, so variants sharing a seed see common random numbers on the streams
they share — in particular, interval and presampled runs explore on identical
rounds.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from sklearn.base import BaseEstimator

from .functions import CappedModularFunction, SetFunction, value_at_indices
from .hedge import calibrate_eta_bandit, calibrate_eta_full_info, hedge_init
from .streams import FunctionStream
from .trace import Trace, spawn_run_rngs

VARIANTS = ("interval", "presampled", "naive")


def calibrate_gamma(k: int, n: int, horizon: int) -> float:
    """Exploration rate gamma = k * ((16 n ln n)^2 / T)^(1/3), clamped to 1.

    Emits a warning when the raw value exceeds 1 (small-T regimes where the
    formula's asymptotic assumption fails).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n < 2:
        raise ValueError(f"calibrate_gamma requires n >= 2 (ln n > 0), got n={n}")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    raw = k * ((16.0 * n * math.log(n)) ** 2 / horizon) ** (1.0 / 3.0)
    if raw > 1.0:
        warnings.warn(
            f"gamma formula gives {raw:.4g} > 1 at T={horizon}; clamping to 1",
            stacklevel=2)
        return 1.0
    return raw


@dataclass(frozen=True)
class BanditConfig:
    """Parameters of one bandit run.  gamma/eta None means calibrated; an
    explicit eta selects the non-private mode (eps ignored, labeled "inf")."""

    variant: str = "interval"
    k: int = 1
    eps: float = 1.0
    delta: float = 1e-3
    gamma: float | None = None
    eta: float | None = None
    horizon: int | None = None
    seed: int = 0
    record_feedback: bool = False

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(
                f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.gamma is not None and not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")


@dataclass
class ExploreRecord:
    """Outcome of one explore round: 0-based round t, 0-based expert index,
    item name, and the observed value of the played set."""

    t: int
    expert: int
    item: str
    value: float


def estimator_entry(f_t: SetFunction, prefix: Iterable[str],
                    record: ExploreRecord | None, expert: int, item: str) -> float:
    """One coordinate of the bandit feedback estimator.

    Nonzero only when this round explored exactly (expert, item), in which
    case it equals the full set value f_t(prefix + item) — not the marginal;
    the uniform scale bias this introduces cancels in the experts' argmax.
    """
    if record is None or record.expert != expert or record.item != item:
        return 0.0
    members = set(prefix)
    members.add(item)
    return f_t.value(members)


def _resolve(config: BanditConfig, n: int, T: int) -> tuple[float, float, str | float]:
    """Effective (gamma, eta, eps-label) for a run of horizon T."""
    gamma = config.gamma if config.gamma is not None else calibrate_gamma(
        config.k, n, T)
    if config.eta is not None:
        if not (config.eta > 0.0 and math.isfinite(config.eta)):
            raise ValueError(f"eta override must be positive and finite, got {config.eta}")
        return gamma, float(config.eta), "inf"
    if config.variant == "interval":
        eta = calibrate_eta_bandit(config.eps, config.delta, config.k, T, gamma)
    elif config.variant == "naive":
        # Every round is an update round, so the budget covers all T of them —
        # the same count as the full-information calibration.
        eta = calibrate_eta_full_info(config.eps, config.delta, config.k, T)
    else:  # presampled: eta depends on the realized explore count, set later
        eta = math.nan
    return gamma, eta, config.eps


def _presampled_eta(eps: float, delta: float, k: int, M: int) -> float:
    return eps / (k * math.sqrt(32.0 * (M + 1) * math.log(k / delta)))


class BanditState:
    """Single-step interface for the bandit loop (one round per call)."""

    def __init__(self, stream_ground, n: int, horizon: int, config: BanditConfig):
        self.ground = stream_ground
        self.config = config
        self.horizon = horizon
        self.gamma, self.eta, self.eps_label = _resolve(config, n, horizon)
        self.rngs = spawn_run_rngs(config.seed, config.k)
        if config.variant == "presampled":
            self.flags = self.rngs.coin.random(horizon) < self.gamma
            M = int(self.flags.sum())
            if config.eta is None:
                self.eta = _presampled_eta(config.eps, config.delta, config.k, M)
        else:
            self.flags = None
        self.experts = [hedge_init(n, self.eta) for _ in range(config.k)]
        if config.variant == "naive":
            # Re-drawn at the start of every round; never sampled up front.
            self.held = None
        else:
            self.held = np.array(
                [exp.sample(rng)
                 for exp, rng in zip(self.experts, self.rngs.experts)],
                dtype=np.intp)
        self.t = 0

    def _explore_now(self) -> bool:
        if self.config.variant == "presampled":
            return bool(self.flags[self.t])
        return bool(self.rngs.coin.random() < self.gamma)


def bandit_round(state: BanditState, f_t: SetFunction):
    """Advance one round; returns (played set, record) and mutates state.

    The played set is a sorted tuple of ground indices; record is an
    ExploreRecord on explore rounds and None otherwise.
    """
    if state.t >= state.horizon:
        raise ValueError(f"horizon {state.horizon} exhausted")
    vec = f_t.param_vector(state.ground)
    cap = f_t.cap if isinstance(f_t, CappedModularFunction) else None
    family = f_t.family
    n = state.ground.n
    if state.config.variant == "naive":
        state.held = np.array(
            [exp.sample(rng) for exp, rng in zip(state.experts, state.rngs.experts)],
            dtype=np.intp)
    record = None
    if state._explore_now():
        i = int(state.rngs.expert_pick.integers(state.config.k))
        a = int(state.rngs.item.integers(n))
        played = np.unique(np.append(state.held[:i], a))
        value = value_at_indices(family, vec, cap, played)
        gains = np.zeros(n)
        gains[a] = value
        state.experts[i].update(gains)
        record = ExploreRecord(t=state.t, expert=i, item=state.ground.items[a],
                               value=value)
        if state.config.variant != "naive":
            state.held = np.array(
                [exp.sample(rng)
                 for exp, rng in zip(state.experts, state.rngs.experts)],
                dtype=np.intp)
    else:
        played = np.unique(state.held)
        value = value_at_indices(family, vec, cap, played)
    state.t += 1
    return tuple(played.tolist()), record


def _block_values(family, matrix, caps, t0, t1, idx) -> np.ndarray:
    """Values of one fixed index set over rounds [t0, t1)."""
    sub = matrix[t0:t1, idx]
    if family == "coverage":
        return 1.0 - np.prod(1.0 - sub, axis=1)
    return np.minimum(caps[t0:t1], sub.sum(axis=1))


def run_bandit(stream: FunctionStream, config: BanditConfig) -> Trace:
    """Run one bandit variant over a stream; deterministic given (stream, config).

    Equivalent to iterating `bandit_round`, with exploit stretches evaluated
    in vectorized blocks.
    """
    if stream.family is None:
        raise ValueError("mixed-family streams are not supported by the learners")
    T, n = stream.horizon, stream.ground.n
    if config.horizon is not None and config.horizon != T:
        raise ValueError(
            f"config.horizon={config.horizon} != stream horizon {T}")
    k = config.k
    gamma, eta, eps_label = _resolve(config, n, T)
    rngs = spawn_run_rngs(config.seed, k)
    flags = rngs.coin.random(T) < gamma
    if config.variant == "presampled" and config.eta is None:
        eta = _presampled_eta(config.eps, config.delta, k, int(flags.sum()))
    experts = [hedge_init(n, eta) for _ in range(k)]
    expert_rngs = rngs.experts

    def sample_all() -> np.ndarray:
        return np.array([exp.sample(rng)
                         for exp, rng in zip(experts, expert_rngs)], dtype=np.intp)

    matrix, caps, family = stream.matrix, stream.caps, stream.family
    choices = np.empty((T, k), dtype=np.intp)
    payoffs = np.empty(T, dtype=np.float64)
    explore_expert = np.full(T, -1, dtype=np.intp)
    explore_item = np.full(T, -1, dtype=np.intp)
    gains_rec = (np.zeros((T, k, n), dtype=np.float64)
                 if config.record_feedback else None)

    explore_idx = np.flatnonzero(flags)
    picks = rngs.expert_pick.integers(k, size=explore_idx.size)
    items = rngs.item.integers(n, size=explore_idx.size)
    resample_each_round = config.variant == "naive"
    held = None if resample_each_round else sample_all()

    def fill_block(t0: int, t1: int) -> None:
        """Rounds [t0, t1) with no expert update in between."""
        if t1 <= t0:
            return
        if resample_each_round:
            for i, (exp, rng) in enumerate(zip(experts, expert_rngs)):
                cum = np.cumsum(exp.distribution())
                col = np.searchsorted(cum, rng.random(t1 - t0), side="left")
                choices[t0:t1, i] = np.minimum(col, n - 1)
            if k == 1:
                col = choices[t0:t1, 0]
                rows = np.arange(t0, t1)
                if family == "coverage":
                    payoffs[t0:t1] = 1.0 - (1.0 - matrix[rows, col])
                else:
                    payoffs[t0:t1] = np.minimum(caps[t0:t1], matrix[rows, col])
            else:
                for t in range(t0, t1):
                    cap = float(caps[t]) if caps is not None else None
                    payoffs[t] = value_at_indices(
                        family, matrix[t], cap, np.unique(choices[t]))
        else:
            choices[t0:t1] = held
            payoffs[t0:t1] = _block_values(family, matrix, caps, t0, t1,
                                           np.unique(held))

    t0 = 0
    for j, te in enumerate(explore_idx):
        te = int(te)
        fill_block(t0, te)
        if resample_each_round:
            held = sample_all()
        choices[te] = held
        i, a = int(picks[j]), int(items[j])
        played = np.unique(np.append(held[:i], a))
        cap = float(caps[te]) if caps is not None else None
        value = value_at_indices(family, matrix[te], cap, played)
        payoffs[te] = value
        explore_expert[te] = i
        explore_item[te] = a
        gains = np.zeros(n)
        gains[a] = value
        experts[i].update(gains)
        if gains_rec is not None:
            gains_rec[te, i] = gains
        if not resample_each_round:
            held = sample_all()
        t0 = te + 1
    fill_block(t0, T)

    params = {"algo": f"bandit:{config.variant}", "variant": config.variant,
              "k": k, "eps": eps_label, "delta": config.delta, "eta": eta,
              "gamma": gamma, "seed": config.seed, "horizon": T}
    return Trace(ground=stream.ground, k=k, algo=f"bandit:{config.variant}",
                 params=params, choices=choices, payoffs=payoffs,
                 explore=flags, explore_expert=explore_expert,
                 explore_item=explore_item, gains=gains_rec)


def replay_bandit_gains(trace: Trace, stream: FunctionStream) -> np.ndarray:
    """Reconstruct the (T, k, n) estimator feedback of a bandit trace.

    Explore round t matched to (expert i, item a) contributed the observed
    payoff at coordinate (i, a); everything else is zero.
    """
    if not trace.algo.startswith("bandit:"):
        raise ValueError(f"expected a bandit trace, got {trace.algo!r}")
    if trace.ground != stream.ground:
        raise ValueError("trace and stream ground sets differ")
    T, k, n = trace.horizon, trace.k, stream.ground.n
    out = np.zeros((T, k, n), dtype=np.float64)
    for t in np.flatnonzero(trace.explore):
        i = int(trace.explore_expert[t])
        a = int(trace.explore_item[t])
        out[t, i, a] = trace.payoffs[t]
    return out


def explore_flags(seed: int, k: int, gamma: float, horizon: int) -> np.ndarray:
    """The explore-coin sequence a bandit run with this seed draws.

    Single source of truth for concentration studies of the explore count M:
    run_bandit derives its flags from the identical stream of coin draws
    (verified by test against full runs).
    """
    rngs = spawn_run_rngs(seed, k)
    return rngs.coin.random(horizon) < gamma


def explore_count_tail(traces: list[Trace], gamma: float, horizon: int) -> float:
    """Empirical exceedance rate of the event {M >= 2 * gamma * T}."""
    if len(traces) < 100:
        raise ValueError(
            f"need at least 100 traces for a meaningful rate, got {len(traces)}")
    threshold = 2.0 * gamma * horizon
    return float(np.mean([t.explore_count >= threshold for t in traces]))


class BanditMaximizer(BaseEstimator):
    """Private bandit online submodular maximizer (scikit-learn style).

    Attributes after fit: ``trace_``, ``eta_``, ``gamma_``, ``explore_count_``.
    """

    def __init__(self, variant: str = "interval", k: int = 1, eps: float = 1.0,
                 delta: float = 1e-3, gamma: float | None = None,
                 eta: float | None = None, seed: int = 0,
                 record_feedback: bool = False):
        self.variant = variant
        self.k = k
        self.eps = eps
        self.delta = delta
        self.gamma = gamma
        self.eta = eta
        self.seed = seed
        self.record_feedback = record_feedback

    def fit(self, stream: FunctionStream, y=None) -> "BanditMaximizer":
        if not isinstance(stream, FunctionStream):
            raise ValueError("fit expects a FunctionStream")
        config = BanditConfig(
            variant=self.variant, k=self.k, eps=self.eps, delta=self.delta,
            gamma=self.gamma, eta=self.eta, seed=self.seed,
            record_feedback=self.record_feedback)
        self.trace_ = run_bandit(stream, config)
        self.eta_ = float(self.trace_.params["eta"])
        self.gamma_ = float(self.trace_.params["gamma"])
        self.explore_count_ = self.trace_.explore_count
        return self
