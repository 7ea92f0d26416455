"""Multiplicative-weights (Hedge) experts over a finite arm set.

State is kept in log-space: log_weights start at 0 and accumulate eta * g per
round, so the representation never overflows for bounded payoffs (log-weights
stay within eta * T in magnitude) and two consecutive updates compose exactly
additively.  Sampling uses a single uniform draw against the cumulative
distribution, with ties resolved toward the lower index.

`regret_certificate` evaluates both sides of the standard Hedge guarantee for
a realized run with gains g_t in [0, 1]^n:

    max_i sum_t g_t(i) - sum_t <x_t, g_t>
        <= eta * sum_t <x_t, g_t^2> + ln(n) / eta

which holds deterministically for every sequence, not just in expectation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Margin allowed when verifying the certificate inequality numerically.
CERTIFICATE_TOL = 1e-9


class ExpertState:
    """Hedge weights over n arms at learning rate eta, stored as log-weights."""

    __slots__ = ("log_weights", "eta", "rounds_seen", "_probs")

    def __init__(self, n: int, eta: float):
        if n < 1:
            raise ValueError(f"need at least one arm, got n={n}")
        eta = float(eta)
        if not (eta > 0.0 and math.isfinite(eta)):
            raise ValueError(f"eta must be positive and finite, got {eta}")
        self.log_weights = np.zeros(n, dtype=np.float64)
        self.eta = eta
        self.rounds_seen = 0
        self._probs: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.log_weights.shape[0]

    def distribution(self) -> np.ndarray:
        """Current sampling distribution x(i) = w(i) / sum_j w(j)."""
        if self._probs is None:
            shifted = self.log_weights - self.log_weights.max()
            probs = np.exp(shifted)
            probs /= probs.sum()
            self._probs = probs
        return self._probs

    def sample(self, rng: np.random.Generator) -> int:
        """Draw an arm index from the current distribution.

        One uniform variate against the cumulative distribution;
        ``searchsorted(..., side='left')`` resolves boundary ties toward the
        lower index.
        """
        cum = np.cumsum(self.distribution())
        idx = int(np.searchsorted(cum, rng.random(), side="left"))
        return min(idx, self.n - 1)

    def update(self, gains: np.ndarray) -> None:
        """Apply one multiplicative update: log w(i) += eta * g(i).

        Gains must lie in [0, 1]; anything else indicates a broken feedback
        path and is rejected.
        """
        gains = np.asarray(gains, dtype=np.float64)
        if gains.shape != self.log_weights.shape:
            raise ValueError(
                f"gains shape {gains.shape} != ({self.n},)")
        if np.any(gains < 0.0) or np.any(gains > 1.0) or not np.all(np.isfinite(gains)):
            raise ValueError("gains must lie in [0, 1]")
        self.log_weights += self.eta * gains
        self.rounds_seen += 1
        self._probs = None


def hedge_init(n: int, eta: float) -> ExpertState:
    """Fresh expert: uniform weights (all log-weights zero)."""
    return ExpertState(n, eta)


def hedge_sample(state: ExpertState, rng: np.random.Generator) -> int:
    return state.sample(rng)


def hedge_update(state: ExpertState, gains: np.ndarray) -> ExpertState:
    state.update(gains)
    return state


@dataclass
class HedgeHistory:
    """Realized run of a single Hedge expert.

    xs[t] is the distribution *before* observing gains[t]; choices[t] is the
    arm sampled from xs[t].
    """

    eta: float
    xs: np.ndarray       # (T, n)
    gains: np.ndarray    # (T, n)
    choices: np.ndarray  # (T,)

    @property
    def horizon(self) -> int:
        return self.xs.shape[0]


def run_hedge(eta: float, gains: np.ndarray,
              rng: np.random.Generator | int | None = 0) -> HedgeHistory:
    """Run one Hedge expert over a (T, n) gain matrix, sampling each round."""
    gains = np.asarray(gains, dtype=np.float64)
    if gains.ndim != 2:
        raise ValueError(f"gains must be (T, n), got shape {gains.shape}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    T, n = gains.shape
    state = hedge_init(n, eta)
    xs = np.empty((T, n), dtype=np.float64)
    choices = np.empty(T, dtype=np.intp)
    for t in range(T):
        xs[t] = state.distribution()
        choices[t] = state.sample(rng)
        state.update(gains[t])
    return HedgeHistory(eta=float(eta), xs=xs, gains=gains.copy(), choices=choices)


def regret_certificate(history: HedgeHistory) -> tuple[float, float]:
    """Evaluate (lhs, rhs) of the Hedge regret inequality for a realized run.

    lhs = max_i sum_t g_t(i) - sum_t <x_t, g_t>
    rhs = eta * sum_t <x_t, g_t^2> + ln(n) / eta

    The run satisfies the guarantee when lhs <= rhs + CERTIFICATE_TOL.
    """
    xs, gains = history.xs, history.gains
    n = xs.shape[1]
    expected = float(np.einsum("ti,ti->", xs, gains))
    lhs = float(gains.sum(axis=0).max()) - expected
    rhs = history.eta * float(np.einsum("ti,ti->", xs, gains * gains))
    rhs += math.log(n) / history.eta
    return lhs, rhs


def calibrate_eta_full_info(eps: float, delta: float, k: int, horizon: int) -> float:
    """Learning rate giving (eps, delta)-differential privacy with full feedback:

        eta = eps / (k * sqrt(32 * T * ln(k / delta)))

    for k experts each updated on all T rounds with per-round gains in [0, 1].
    """
    _check_privacy_args(eps, delta, k, horizon, op="calibrate_eta_full_info")
    return eps / (k * math.sqrt(32.0 * horizon * math.log(k / delta)))


def calibrate_eta_bandit(eps: float, delta: float, k: int, horizon: int,
                         gamma: float) -> float:
    """Learning rate for the bandit learner whose experts see at most 2*gamma*T
    effective update rounds (the high-probability exploration budget):

        eta = eps / (k * sqrt(32 * (2 * gamma * T) * ln(k / delta)))
    """
    _check_privacy_args(eps, delta, k, horizon, op="calibrate_eta_bandit")
    gamma = float(gamma)
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    return eps / (k * math.sqrt(32.0 * (2.0 * gamma * horizon) * math.log(k / delta)))


def _check_privacy_args(eps: float, delta: float, k: int, horizon: int,
                        op: str = "calibration") -> None:
    if not eps > 0.0:
        raise ValueError(f"{op}: eps must be > 0, got {eps}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"{op}: delta must lie in (0, 1), got {delta}")
    if k < 1:
        raise ValueError(f"{op}: k must be >= 1, got {k}")
    if horizon < 1:
        raise ValueError(f"{op}: horizon must be >= 1, got {horizon}")
    if k / delta <= 1.0:
        raise ValueError(
            f"{op} requires k/delta > 1 for a positive learning rate, "
            f"got k={k}, delta={delta}")
