"""Full-information private online submodular maximization.

A cascade of k Hedge experts, one per cardinality slot.  Each round every
expert samples an item; the learner plays the union; expert i receives the
full marginal-gain vector of f_t on top of the realized choices of experts
1..i-1.  With the learning rate from `calibrate_eta_full_info` the entire
interaction is (eps, delta)-differentially private with respect to changing
one round's function.

A non-private mode is available by overriding eta directly; such runs are
labeled eps="inf" in the trace parameters.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from sklearn.base import BaseEstimator

from .functions import (
    CappedModularFunction,
    GroundSet,
    SetFunction,
    marginals_at_indices,
    value_at_indices,
)
from .hedge import ExpertState, HedgeHistory, calibrate_eta_full_info, hedge_init
from .streams import FunctionStream
from .trace import RunRngs, Trace, spawn_run_rngs

ExpertFactory = Callable[[int, float], ExpertState]


class CascadeState:
    """The k ordered experts of one full-information run, plus its RNG streams."""

    def __init__(self, ground: GroundSet, k: int, eta: float,
                 rngs: RunRngs | None = None, seed: int = 0,
                 expert_factory: ExpertFactory = hedge_init):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        self.ground = ground
        self.k = k
        self.eta = float(eta)
        self.rngs = rngs if rngs is not None else spawn_run_rngs(seed, k)
        self.experts = [expert_factory(ground.n, eta) for _ in range(k)]
        self.t = 0


def _sample_choices(state: CascadeState) -> np.ndarray:
    return np.array(
        [exp.sample(rng) for exp, rng in zip(state.experts, state.rngs.experts)],
        dtype=np.intp)


def prefix_gains(family: str, vec: np.ndarray, cap: float | None,
                 choice_row: np.ndarray) -> list[np.ndarray]:
    """Feedback vectors for one round: entry i is the marginal-gain vector of
    f on top of the union of choices 0..i-1.

    This is the single source of truth for full-information feedback; trace
    replay uses it too, so replayed gains match recorded ones bit for bit.
    """
    gains = []
    prefix: list[int] = []
    for i in range(choice_row.shape[0]):
        gains.append(marginals_at_indices(family, vec, cap,
                                          np.array(prefix, dtype=np.intp)))
        c = int(choice_row[i])
        if c not in prefix:
            prefix.append(c)
    return gains


def fi_round(state: CascadeState, f_t: SetFunction):
    """Advance the cascade one round against f_t.

    Returns (played_set, record) where played_set is a sorted tuple of ground
    indices and record carries the raw choices, payoff, and per-expert gains.
    The state is updated in place.
    """
    vec = f_t.param_vector(state.ground)
    cap = f_t.cap if isinstance(f_t, CappedModularFunction) else None
    choices = _sample_choices(state)
    gains = prefix_gains(f_t.family, vec, cap, choices)
    for exp, g in zip(state.experts, gains):
        exp.update(g)
    played = np.unique(choices)
    payoff = value_at_indices(f_t.family, vec, cap, played)
    state.t += 1
    record = {"choices": choices, "payoff": payoff, "gains": gains}
    return tuple(played.tolist()), record


def run_full_info(stream: FunctionStream, k: int, eps: float = 1.0,
                  delta: float = 1e-3, seed: int = 0, eta: float | None = None,
                  record_feedback: bool = False,
                  expert_factory: ExpertFactory = hedge_init) -> Trace:
    """Run the full-information learner over a stream.

    eta=None calibrates the private learning rate from (eps, delta, k, T);
    passing eta explicitly selects the non-private mode and ignores eps/delta.
    Deterministic given (stream, parameters, seed).
    """
    if stream.family is None:
        raise ValueError("mixed-family streams are not supported by the learners")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    T, n = stream.horizon, stream.ground.n
    if eta is None:
        eta = calibrate_eta_full_info(eps, delta, k, T)
        eps_label: float | str = eps
    else:
        eta = float(eta)
        if not (eta > 0.0 and math.isfinite(eta)):
            raise ValueError(f"eta override must be positive and finite, got {eta}")
        eps_label = "inf"

    rngs = spawn_run_rngs(seed, k)
    state = CascadeState(stream.ground, k, eta, rngs=rngs,
                         expert_factory=expert_factory)
    matrix = stream.matrix
    caps = stream.caps
    family = stream.family

    choices = np.empty((T, k), dtype=np.intp)
    payoffs = np.empty(T, dtype=np.float64)
    gains_rec = np.empty((T, k, n), dtype=np.float64) if record_feedback else None

    experts = state.experts
    expert_rngs = state.rngs.experts
    for t in range(T):
        vec = matrix[t]
        cap = float(caps[t]) if caps is not None else None
        row = np.array([exp.sample(rng) for exp, rng in zip(experts, expert_rngs)],
                       dtype=np.intp)
        gains = prefix_gains(family, vec, cap, row)
        for exp, g in zip(experts, gains):
            exp.update(g)
        choices[t] = row
        payoffs[t] = value_at_indices(family, vec, cap, np.unique(row))
        if record_feedback:
            gains_rec[t] = gains
    state.t = T

    params = {"algo": "full_info", "k": k, "eps": eps_label, "delta": delta,
              "eta": eta, "gamma": None, "seed": seed, "horizon": T}
    return Trace(ground=stream.ground, k=k, algo="full_info", params=params,
                 choices=choices, payoffs=payoffs,
                 explore=np.zeros(T, dtype=bool),
                 explore_expert=np.full(T, -1, dtype=np.intp),
                 explore_item=np.full(T, -1, dtype=np.intp),
                 gains=gains_rec)


def replay_gains(trace: Trace, stream: FunctionStream) -> np.ndarray:
    """Reconstruct the (T, k, n) feedback tensor of a full-information trace.

    The cascade's feedback is a deterministic function of the realized choices
    and the stream, so no recording is needed; when the trace does carry
    recorded gains the replay equals them exactly.
    """
    if trace.algo != "full_info":
        raise ValueError(f"expected a full_info trace, got {trace.algo!r}")
    if trace.ground != stream.ground:
        raise ValueError("trace and stream ground sets differ")
    if trace.horizon != stream.horizon:
        raise ValueError("trace and stream horizons differ")
    T, k, n = trace.horizon, trace.k, stream.ground.n
    matrix, caps, family = stream.matrix, stream.caps, stream.family
    out = np.empty((T, k, n), dtype=np.float64)
    for t in range(T):
        cap = float(caps[t]) if caps is not None else None
        out[t] = prefix_gains(family, matrix[t], cap, trace.choices[t])
    return out


def expert_history(trace: Trace, stream: FunctionStream, expert: int,
                   gains: np.ndarray | None = None) -> HedgeHistory:
    """Rebuild one expert's HedgeHistory (distributions included) from a trace.

    Distributions are replayed from the cumulative gains exactly as the live
    expert computed them, so certificate checks on the result are exact.
    """
    if gains is None:
        gains = trace.gains if trace.gains is not None else replay_gains(trace, stream)
    g = gains[:, expert, :]
    eta = float(trace.params["eta"])
    log_w = np.vstack([np.zeros(g.shape[1]), np.cumsum(eta * g, axis=0)[:-1]])
    shifted = log_w - log_w.max(axis=1, keepdims=True)
    xs = np.exp(shifted)
    xs /= xs.sum(axis=1, keepdims=True)
    return HedgeHistory(eta=eta, xs=xs, gains=g.copy(),
                        choices=trace.choices[:, expert].copy())


class FullInfoMaximizer(BaseEstimator):
    """Private full-information online submodular maximizer (scikit-learn style).

    Parameters mirror `run_full_info`; `fit` consumes a FunctionStream and
    exposes the realized run as fitted attributes.

    Attributes after fit: ``trace_`` (the realized Trace), ``eta_`` (effective
    learning rate), ``ground_``.
    """

    def __init__(self, k: int = 1, eps: float = 1.0, delta: float = 1e-3,
                 eta: float | None = None, seed: int = 0,
                 record_feedback: bool = False):
        self.k = k
        self.eps = eps
        self.delta = delta
        self.eta = eta
        self.seed = seed
        self.record_feedback = record_feedback

    def fit(self, stream: FunctionStream, y=None) -> "FullInfoMaximizer":
        if not isinstance(stream, FunctionStream):
            raise ValueError("fit expects a FunctionStream")
        self.trace_ = run_full_info(
            stream, k=self.k, eps=self.eps, delta=self.delta, seed=self.seed,
            eta=self.eta, record_feedback=self.record_feedback)
        self.eta_ = float(self.trace_.params["eta"])
        self.ground_ = stream.ground
        return self
