"""Online monotone DR-submodular maximization over box domains.

K parallel online linear optimizers drive a Frank-Wolfe-style cascade: each
round every optimizer proposes a point, the learner plays the average, and
optimizer k receives the linear objective whose gradient is evaluated at the
partial average of proposals 1..k-1 (the origin for k=1).  Boxes must contain
the origin so the partial averages stay feasible.

Two linear optimizers are provided behind one interface: plain
follow-the-leader (argmax of the cumulative gradient over the box, closed
form per coordinate), and a differentially private variant that perturbs the
cumulative gradient through binary-tree aggregation with per-node Gaussian
noise.  The private variant provides (eps', delta')-DP per optimizer via the
Gaussian mechanism: a single round's gradient touches at most
ceil(log2 T) + 1 tree nodes, so the released node vector has L2 sensitivity
G * sqrt(levels) and per-node noise sigma = G * sqrt(levels) *
sqrt(2 ln(1.25/delta')) / eps' suffices.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .streams import FunctionStream, canonical_dumps

GRAD_PAIR_TOL = 1e-9      # slack for the coordinatewise DR comparison
FD_STEP = 1e-6            # central-difference step in check_dr
FD_REL_TOL = 1e-5         # |fd - grad| <= tol * max(1, |grad|)


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box: the product of closed intervals [lo_j, hi_j]."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self) -> None:
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) == 0 or len(lo) != len(hi):
            raise ValueError("lo and hi must be nonempty and equally long")
        if not all(math.isfinite(a) and math.isfinite(b) for a, b in zip(lo, hi)):
            raise ValueError("box bounds must be finite")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError("need lo <= hi coordinatewise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        lo_vec = np.array(lo)
        hi_vec = np.array(hi)
        lo_vec.setflags(write=False)
        hi_vec.setflags(write=False)
        object.__setattr__(self, "lo_vec", lo_vec)
        object.__setattr__(self, "hi_vec", hi_vec)

    @staticmethod
    def unit(n: int) -> "BoxDomain":
        return BoxDomain(lo=(0.0,) * n, hi=(1.0,) * n)

    @property
    def n(self) -> int:
        return len(self.lo)

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=np.float64)
        return (x.shape == (self.n,)
                and bool(np.all(x >= self.lo_vec - tol))
                and bool(np.all(x <= self.hi_vec + tol)))

    @property
    def contains_origin(self) -> bool:
        return self.contains(np.zeros(self.n))

    def argmax_linear(self, c: np.ndarray) -> np.ndarray:
        """Maximizer of <c, x> over the box: hi where c > 0, lo otherwise
        (zero coefficients break toward lo, deterministically)."""
        c = np.asarray(c, dtype=np.float64)
        if c.shape != (self.n,):
            raise ValueError(f"coefficient shape {c.shape} != ({self.n},)")
        return np.where(c > 0.0, self.hi_vec, self.lo_vec)

    def sup_norm2(self) -> float:
        """sup of the Euclidean norm over the box."""
        return float(np.linalg.norm(np.maximum(np.abs(self.lo_vec),
                                               np.abs(self.hi_vec))))

    def sample(self, rng: np.random.Generator, margin: float = 0.0) -> np.ndarray:
        lo = self.lo_vec + margin
        hi = self.hi_vec - margin
        return lo + rng.random(self.n) * np.maximum(hi - lo, 0.0)


class MultilinearCoverage:
    """Multilinear extension of probabilistic coverage:
    F(x) = 1 - prod_a (1 - p_a x_a) on a box within [0, 1]^n."""

    family = "multilinear_coverage"

    def __init__(self, p):
        p = np.asarray(p, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("p must be a nonempty vector")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise ValueError("p entries must lie in [0, 1]")
        self.p = p.copy()
        self.p.setflags(write=False)

    @property
    def n(self) -> int:
        return self.p.shape[0]

    def value(self, x: np.ndarray) -> float:
        return float(1.0 - np.prod(1.0 - self.p * np.asarray(x)))

    def value_batch(self, X: np.ndarray) -> np.ndarray:
        """Values at a batch of points, one row of X per point."""
        X = np.asarray(X, dtype=np.float64)
        return 1.0 - np.prod(1.0 - X * self.p, axis=-1)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """dF/dx_a = p_a * prod_{b != a} (1 - p_b x_b), leave-one-out exact."""
        terms = 1.0 - self.p * np.asarray(x, dtype=np.float64)
        n = self.n
        out = np.empty(n)
        for a in range(n):
            out[a] = self.p[a] * np.prod(np.delete(terms, a))
        return out

    @property
    def beta(self) -> float:
        """Smoothness bound: Hessian entries are within p_a p_b, so
        ||H||_2 <= ||p||^2."""
        return float(self.p @ self.p)

    def gradient_bound(self, domain: BoxDomain) -> float:
        return float(np.linalg.norm(self.p))

    def validate_domain(self, domain: BoxDomain) -> None:
        if domain.n != self.n:
            raise ValueError(f"domain dimension {domain.n} != {self.n}")
        if np.any(domain.lo_vec < 0.0) or np.any(domain.hi_vec > 1.0):
            raise ValueError(
                "multilinear coverage needs a box within [0, 1]^n")


class ConcaveQuadratic:
    """f(x) = scale * (a^T x - x^T H x / 2) with a >= 0 and H symmetric.

    Monotone DR-submodular on a box with lo >= 0 when H is entrywise
    nonnegative and a >= H hi; negative H entries are accepted at
    construction so DR violations can be exercised deliberately.
    """

    family = "concave_quadratic"

    def __init__(self, a, H, scale: float = 1.0):
        a = np.asarray(a, dtype=np.float64)
        H = np.asarray(H, dtype=np.float64)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("a must be a nonempty vector")
        if np.any(a < 0.0):
            raise ValueError("a must be entrywise >= 0")
        if H.shape != (a.size, a.size):
            raise ValueError(f"H shape {H.shape} != ({a.size}, {a.size})")
        if not np.allclose(H, H.T, atol=1e-12):
            raise ValueError("H must be symmetric")
        scale = float(scale)
        if not scale > 0.0:
            raise ValueError(f"scale must be > 0, got {scale}")
        self.a = a.copy()
        self.H = H.copy()
        self.scale = scale
        self.a.setflags(write=False)
        self.H.setflags(write=False)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def value(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        return float(self.scale * (self.a @ x - 0.5 * x @ self.H @ x))

    def value_batch(self, X: np.ndarray) -> np.ndarray:
        """Values at a batch of points, one row of X per point."""
        X = np.asarray(X, dtype=np.float64)
        quad = np.einsum("ij,ij->i", X @ self.H, X)
        return self.scale * (X @ self.a - 0.5 * quad)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.scale * (self.a - self.H @ np.asarray(x, dtype=np.float64))

    @property
    def beta(self) -> float:
        return float(self.scale * np.max(np.abs(np.linalg.eigvalsh(self.H))))

    def gradient_bound(self, domain: BoxDomain) -> float:
        corner = np.maximum(np.abs(domain.lo_vec), np.abs(domain.hi_vec))
        return float(self.scale * (np.linalg.norm(self.a)
                                   + np.linalg.norm(np.abs(self.H) @ corner)))

    def validate_domain(self, domain: BoxDomain) -> None:
        if domain.n != self.n:
            raise ValueError(f"domain dimension {domain.n} != {self.n}")
        if np.any(domain.lo_vec < 0.0):
            raise ValueError("concave quadratic needs lo >= 0")
        # Monotone on the box: the affine gradient must be nonnegative at its
        # per-coordinate minimizing vertex.
        worst = np.where(self.H > 0.0, domain.hi_vec, domain.lo_vec)
        min_grad = self.a - (self.H * worst).sum(axis=1)
        if np.any(min_grad < -1e-9):
            raise ValueError("quadratic is not monotone on this domain")
        if self.value(domain.hi_vec) > 1.0 + 1e-9 or self.value(domain.lo_vec) < -1e-9:
            raise ValueError("quadratic leaves [0, 1] on this domain")

    @staticmethod
    def normalized(a, H, domain: BoxDomain) -> "ConcaveQuadratic":
        """Scale so the box-top value is exactly 1."""
        raw = ConcaveQuadratic(a, H, scale=1.0)
        top = raw.value(domain.hi_vec)
        if top <= 0.0:
            raise ValueError("cannot normalize: nonpositive value at the box top")
        return ConcaveQuadratic(a, H, scale=1.0 / top)


DROracle = MultilinearCoverage | ConcaveQuadratic


def eval_dr(oracle: DROracle, x, domain: BoxDomain | None = None) -> float:
    if domain is not None and not domain.contains(np.asarray(x, dtype=np.float64)):
        raise ValueError("x outside domain")
    return oracle.value(np.asarray(x, dtype=np.float64))


def grad_dr(oracle: DROracle, x, domain: BoxDomain | None = None) -> np.ndarray:
    if domain is not None and not domain.contains(np.asarray(x, dtype=np.float64)):
        raise ValueError("x outside domain")
    return oracle.gradient(np.asarray(x, dtype=np.float64))


def check_dr(oracle: DROracle, domain: BoxDomain, m: int = 100,
             seed: int = 0):
    """Sampled diminishing-returns and gradient-consistency check.

    Draws m comparable pairs x <= y in the box and requires the gradient to
    be coordinatewise antitone up to 1e-9; also compares the gradient to a
    central finite difference (h = 1e-6) at the sampled points, requiring
    |fd - grad| <= 1e-5 * max(1, |grad|).  Returns (ok, witness).
    """
    if m < 1:
        raise ValueError(f"need m >= 1 sample pairs, got {m}")
    rng = np.random.default_rng(seed)
    margin = 2.0 * FD_STEP
    for _ in range(m):
        x = domain.sample(rng, margin=margin)
        y = x + rng.random(domain.n) * (domain.hi_vec - margin - x)
        gx = oracle.gradient(x)
        gy = oracle.gradient(y)
        bad = np.flatnonzero(gx < gy - GRAD_PAIR_TOL)
        if bad.size:
            a = int(bad[0])
            return False, {"kind": "dr_violation", "x": x, "y": y,
                           "coordinate": a, "grad_x": float(gx[a]),
                           "grad_y": float(gy[a])}
        for point, grad in ((x, gx), (y, gy)):
            fd = _central_difference(oracle, point)
            err = np.abs(fd - grad) / np.maximum(1.0, np.abs(grad))
            if np.any(err > FD_REL_TOL):
                a = int(np.argmax(err))
                return False, {"kind": "gradient_mismatch", "x": point,
                               "coordinate": a, "grad": float(grad[a]),
                               "fd": float(fd[a]), "rel_err": float(err[a])}
    return True, None


def _central_difference(oracle: DROracle, x: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    out = np.empty(n)
    for a in range(n):
        step = np.zeros(n)
        step[a] = FD_STEP
        out[a] = (oracle.value(x + step) - oracle.value(x - step)) / (2.0 * FD_STEP)
    return out


def calibrate_K(horizon: int) -> int:
    """Number of inner linear optimizers: K = sqrt(sqrt(T) / ln(T)^2.5),
    rounded half-up, floored at 1 (with a warning when the raw value is
    below 1).  Natural log; an explicit K override bypasses this entirely.
    """
    if horizon < 2:
        raise ValueError(f"calibrate_K requires T >= 2, got {horizon}")
    raw = math.sqrt(math.sqrt(horizon) / math.log(horizon) ** 2.5)
    K = math.floor(raw + 0.5)
    if raw < 1.0:
        warnings.warn(
            f"K formula gives {raw:.4g} < 1 at T={horizon}; using K=1",
            stacklevel=2)
    return max(1, K)


class FollowTheLeader:
    """Non-private online linear optimizer over a box: plays the closed-form
    argmax of the cumulative gradient."""

    def __init__(self, domain: BoxDomain):
        self.domain = domain
        self._total = np.zeros(domain.n)

    def propose(self) -> np.ndarray:
        return self.domain.argmax_linear(self._total)

    def update(self, grad: np.ndarray) -> None:
        self._total = self._total + np.asarray(grad, dtype=np.float64)


class _TreeAggregator:
    """Binary-counter tree aggregation of a vector stream.

    Every node holds the true sum of its span plus fresh Gaussian noise; the
    running prefix sum combines the O(log t) nodes of t's binary
    representation.  Each datum contributes to at most `levels` node sums.
    """

    def __init__(self, dim: int, sigma: float, rng: np.random.Generator):
        self.dim = dim
        self.sigma = sigma
        self.rng = rng
        self._stack: list[tuple[int, np.ndarray, np.ndarray]] = []  # (level, true, noisy)

    def _noisy(self, true: np.ndarray) -> np.ndarray:
        return true + self.rng.normal(0.0, self.sigma, self.dim)

    def add(self, v: np.ndarray) -> None:
        level, true = 0, np.asarray(v, dtype=np.float64)
        noisy = self._noisy(true)
        while self._stack and self._stack[-1][0] == level:
            _, prev_true, _ = self._stack.pop()
            true = prev_true + true
            noisy = self._noisy(true)
            level += 1
        self._stack.append((level, true, noisy))

    def prefix(self) -> np.ndarray:
        out = np.zeros(self.dim)
        for _, _, noisy in self._stack:
            out += noisy
        return out


class PrivateFollowTheLeader:
    """Follow-the-leader on a tree-aggregated, Gaussian-noised gradient prefix.

    Provides (eps, delta)-differential privacy for the gradient stream, each
    gradient bounded in L2 norm by grad_bound: with levels = ceil(log2 T) + 1
    node sums per datum, per-node noise
    sigma = grad_bound * sqrt(levels) * sqrt(2 ln(1.25 / delta)) / eps.
    """

    def __init__(self, domain: BoxDomain, eps: float, delta: float,
                 horizon: int, grad_bound: float, rng: np.random.Generator):
        if not eps > 0.0:
            raise ValueError(f"eps must be > 0, got {eps}")
        if not 0.0 < delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {delta}")
        if horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {horizon}")
        if not grad_bound > 0.0:
            raise ValueError(f"grad_bound must be > 0, got {grad_bound}")
        self.domain = domain
        self.grad_bound = float(grad_bound)
        self.levels = math.ceil(math.log2(horizon)) + 1 if horizon > 1 else 1
        self.sigma = (self.grad_bound * math.sqrt(self.levels)
                      * math.sqrt(2.0 * math.log(1.25 / delta)) / eps)
        self._tree = _TreeAggregator(domain.n, self.sigma, rng)

    def propose(self) -> np.ndarray:
        return self.domain.argmax_linear(self._tree.prefix())

    def update(self, grad: np.ndarray) -> None:
        grad = np.asarray(grad, dtype=np.float64)
        norm = float(np.linalg.norm(grad))
        if norm > self.grad_bound * (1.0 + 1e-9):
            raise ValueError(
                f"gradient norm {norm:.6g} exceeds the declared bound "
                f"{self.grad_bound:.6g}; privacy calibration would be invalid")
        self._tree.add(grad)


class DRState:
    """The K optimizers of one continuous run."""

    def __init__(self, domain: BoxDomain, optimizers: list, horizon: int):
        if not domain.contains_origin:
            raise ValueError(
                "domain must contain the origin (partial averages start at 0)")
        self.domain = domain
        self.optimizers = optimizers
        self.K = len(optimizers)
        self.horizon = horizon
        self.t = 0


def dr_round(state: DRState, f_t: DROracle):
    """Advance the cascade one round; returns (x_t, round record).

    Proposals outside the domain violate the optimizer contract and raise.
    """
    if state.t >= state.horizon:
        raise ValueError(f"horizon {state.horizon} exhausted")
    K = state.K
    vs = np.empty((K, state.domain.n))
    for j, opt in enumerate(state.optimizers):
        v = np.asarray(opt.propose(), dtype=np.float64)
        if not state.domain.contains(v):
            raise ValueError(
                f"optimizer {j} proposed an infeasible point {v!r}")
        vs[j] = v
    # partials[j] = (1/K) * sum of proposals 0..j-1; partials[0] = origin.
    partials = np.vstack([np.zeros(state.domain.n), np.cumsum(vs, axis=0) / K])
    x_t = partials[K]
    grads = np.empty((K, state.domain.n))
    for j, opt in enumerate(state.optimizers):
        grads[j] = f_t.gradient(partials[j])
        opt.update(grads[j])
    state.t += 1
    return x_t, {"proposals": vs, "grads": grads, "value": f_t.value(x_t)}


@dataclass(eq=False)
class DRTrace:
    """Realized continuous run: played points and values, plus (optionally)
    the per-optimizer proposals and linear objectives for decomposition
    checks."""

    params: dict
    xs: np.ndarray                      # (T, n)
    values: np.ndarray                  # (T,)
    proposals: np.ndarray | None = field(default=None, repr=False)  # (T, K, n)
    grads: np.ndarray | None = field(default=None, repr=False)      # (T, K, n)

    @property
    def horizon(self) -> int:
        return self.values.shape[0]

    def to_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(canonical_dumps({"meta": self.params}))
            fh.write("\n")
            for t in range(self.horizon):
                fh.write(canonical_dumps({
                    "t": t + 1,
                    "x": [float(v) for v in self.xs[t]],
                    "value": float(self.values[t]),
                }))
                fh.write("\n")


def run_dr(oracles: Sequence[DROracle], domain: BoxDomain, eps: float = 1.0,
           K: int | None = None, optimizer: str = "private_ftl", seed: int = 0,
           noise_delta: float = 1e-6, record_internals: bool = False) -> DRTrace:
    """Run the continuous cascade; deterministic given (oracles, params, seed).

    Each of the K linear optimizers gets privacy budget eps/K ("private_ftl")
    or no noise at all ("ftl").
    """
    T = len(oracles)
    if T < 1:
        raise ValueError("need at least one round")
    for f in oracles:
        f.validate_domain(domain)
    if K is None:
        K = calibrate_K(T)
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    eps_per = eps / K

    seeds = np.random.SeedSequence(seed).spawn(K)
    if optimizer == "ftl":
        opts: list = [FollowTheLeader(domain) for _ in range(K)]
    elif optimizer == "private_ftl":
        bound = max(f.gradient_bound(domain) for f in oracles)
        opts = [
            PrivateFollowTheLeader(domain, eps=eps_per, delta=noise_delta,
                                   horizon=T, grad_bound=bound,
                                   rng=np.random.default_rng(s))
            for s in seeds
        ]
    else:
        raise ValueError(
            f"optimizer must be 'ftl' or 'private_ftl', got {optimizer!r}")

    state = DRState(domain, opts, T)
    n = domain.n
    xs = np.empty((T, n))
    values = np.empty(T)
    proposals = np.empty((T, K, n)) if record_internals else None
    grads = np.empty((T, K, n)) if record_internals else None
    for t in range(T):
        x_t, rec = dr_round(state, oracles[t])
        xs[t] = x_t
        values[t] = rec["value"]
        if record_internals:
            proposals[t] = rec["proposals"]
            grads[t] = rec["grads"]

    params = {"algo": "continuous", "K": K, "eps": eps, "eps_per_optimizer": eps_per,
              "optimizer": optimizer, "noise_delta": noise_delta, "seed": seed,
              "horizon": T}
    return DRTrace(params=params, xs=xs, values=values,
                   proposals=proposals, grads=grads)


def dr_stream_from_coverage(stream: FunctionStream) -> list[MultilinearCoverage]:
    """Lift a coverage set-function stream to its multilinear extensions."""
    if stream.family != "coverage":
        raise ValueError(
            f"continuous runs need a coverage stream, got {stream.family!r}")
    return [MultilinearCoverage(p=row) for row in stream.matrix]


def grid_max(oracles: Sequence[DROracle], domain: BoxDomain,
             points_per_dim: int = 21) -> tuple[np.ndarray, float]:
    """Maximum of sum_t f_t over a uniform grid (n <= 3: exhaustive scan)."""
    if domain.n > 3:
        raise ValueError(f"grid search supports n <= 3, got n={domain.n}")
    if points_per_dim < 2:
        raise ValueError("need at least 2 points per dimension")
    axes = [np.linspace(lo, hi, points_per_dim)
            for lo, hi in zip(domain.lo, domain.hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, domain.n)
    totals = np.zeros(grid.shape[0])
    for f in oracles:
        batch = getattr(f, "value_batch", None)
        if batch is not None:
            totals += batch(grid)
        else:
            totals += np.fromiter((f.value(x) for x in grid),
                                  dtype=np.float64, count=grid.shape[0])
    best = int(np.argmax(totals))
    return grid[best].copy(), float(totals[best])


def decomposition_check(trace: DRTrace, oracles: Sequence[DROracle],
                        domain: BoxDomain, points_per_dim: int = 21,
                        tol: float = 1e-6) -> dict:
    """Verify the per-realization regret decomposition of a continuous run:

        (1 - 1/e) * max_x sum_t f_t(x) - sum_t f_t(x_t)
            <= (1/K) * sum_k r_k + beta * R^2 * T / (2K) + tol

    with r_k the realized regret of linear optimizer k, beta the largest
    per-round smoothness bound, and R = sup ||x||_2 over the domain.  The max
    is grid-resolved (n <= 3), which under-estimates the true maximum, so the
    inequality as tested is implied by the exact statement.
    """
    if trace.proposals is None or trace.grads is None:
        raise ValueError("decomposition_check needs a trace recorded with "
                         "record_internals=True")
    T, K, _ = trace.proposals.shape
    if len(oracles) != T:
        raise ValueError("oracle count does not match the trace horizon")
    _, opt_val = grid_max(oracles, domain, points_per_dim)
    linear_regrets = np.empty(K)
    for j in range(K):
        total_grad = trace.grads[:, j, :].sum(axis=0)
        best = float(total_grad @ domain.argmax_linear(total_grad))
        realized = float(np.einsum("ti,ti->", trace.grads[:, j, :],
                                   trace.proposals[:, j, :]))
        linear_regrets[j] = best - realized
    beta = max(f.beta for f in oracles)
    R = domain.sup_norm2()
    lhs = (1.0 - math.exp(-1.0)) * opt_val - float(trace.values.sum())
    rhs = float(linear_regrets.sum()) / K + beta * R * R * T / (2.0 * K)
    return {"lhs": lhs, "rhs": rhs, "grid_opt": opt_val,
            "linear_regrets": linear_regrets, "beta": beta, "radius": R,
            "slack": rhs + tol - lhs, "holds": bool(lhs <= rhs + tol)}


class DRMaximizer(BaseEstimator):
    """Continuous DR-submodular online maximizer (scikit-learn style).

    ``domain`` is part of the model configuration; ``fit`` consumes a
    sequence of DR oracles.  Attributes after fit: ``trace_``, ``K_``,
    ``eps_per_optimizer_``.
    """

    def __init__(self, domain: BoxDomain | None = None, K: int | None = None,
                 eps: float = 1.0, optimizer: str = "private_ftl",
                 noise_delta: float = 1e-6, seed: int = 0,
                 record_internals: bool = False):
        self.domain = domain
        self.K = K
        self.eps = eps
        self.optimizer = optimizer
        self.noise_delta = noise_delta
        self.seed = seed
        self.record_internals = record_internals

    def fit(self, oracles: Sequence[DROracle], y=None) -> "DRMaximizer":
        if self.domain is None:
            raise ValueError("DRMaximizer needs a domain")
        self.trace_ = run_dr(
            oracles, self.domain, eps=self.eps, K=self.K,
            optimizer=self.optimizer, seed=self.seed,
            noise_delta=self.noise_delta,
            record_internals=self.record_internals)
        self.K_ = int(self.trace_.params["K"])
        self.eps_per_optimizer_ = float(self.trace_.params["eps_per_optimizer"])
        return self
