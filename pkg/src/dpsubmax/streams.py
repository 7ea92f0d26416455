"""Function streams: sequences of per-round set functions over a shared ground set.

A stream is the dataset consumed by the online learners, and the unit that the
privacy guarantees protect: two streams are *neighbors* when they differ in at
most one round.  Streams can be generated from a seeded `StreamSpec` or loaded
from JSON; both forms round-trip byte-stably under the canonical encoding used
here (sorted keys, compact separators).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .functions import (
    CappedModularFunction,
    CoverageFunction,
    GroundSet,
    SetFunction,
    default_ground,
    oracle_from_json,
    oracle_to_json,
)

DISTRIBUTIONS = ("iid_uniform", "planted_favorite", "profile")
FAMILIES = ("coverage", "capped_modular")


def canonical_dumps(obj) -> str:
    """JSON encoding with a canonical byte representation (sorted keys,
    compact separators, floats via repr round-trip)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


@dataclass(frozen=True)
class StreamSpec:
    """Recipe for a seeded synthetic stream.

    Distributions (each draws the per-item parameter independently per round):

      * ``iid_uniform``: parameter ~ U[lo, hi] for every item.
        params: lo (default 0), hi (default 1 for coverage, 0.5 for
        capped_modular), and cap (capped_modular only, default 1).
      * ``planted_favorite``: one item's parameter is pinned to ``p_star``
        every round; the rest are ~ U[0, hi_other].
        params: favorite (item name, default first item), p_star (default
        0.9), hi_other (default 0.3), cap (capped_modular only).
      * ``profile``: item a's parameter is ~ U[0, ceilings[a]], one ceiling
        per ground item.  params: ceilings (list of n floats), cap.
    """

    family: str
    n: int
    horizon: int
    dist: str = "iid_uniform"
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.dist not in DISTRIBUTIONS:
            raise ValueError(f"unknown dist {self.dist!r}; expected one of {DISTRIBUTIONS}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if not isinstance(self.params, dict):
            raise ValueError("params must be a dict")

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "n": self.n,
            "horizon": self.horizon,
            "dist": self.dist,
            "seed": self.seed,
            "params": self.params,
        }

    @staticmethod
    def from_json(obj: dict) -> "StreamSpec":
        known = {"family", "n", "horizon", "dist", "seed", "params"}
        stray = set(obj) - known
        if stray:
            raise ValueError(f"unknown StreamSpec keys: {sorted(stray)}")
        missing = {"family", "n", "horizon"} - set(obj)
        if missing:
            raise ValueError(f"StreamSpec is missing keys: {sorted(missing)}")
        return StreamSpec(
            family=obj["family"],
            n=int(obj["n"]),
            horizon=int(obj["horizon"]),
            dist=obj.get("dist", "iid_uniform"),
            seed=int(obj.get("seed", 0)),
            params=dict(obj.get("params", {})),
        )


@dataclass(frozen=True)
class FunctionStream:
    """An immutable sequence of set functions sharing one ground set.

    ``matrix`` lazily caches the per-round parameter vectors (shape (T, n),
    aligned to ground order) when every round belongs to the same family; the
    online learners use it to evaluate payoffs and marginals without name
    lookups.  It is None for mixed-family streams.
    """

    ground: GroundSet
    rounds: tuple[SetFunction, ...]

    def __post_init__(self) -> None:
        if len(self.rounds) == 0:
            raise ValueError("a stream must contain at least one round")
        families = {fn.family for fn in self.rounds}
        family = families.pop() if len(families) == 1 else None
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "_matrix", None)
        object.__setattr__(self, "_caps", None)
        if family is None:
            # Mixed-family stream: validate binding eagerly, there is no
            # matrix build to catch errors later.
            for fn in self.rounds:
                fn.param_vector(self.ground)

    def _build_matrix(self) -> None:
        matrix = np.stack([fn.param_vector(self.ground) for fn in self.rounds])
        matrix.setflags(write=False)
        object.__setattr__(self, "_matrix", matrix)
        if self.family == "capped_modular":
            caps = np.array([fn.cap for fn in self.rounds], dtype=np.float64)
            caps.setflags(write=False)
            object.__setattr__(self, "_caps", caps)

    @property
    def matrix(self) -> np.ndarray | None:
        if self.family is None:
            return None
        if self._matrix is None:  # type: ignore[attr-defined]
            self._build_matrix()
        return self._matrix  # type: ignore[attr-defined]

    @property
    def caps(self) -> np.ndarray | None:
        if self.family != "capped_modular":
            return None
        if self._caps is None:  # type: ignore[attr-defined]
            self._build_matrix()
        return self._caps  # type: ignore[attr-defined]

    @property
    def horizon(self) -> int:
        return len(self.rounds)

    def __len__(self) -> int:
        return len(self.rounds)

    def __iter__(self) -> Iterator[SetFunction]:
        return iter(self.rounds)

    def __getitem__(self, t: int) -> SetFunction:
        return self.rounds[t]

    def to_json(self) -> dict:
        return {
            "ground": list(self.ground.items),
            "rounds": [oracle_to_json(fn) for fn in self.rounds],
        }

    @staticmethod
    def from_json(obj: dict) -> "FunctionStream":
        stray = set(obj) - {"ground", "rounds"}
        if stray:
            raise ValueError(f"unknown stream keys: {sorted(stray)}")
        if "ground" not in obj or "rounds" not in obj:
            raise ValueError("stream JSON needs 'ground' and 'rounds'")
        ground = GroundSet(tuple(obj["ground"]))
        rounds = tuple(oracle_from_json(r) for r in obj["rounds"])
        return FunctionStream(ground=ground, rounds=rounds)


def _matrix_from_spec(spec: StreamSpec, ground: GroundSet) -> np.ndarray:
    """Draw the (T, n) parameter matrix for a spec, independent per round."""
    rng = np.random.default_rng(spec.seed)
    T, n = spec.horizon, spec.n
    params = spec.params
    hi_default = 1.0 if spec.family == "coverage" else 0.5

    def reject_stray(allowed: set[str]) -> None:
        stray = set(params) - allowed
        if stray:
            raise ValueError(
                f"unknown params for dist {spec.dist!r}: {sorted(stray)}")

    cap_keys = {"cap"} if spec.family == "capped_modular" else set()
    if spec.dist == "iid_uniform":
        reject_stray({"lo", "hi"} | cap_keys)
        lo = float(params.get("lo", 0.0))
        hi = float(params.get("hi", hi_default))
        if not 0.0 <= lo <= hi:
            raise ValueError(f"need 0 <= lo <= hi, got lo={lo}, hi={hi}")
        matrix = rng.uniform(lo, hi, size=(T, n))
    elif spec.dist == "planted_favorite":
        reject_stray({"favorite", "p_star", "hi_other"} | cap_keys)
        favorite = params.get("favorite", ground.items[0])
        fav = ground.index(favorite)
        p_star = float(params.get("p_star", 0.9))
        hi_other = float(params.get("hi_other", 0.3))
        if not 0.0 <= p_star or not 0.0 <= hi_other:
            raise ValueError("p_star and hi_other must be >= 0")
        matrix = rng.uniform(0.0, hi_other, size=(T, n))
        matrix[:, fav] = p_star
    elif spec.dist == "profile":
        reject_stray({"ceilings"} | cap_keys)
        if "ceilings" not in params:
            raise ValueError("dist 'profile' needs params['ceilings']")
        ceilings = np.asarray(params["ceilings"], dtype=np.float64)
        if ceilings.shape != (n,):
            raise ValueError(
                f"ceilings must list one value per item, got shape {ceilings.shape}")
        if np.any(ceilings < 0.0):
            raise ValueError("ceilings must be >= 0")
        matrix = rng.uniform(0.0, 1.0, size=(T, n)) * ceilings
    else:  # pragma: no cover - guarded by StreamSpec validation
        raise ValueError(f"unknown dist {spec.dist!r}")

    limit = 1.0 if spec.family == "coverage" else np.inf
    if np.any(matrix < 0.0) or np.any(matrix > limit):
        raise ValueError(
            f"dist {spec.dist!r} with params {params} leaves the valid "
            f"parameter range for family {spec.family!r}")
    return matrix


def generate_stream(spec: StreamSpec) -> FunctionStream:
    """Generate the deterministic stream described by ``spec``.

    The same spec always yields the identical stream (a fresh seeded
    generator, one (T, n) draw).
    """
    ground = default_ground(spec.n)
    matrix = _matrix_from_spec(spec, ground)
    if spec.family == "coverage":
        rounds = tuple(
            CoverageFunction(p=dict(zip(ground.items, row))) for row in matrix)
    else:
        cap = float(spec.params.get("cap", 1.0))
        rounds = tuple(
            CappedModularFunction(w=dict(zip(ground.items, row)), cap=cap)
            for row in matrix)
    stream = FunctionStream(ground=ground, rounds=rounds)
    # Pre-seed the lazy parameter-matrix cache: the generator already holds
    # the exact per-round vectors, rebuilding them from dicts is pure waste.
    matrix = matrix.astype(np.float64, copy=False)
    matrix.setflags(write=False)
    object.__setattr__(stream, "_matrix", matrix)
    if spec.family == "capped_modular":
        caps = np.full(spec.horizon, float(spec.params.get("cap", 1.0)))
        caps.setflags(write=False)
        object.__setattr__(stream, "_caps", caps)
    return stream


def neighboring_stream(stream: FunctionStream, t: int,
                       replacement: SetFunction) -> FunctionStream:
    """Copy of ``stream`` with round t (1-based) swapped for ``replacement``.

    The result differs from the input in exactly one round, the neighboring
    relation under which the learners' privacy guarantees are stated.
    """
    if not 1 <= t <= len(stream):
        raise ValueError(f"round index t={t} outside 1..{len(stream)}")
    replacement.param_vector(stream.ground)  # validate binding before copying
    rounds = list(stream.rounds)
    rounds[t - 1] = replacement
    return FunctionStream(ground=stream.ground, rounds=tuple(rounds))


def differing_rounds(a: FunctionStream, b: FunctionStream) -> list[int]:
    """1-based rounds where two streams differ (for neighbor verification)."""
    if a.ground != b.ground:
        raise ValueError("streams must share a ground set")
    if len(a) != len(b):
        raise ValueError("streams must share a horizon")
    return [t + 1 for t, (fa, fb) in enumerate(zip(a.rounds, b.rounds)) if fa != fb]


def save_stream(stream: FunctionStream, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_dumps(stream.to_json()))
        fh.write("\n")


def load_stream(path) -> FunctionStream:
    with open(path, "r", encoding="utf-8") as fh:
        return FunctionStream.from_json(json.load(fh))


def save_spec(spec: StreamSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_dumps(spec.to_json()))
        fh.write("\n")


def load_spec(path) -> StreamSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return StreamSpec.from_json(json.load(fh))
