"""Run artifacts shared by the online learners: Trace container, JSONL IO,
and the RNG stream discipline.

A Trace stores, per round, the experts' held choices, the realized payoff,
and the exploration metadata (flag, picked expert, picked item).  The played
set is derived: on ordinary rounds it is the union of the held choices; on
explore rounds it is the union of the picked expert's prefix plus the probed
item.  Storage is columnar (numpy arrays) so long horizons stay cheap.

Serialized form is JSON lines: a single meta object first, then one object
per round: {"t", "set", "payoff", "explore", "choices"} with 1-based round
and expert indices, items by name.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .functions import GroundSet
from .streams import canonical_dumps


@dataclass
class RunRngs:
    """The independent random streams used by one learner run.

    One master seed spawns four children: the explore-coin stream, the
    expert-index stream, the item stream, and one sampling stream per expert.
    Variants that skip some streams still spawn all of them, so runs sharing
    a seed see common random numbers on the streams they do share.
    """

    coin: np.random.Generator
    expert_pick: np.random.Generator
    item: np.random.Generator
    experts: list[np.random.Generator]


def spawn_run_rngs(seed: int, k: int) -> RunRngs:
    root = np.random.SeedSequence(seed)
    coin_ss, pick_ss, item_ss, experts_ss = root.spawn(4)
    return RunRngs(
        coin=np.random.default_rng(coin_ss),
        expert_pick=np.random.default_rng(pick_ss),
        item=np.random.default_rng(item_ss),
        experts=[np.random.default_rng(s) for s in experts_ss.spawn(k)],
    )


@dataclass(eq=False)
class Trace:
    """Realized run of an online learner over a function stream."""

    ground: GroundSet
    k: int
    algo: str
    params: dict
    choices: np.ndarray         # (T, k) held expert choices, ground indices
    payoffs: np.ndarray         # (T,) realized payoff of the played set
    explore: np.ndarray         # (T,) bool
    explore_expert: np.ndarray  # (T,) picked expert, -1 on non-explore rounds
    explore_item: np.ndarray    # (T,) picked item, -1 on non-explore rounds
    gains: np.ndarray | None = field(default=None, repr=False)  # (T, k, n)

    def __post_init__(self) -> None:
        T = self.payoffs.shape[0]
        if self.choices.shape != (T, self.k):
            raise ValueError(
                f"choices shape {self.choices.shape} != ({T}, {self.k})")
        for name in ("explore", "explore_expert", "explore_item"):
            arr = getattr(self, name)
            if arr.shape != (T,):
                raise ValueError(f"{name} shape {arr.shape} != ({T},)")

    @property
    def horizon(self) -> int:
        return self.payoffs.shape[0]

    @property
    def explore_count(self) -> int:
        return int(self.explore.sum())

    def played_set(self, t: int) -> tuple[int, ...]:
        """Ground indices of the set played at round t (0-based), sorted."""
        if self.explore[t]:
            i = int(self.explore_expert[t])
            members = np.append(self.choices[t, :i], self.explore_item[t])
        else:
            members = self.choices[t]
        return tuple(np.unique(members).tolist())

    def played_sets(self) -> Iterator[tuple[int, ...]]:
        for t in range(self.horizon):
            yield self.played_set(t)

    def held_set(self, t: int) -> tuple[int, ...]:
        """The set the learner would have played without exploration."""
        return tuple(np.unique(self.choices[t]).tolist())

    def equals(self, other: "Trace") -> bool:
        if not isinstance(other, Trace):
            return False
        same_gains = (
            (self.gains is None and other.gains is None)
            or (self.gains is not None and other.gains is not None
                and np.array_equal(self.gains, other.gains)))
        return (self.ground == other.ground
                and self.k == other.k
                and self.algo == other.algo
                and self.params == other.params
                and np.array_equal(self.choices, other.choices)
                and np.array_equal(self.payoffs, other.payoffs)
                and np.array_equal(self.explore, other.explore)
                and np.array_equal(self.explore_expert, other.explore_expert)
                and np.array_equal(self.explore_item, other.explore_item)
                and same_gains)

    # -- JSON lines -------------------------------------------------------

    def to_jsonl(self, path) -> None:
        items = self.ground.items
        with open(path, "w", encoding="utf-8") as fh:
            meta = {"meta": {"algo": self.algo, "ground": list(items),
                             "k": self.k, "params": self.params}}
            fh.write(canonical_dumps(meta))
            fh.write("\n")
            for t in range(self.horizon):
                rec = {
                    "t": t + 1,
                    "set": [items[i] for i in self.played_set(t)],
                    "payoff": float(self.payoffs[t]),
                    "explore": bool(self.explore[t]),
                    "choices": [items[i] for i in self.choices[t]],
                }
                if self.explore[t]:
                    rec["explore_expert"] = int(self.explore_expert[t]) + 1
                    rec["explore_item"] = items[int(self.explore_item[t])]
                fh.write(canonical_dumps(rec))
                fh.write("\n")

    @staticmethod
    def from_jsonl(path) -> "Trace":
        with open(path, "r", encoding="utf-8") as fh:
            header = json.loads(fh.readline())
            if "meta" not in header:
                raise ValueError("trace file must start with a meta line")
            meta = header["meta"]
            ground = GroundSet(tuple(meta["ground"]))
            k = int(meta["k"])
            rows = [json.loads(line) for line in fh if line.strip()]
        T = len(rows)
        choices = np.empty((T, k), dtype=np.intp)
        payoffs = np.empty(T, dtype=np.float64)
        explore = np.zeros(T, dtype=bool)
        explore_expert = np.full(T, -1, dtype=np.intp)
        explore_item = np.full(T, -1, dtype=np.intp)
        for row in rows:
            t = int(row["t"]) - 1
            if not 0 <= t < T:
                raise ValueError(f"round index {t + 1} outside 1..{T}")
            choices[t] = [ground.index(a) for a in row["choices"]]
            payoffs[t] = float(row["payoff"])
            explore[t] = bool(row["explore"])
            if explore[t]:
                explore_expert[t] = int(row["explore_expert"]) - 1
                explore_item[t] = ground.index(row["explore_item"])
        return Trace(ground=ground, k=k, algo=meta["algo"],
                     params=dict(meta["params"]), choices=choices,
                     payoffs=payoffs, explore=explore,
                     explore_expert=explore_expert, explore_item=explore_item)
