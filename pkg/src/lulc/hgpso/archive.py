"""External Pareto archive with crowding-distance truncation and tournament selection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

CROWDING_SENTINEL = math.inf


@dataclass(frozen=True)
class ObjectiveVector:
    fitness: float  # maximized
    subset_ratio: float  # minimized

    def __post_init__(self) -> None:
        if not 0.0 <= self.subset_ratio <= 1.0:
            raise ValueError(f"subset_ratio {self.subset_ratio} outside [0, 1]")


def dominates(a: ObjectiveVector, b: ObjectiveVector) -> bool:
    """Pareto dominance: no worse on both objectives, strictly better on one."""
    no_worse = a.fitness >= b.fitness and a.subset_ratio <= b.subset_ratio
    better = a.fitness > b.fitness or a.subset_ratio < b.subset_ratio
    return no_worse and better


def weakly_dominates(a: ObjectiveVector, b: ObjectiveVector) -> bool:
    return a.fitness >= b.fitness and a.subset_ratio <= b.subset_ratio


def crowding_distance(objectives: np.ndarray) -> np.ndarray:
    """NSGA-II crowding distance of the rows of an (M, K) objective array.

    Per objective the extreme members get the infinite sentinel and interior
    members add the normalized gap between their two sorted neighbours.
    """
    obj = np.asarray(objectives, dtype=np.float64)
    if obj.ndim != 2 or obj.shape[0] == 0:
        raise ValueError("crowding distance needs a non-empty (M, K) objective array")
    m = obj.shape[0]
    dist = np.zeros(m)
    if m <= 2:
        dist[:] = CROWDING_SENTINEL
        return dist
    for k in range(obj.shape[1]):
        order = np.argsort(obj[:, k], kind="stable")
        vals = obj[order, k]
        dist[order[0]] = dist[order[-1]] = CROWDING_SENTINEL
        span = vals[-1] - vals[0]
        if span > 0:
            dist[order[1:-1]] += (vals[2:] - vals[:-2]) / span
    return dist


@dataclass
class ArchiveMember:
    position: np.ndarray
    mask: np.ndarray
    objectives: ObjectiveVector


@dataclass
class Archive:
    capacity: int
    members: list[ArchiveMember] = field(default_factory=list)
    crowding: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError("archive capacity must be >= 1")

    def __len__(self) -> int:
        return len(self.members)

    def objective_array(self) -> np.ndarray:
        return np.array([[m.objectives.fitness, m.objectives.subset_ratio] for m in self.members])

    def offer(self, position: np.ndarray, mask: np.ndarray, objectives: ObjectiveVector) -> bool:
        """Insert a candidate unless an existing member weakly dominates it."""
        if any(weakly_dominates(m.objectives, objectives) for m in self.members):
            return False
        self.members = [m for m in self.members if not dominates(objectives, m.objectives)]
        self.members.append(ArchiveMember(position.copy(), mask.copy(), objectives))
        return True

    def update(self, candidates: list[tuple[np.ndarray, np.ndarray, ObjectiveVector]]) -> None:
        for pos, mask, obj in candidates:
            self.offer(pos, mask, obj)
        self._truncate()
        self.refresh_crowding()

    def refresh_crowding(self) -> None:
        self.crowding = crowding_distance(self.objective_array()) if self.members else np.zeros(0)

    def _truncate(self) -> None:
        # drop the most crowded member one at a time; ties lose the lower
        # fitness, then the newer entry, so the fittest member always survives
        while len(self.members) > self.capacity:
            cd = crowding_distance(self.objective_array())
            keys = [
                (cd[i], self.members[i].objectives.fitness, -i) for i in range(len(self.members))
            ]
            del self.members[min(range(len(keys)), key=keys.__getitem__)]

    def best(self) -> ArchiveMember:
        """Highest fitness; ties go to the smaller subset, then the earlier member."""
        if not self.members:
            raise ValueError("archive is empty")
        i = min(
            range(len(self.members)),
            key=lambda i: (-self.members[i].objectives.fitness, self.members[i].objectives.subset_ratio, i),
        )
        return self.members[i]


def select_gbest(archive: Archive, rng: np.random.Generator) -> np.ndarray:
    """Binary tournament on crowding distance; ties go to the lower index."""
    if not archive.members:
        raise ValueError("cannot select a global best from an empty archive")
    if len(archive.crowding) != len(archive.members):
        archive.refresh_crowding()
    n = len(archive.members)
    a, b = int(rng.integers(n)), int(rng.integers(n))
    ca, cb = archive.crowding[a], archive.crowding[b]
    if ca > cb or (ca == cb and a < b):
        winner = a
    else:
        winner = b
    return archive.members[winner].position.copy()
