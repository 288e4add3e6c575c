"""NSGA-II building blocks over the (crashes, coverage, length) objective triple.

Crashes and coverage are maximized, length is minimized.
"""

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Generic, Protocol, TypeVar

import numpy as np
from pymoo.indicators.hv import HV

from .errors import PreconditionError
from .utils import log_warning


@dataclass(frozen=True)
class FitnessTriple:
    crashes: int
    coverage: float
    length: float

    def maximized(self, max_length: float) -> tuple[float, float, float]:
        """Coordinates in the all-maximize space anchored at the nadir."""
        return float(self.crashes), float(self.coverage), float(max_length - self.length)

    def to_json(self) -> list:
        return [self.crashes, self.coverage, self.length]

    @classmethod
    def from_json(cls, data: Sequence) -> 'FitnessTriple':
        crashes, coverage, length = data
        return cls(int(crashes), float(coverage), length)


@dataclass(frozen=True)
class FrontAssignment:
    rank: int
    crowding: float


def dominates(a: FitnessTriple, b: FitnessTriple) -> bool:
    no_worse = a.crashes >= b.crashes and a.coverage >= b.coverage and a.length <= b.length
    better = a.crashes > b.crashes or a.coverage > b.coverage or a.length < b.length
    return no_worse and better


def _as_matrix(fitnesses: Sequence[FitnessTriple]) -> np.ndarray:
    """(n, 3) array, every column to be maximized."""
    return np.array([(f.crashes, f.coverage, -f.length) for f in fitnesses], dtype=float)


def dominance_matrix(fitnesses: Sequence[FitnessTriple]) -> np.ndarray:
    """Boolean (n, n) matrix, entry [i, j] true iff i dominates j."""
    values = _as_matrix(fitnesses)
    no_worse = np.all(values[:, None, :] >= values[None, :, :], axis=2)
    better = np.any(values[:, None, :] > values[None, :, :], axis=2)
    return no_worse & better


def fast_non_dominated_sort(fitnesses: Sequence[FitnessTriple]) -> list[list[int]]:
    if not fitnesses:
        raise PreconditionError('cannot sort an empty population')
    dominated_by = dominance_matrix(fitnesses)
    counts = dominated_by.sum(axis=0)
    fronts = []
    current = np.flatnonzero(counts == 0)
    while current.size:
        fronts.append([int(i) for i in current])
        counts[current] = -1
        counts -= dominated_by[current].sum(axis=0)
        current = np.flatnonzero(counts == 0)
    return fronts


def crowding_distance(front: Sequence[FitnessTriple]) -> list[float]:
    if not front:
        raise PreconditionError('cannot compute crowding of an empty front')
    size = len(front)
    if size <= 2:
        return [float('inf')] * size

    distances = np.zeros(size, dtype=float)
    for column in _as_matrix(front).T:
        order = np.argsort(column, kind='stable')
        ordered = column[order]
        span = ordered[-1] - ordered[0]
        if span == 0:
            continue
        distances[order[0]] = distances[order[-1]] = np.inf
        distances[order[1:-1]] += (ordered[2:] - ordered[:-2]) / span
    return [float(d) for d in distances]


def crowded_sort(assignments: Sequence[FrontAssignment]) -> list[int]:
    """Indices by ascending rank, descending crowding, then original index."""
    return sorted(
        range(len(assignments)), key=lambda i: (assignments[i].rank, -assignments[i].crowding, i)
    )


def nsga2_order(fitnesses: Sequence[FitnessTriple], n: int) -> list[int]:
    """Whole fronts are taken until at least n individuals are gathered, then
    crowded-sorted. The result can be longer than n; callers slice it."""
    gathered: list[int] = []
    assignments: list[FrontAssignment] = []
    for rank, front in enumerate(fast_non_dominated_sort(fitnesses)):
        if len(gathered) >= n:
            break
        crowding = crowding_distance([fitnesses[i] for i in front])
        gathered.extend(front)
        assignments.extend(FrontAssignment(rank, distance) for distance in crowding)
    # fronts come out in ascending index order, so position ties match index ties
    return [gathered[j] for j in crowded_sort(assignments)]


def hypervolume(front: Sequence[FitnessTriple], reference: FitnessTriple) -> float:
    """Exact volume dominated by the front, bounded by the nadir reference.

    Points are moved to the all-maximize space anchored at the reference and
    negated for pymoo, which minimizes against the origin.
    """
    origin = np.array(reference.maximized(reference.length))
    points = []
    worse = 0
    for f in front:
        shifted = np.array(f.maximized(reference.length)) - origin
        if shifted.min() < 0:
            worse += 1
        elif shifted.min() > 0:
            points.append(shifted)
    if worse:
        log_warning(f'hypervolume: dropped {worse} point(s) worse than the reference')
    if not points:
        return 0.0
    indicator = HV(ref_point=np.zeros(3))
    return float(indicator(-np.array(points)))


class HasFitness(Protocol):
    @property
    def fitness(self) -> FitnessTriple: ...


T = TypeVar('T', bound=HasFitness)


class ParetoArchive(Generic[T]):
    """Hall of fame of every non-dominated solution evaluated so far.

    Only the first member per distinct fitness vector is kept.
    """

    def __init__(self):
        self.members: list[T] = []

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def fitnesses(self) -> list[FitnessTriple]:
        return [m.fitness for m in self.members]

    def update(self, candidates: Iterable[T]) -> int:
        """Insert candidates; returns how many entered the archive."""
        added = 0
        for candidate in candidates:
            fit = candidate.fitness
            if any(m.fitness == fit or dominates(m.fitness, fit) for m in self.members):
                continue
            self.members = [m for m in self.members if not dominates(fit, m.fitness)]
            self.members.append(candidate)
            added += 1
        return added
