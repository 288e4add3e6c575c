import itertools
import math

import numpy as np
import pytest

from divgen.errors import PreconditionError
from divgen.moea import (
    FitnessTriple,
    FrontAssignment,
    ParetoArchive,
    crowded_sort,
    crowding_distance,
    dominates,
    fast_non_dominated_sort,
    hypervolume,
    nsga2_order,
)

F = FitnessTriple
INF = float('inf')


def random_triples(rng, n):
    # small integer grids make ties and dominance chains frequent
    return [
        F(int(rng.integers(0, 4)), int(rng.integers(0, 5)) / 4, int(rng.integers(5, 12)))
        for _ in range(n)
    ]


def peeling_oracle(fitnesses):
    remaining = list(range(len(fitnesses)))
    fronts = []
    while remaining:
        front = [
            i
            for i in remaining
            if not any(dominates(fitnesses[j], fitnesses[i]) for j in remaining)
        ]
        fronts.append(front)
        remaining = [i for i in remaining if i not in front]
    return fronts


def monte_carlo_hv(front, reference, samples=1_000_000, seed=0):
    rng = np.random.default_rng(seed)
    boxes = np.array([f.maximized(reference.length) for f in front])
    upper = boxes.max(axis=0)
    points = rng.random((samples, 3)) * upper
    covered = np.zeros(samples, dtype=bool)
    for box in boxes:
        covered |= np.all(points <= box, axis=1)
    return covered.mean() * np.prod(upper)


def staircase_area(points):
    area, best_y = 0.0, 0.0
    for x, y in sorted(points, key=lambda p: (-p[0], -p[1])):
        if y > best_y:
            area += x * (y - best_y)
            best_y = y
    return area


def slab_sweep_hv(front, reference):
    """Exact volume by sweeping the length-saving axis slab by slab."""
    points = [f.maximized(reference.length) for f in front]
    points = [p for p in points if min(p) > 0]
    volume = 0.0
    levels = sorted({p[2] for p in points}, reverse=True)
    for upper, lower in zip(levels, [*levels[1:], 0.0], strict=True):
        slab = [(p[0], p[1]) for p in points if p[2] >= upper]
        volume += staircase_area(slab) * (upper - lower)
    return volume


@pytest.mark.parametrize(
    'a, b, expected',
    [
        (F(2, 0.5, 300), F(1, 0.5, 300), True),
        (F(2, 0.5, 300), F(2, 0.5, 300), False),
        (F(2, 0.4, 300), F(1, 0.5, 300), False),
        (F(1, 0.5, 200), F(1, 0.5, 300), True),
        (F(1, 0.5, 300), F(1, 0.5, 200), False),
    ],
)
def test_dominates(a, b, expected):
    assert dominates(a, b) is expected


def test_dominates_irreflexive_and_asymmetric():
    rng = np.random.default_rng(0)
    points = random_triples(rng, 30)
    for a, b in itertools.product(points, repeat=2):
        assert not (dominates(a, b) and dominates(b, a))
        if a == b:
            assert not dominates(a, b)


def test_sort_identical_points():
    assert fast_non_dominated_sort([F(1, 0.5, 10)] * 4) == [[0, 1, 2, 3]]


def test_sort_chain():
    chain = [F(1, 0.5, 30), F(3, 0.9, 10), F(2, 0.7, 20)]
    assert fast_non_dominated_sort(chain) == [[1], [2], [0]]


def test_sort_empty():
    with pytest.raises(PreconditionError):
        fast_non_dominated_sort([])


def test_sort_matches_peeling_oracle():
    rng = np.random.default_rng(1)
    for _ in range(200):
        fitnesses = random_triples(rng, int(rng.integers(1, 51)))
        assert fast_non_dominated_sort(fitnesses) == peeling_oracle(fitnesses)


@pytest.mark.parametrize(
    'front, expected',
    [
        ([F(1, 0.1, 10)], [INF]),
        ([F(1, 0.1, 10), F(2, 0.1, 20)], [INF, INF]),
        ([F(1, 0.1, 10), F(1, 0.1, 10)], [INF, INF]),
    ],
)
def test_crowding_small_fronts(front, expected):
    assert crowding_distance(front) == expected


def test_crowding_collinear_points():
    front = [F(1, c, 10) for c in (0.1, 0.2, 0.4, 0.8)]
    distances = crowding_distance(front)
    assert distances[0] == distances[3] == INF
    assert distances[1] == pytest.approx((0.4 - 0.1) / 0.7)
    assert distances[2] == pytest.approx((0.8 - 0.2) / 0.7)


def test_crowded_sort():
    assert crowded_sort([FrontAssignment(1, 5.0), FrontAssignment(0, 1.0)]) == [1, 0]
    assert crowded_sort([FrontAssignment(0, 1.0), FrontAssignment(0, INF)]) == [1, 0]
    assert crowded_sort([FrontAssignment(0, 2.0)] * 3) == [0, 1, 2]


def test_nsga2_order_takes_whole_fronts():
    fitnesses = [F(3, 0.9, 10), F(1, 0.5, 30), F(2, 0.7, 20), F(0, 0.1, 40)]
    assert nsga2_order(fitnesses, 2) == [0, 2]
    assert nsga2_order(fitnesses, 4) == [0, 2, 1, 3]


def test_nsga2_order_is_crowded_sort_of_gathered_fronts():
    rng = np.random.default_rng(7)
    for _ in range(50):
        fitnesses = random_triples(rng, int(rng.integers(2, 31)))
        n = int(rng.integers(1, len(fitnesses) + 1))
        fronts = fast_non_dominated_sort(fitnesses)
        gathered, keys = [], {}
        for rank, front in enumerate(fronts):
            if len(gathered) >= n:
                break
            crowding = crowding_distance([fitnesses[i] for i in front])
            for i, d in zip(front, crowding, strict=True):
                keys[i] = (rank, -d, i)
            gathered.extend(front)
        assert nsga2_order(fitnesses, n) == sorted(gathered, key=keys.__getitem__)


def test_hypervolume_hand_values():
    ref = F(0, 0.0, 500)
    assert hypervolume([], ref) == 0.0
    assert hypervolume([F(2, 0.5, 300)], ref) == pytest.approx(200.0, abs=1e-12)
    # boxes 2 x 0.5 x 200 and 1 x 1.0 x 200 overlap in 1 x 0.5 x 200
    two = [F(2, 0.5, 300), F(1, 1.0, 300)]
    assert hypervolume(two, ref) == pytest.approx(200 + 200 - 100, abs=1e-12)


def test_hypervolume_two_points_monte_carlo():
    ref = F(0, 0.0, 500)
    front = [F(3, 0.4, 350), F(1, 0.9, 100)]
    exact = hypervolume(front, ref)
    assert exact == pytest.approx(monte_carlo_hv(front, ref), rel=0.01)


def test_hypervolume_random_fronts_monte_carlo():
    rng = np.random.default_rng(2)
    ref = F(0, 0.0, 100)
    for trial in range(5):
        front = [
            F(int(rng.integers(1, 6)), float(rng.uniform(0.05, 1)), float(rng.uniform(5, 95)))
            for _ in range(int(rng.integers(1, 11)))
        ]
        exact = hypervolume(front, ref)
        assert exact == pytest.approx(monte_carlo_hv(front, ref, seed=trial), rel=0.01)


def test_hypervolume_ignores_dominated_points():
    rng = np.random.default_rng(3)
    ref = F(0, 0.0, 20)
    for _ in range(100):
        front = random_triples(rng, 8)
        base = hypervolume(front, ref)
        worse = F(front[0].crashes, front[0].coverage / 2, front[0].length)
        assert hypervolume([*front, worse], ref) == pytest.approx(base, abs=1e-9)
        better = F(front[0].crashes + 1, front[0].coverage, front[0].length)
        assert hypervolume([*front, better], ref) >= base


def test_hypervolume_permutation_invariant():
    rng = np.random.default_rng(4)
    ref = F(0, 0.0, 20)
    front = random_triples(rng, 10)
    shuffled = [front[i] for i in rng.permutation(len(front))]
    assert math.isclose(hypervolume(front, ref), hypervolume(shuffled, ref), abs_tol=1e-9)


def test_hypervolume_matches_slab_sweep():
    rng = np.random.default_rng(6)
    ref = F(0, 0.0, 20)
    for _ in range(200):
        front = random_triples(rng, int(rng.integers(1, 21)))
        assert hypervolume(front, ref) == pytest.approx(slab_sweep_hv(front, ref), abs=1e-9)


def test_hypervolume_drops_points_worse_than_reference():
    ref = F(0, 0.0, 500)
    assert hypervolume([F(1, 0.5, 600)], ref) == 0.0
    assert hypervolume([F(2, 0.5, 300), F(1, 0.5, 600)], ref) == pytest.approx(200.0)
    # zero crashes sit on the reference and add nothing
    assert hypervolume([F(0, 0.9, 100)], ref) == 0.0


class _Entry:
    def __init__(self, fitness):
        self.fitness = fitness


def test_archive_keeps_mutually_non_dominated():
    archive: ParetoArchive = ParetoArchive()
    archive.update([_Entry(F(1, 0.5, 10)), _Entry(F(1, 0.5, 10)), _Entry(F(0, 0.9, 10))])
    assert len(archive) == 2
    archive.update([_Entry(F(2, 0.9, 5))])
    assert archive.fitnesses == [F(2, 0.9, 5)]


def test_archive_hypervolume_never_decreases():
    rng = np.random.default_rng(5)
    ref = F(0, 0.0, 20)
    archive: ParetoArchive = ParetoArchive()
    previous = 0.0
    for _ in range(30):
        archive.update(_Entry(f) for f in random_triples(rng, 5))
        current = hypervolume(archive.fitnesses, ref)
        assert current >= previous - 1e-12
        previous = current
        for a, b in itertools.permutations(archive.fitnesses, 2):
            assert not dominates(a, b)
