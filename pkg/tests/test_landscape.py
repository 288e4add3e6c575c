import itertools

import numpy as np
import pytest

from divgen.appmodel import Individual, evaluate
from divgen.errors import ConfigError, PreconditionError
from divgen.genotype import TestSuite, distance_matrix, random_suite
from divgen.hparams import SearchConfig
from divgen.landscape import (
    build_clusters,
    connectedness_metrics,
    diameters,
    minimal_connecting_k,
    ppos,
    reldiam,
    snapshot,
    snapshots_from_csv,
    snapshots_to_csv,
)
from divgen.moea import FitnessTriple, fast_non_dominated_sort, hypervolume

F = FitnessTriple
REF = F(0, 0.0, 1000)


def line_suites(*lengths):
    """Single-case suites of zeros; distance equals the length difference."""
    return [TestSuite(((0,) * n,)) for n in lengths]


def hv(points):
    return hypervolume(points, REF)


def threshold_sweep(matrix):
    """Smallest k' for which the strict graph is one component."""
    n = len(matrix)
    candidates = sorted({int(d) + 1 for d in matrix[np.triu_indices(n, k=1)]} | {1})
    for k in candidates:
        if len(build_clusters([None] * n, k, matrix)) == 1:
            return k
    raise AssertionError('sweep found no connecting threshold')


@pytest.mark.parametrize(
    'fronts, expected',
    [
        ([[0, 1, 2, 3]], 1.0),
        ([[0], list(range(1, 50))], 0.02),
        ([[0, 1], [2], [3, 4]], 0.4),
    ],
)
def test_ppos(fronts, expected):
    assert ppos(fronts) == pytest.approx(expected)


def test_ppos_matches_sort():
    rng = np.random.default_rng(0)
    for _ in range(20):
        fitnesses = [
            F(int(rng.integers(0, 3)), float(rng.integers(0, 4)) / 4, int(rng.integers(5, 9)))
            for _ in range(10)
        ]
        non_dominated = sum(
            not any(
                g.crashes >= f.crashes
                and g.coverage >= f.coverage
                and g.length <= f.length
                and g != f
                for g in fitnesses
            )
            for f in fitnesses
        )
        assert ppos(fast_non_dominated_sort(fitnesses)) == non_dominated / 10


@pytest.mark.parametrize(
    'lengths, expected',
    [
        ((3, 3, 3), (0, 0.0, 0)),
        ((2, 9), (7, 7.0, 7)),
        ((0, 4, 8), (8, pytest.approx(16 / 3), 4)),
        ((2, 6, 10), (8, pytest.approx(16 / 3), 4)),
    ],
)
def test_diameters(lengths, expected):
    assert diameters(line_suites(*lengths)) == expected


def test_diameters_from_matrix():
    matrix = np.array([[0, 4, 6], [4, 0, 8], [6, 8, 0]])
    assert diameters([None] * 3, matrix) == (8, 6.0, 4)


def test_diameters_need_two_members():
    with pytest.raises(PreconditionError):
        diameters(line_suites(3))


@pytest.mark.parametrize(
    'avgdiam, d_max, expected',
    [(0, 2500, 0.0), (2500, 2500, 1.0), (1500, 2500, 0.6)],
)
def test_reldiam(avgdiam, d_max, expected):
    assert reldiam(avgdiam, d_max) == pytest.approx(expected)


def test_reldiam_rejects_zero_range():
    with pytest.raises(ConfigError):
        reldiam(1.0, 0)


# distances: d(0,1)=100, d(2,3)=150, every cross pair >= 400
FOUR = line_suites(1, 101, 501, 651)


@pytest.mark.parametrize(
    'k, expected',
    [
        (0, [[0], [1], [2], [3]]),
        (100, [[0], [1], [2], [3]]),
        (101, [[0, 1], [2], [3]]),
        (300, [[0, 1], [2, 3]]),
        (651, [[0, 1, 2, 3]]),
    ],
)
def test_build_clusters(k, expected):
    assert build_clusters(FOUR, k) == expected


def test_build_clusters_empty_front():
    assert build_clusters([], 300) == []


def test_clusters_partition_front():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n = int(rng.integers(1, 12))
        suites = line_suites(*rng.integers(0, 40, size=n))
        k = int(rng.integers(0, 45))
        clusters = build_clusters(suites, k)
        assert sorted(itertools.chain.from_iterable(clusters)) == list(range(n))


def test_connectedness_singleton_front():
    result = connectedness_metrics(line_suites(5), [F(1, 0.5, 5)], 300, hv)
    assert (result.pconnec, result.nconnec, result.kconnec, result.lconnec) == (0.0, 0, 1, 1)
    assert result.hvconnec == 1.0


def test_connectedness_single_cluster():
    suites = line_suites(1, 5, 9)
    fitnesses = [F(1, 0.5, 1), F(2, 0.2, 5), F(0, 0.9, 9)]
    result = connectedness_metrics(suites, fitnesses, 300, hv)
    assert result.pconnec == 1.0
    assert result.nconnec == 1
    assert result.hvconnec == 1.0
    assert result.kconnec == 5


def test_connectedness_two_clusters():
    fitnesses = [F(3, 0.2, 10), F(2, 0.4, 10), F(1, 0.6, 10), F(0, 0.8, 10)]
    result = connectedness_metrics(FOUR, fitnesses, 300, hv)
    assert result.pconnec == 1.0
    assert result.nconnec == 2
    assert result.nconnec_with_singletons == 2
    assert result.lconnec == 2
    assert result.kconnec == 401
    assert result.hvconnec == pytest.approx(hv(fitnesses[:2]) / hv(fitnesses))
    assert 0.0 <= result.hvconnec <= 1.0


def test_connectedness_all_singletons():
    fitnesses = [F(1, 0.5, 10)] * 4
    result = connectedness_metrics(FOUR, fitnesses, 0, hv)
    assert result.pconnec == 0.0
    assert result.nconnec == 0
    assert result.nconnec_with_singletons == 4
    assert result.lconnec == 1


def test_connectedness_zero_hypervolume():
    fitnesses = [F(0, 0.0, 10)] * 4
    assert connectedness_metrics(FOUR, fitnesses, 300, hv).hvconnec == 1.0


def test_kconnec_matches_threshold_sweep():
    rng = np.random.default_rng(2)
    for _ in range(200):
        n = int(rng.integers(1, 16))
        upper = np.triu(rng.integers(0, 60, size=(n, n)), k=1)
        matrix = upper + upper.T
        assert minimal_connecting_k(matrix) == threshold_sweep(matrix)
        if n >= 2:
            assert minimal_connecting_k(matrix) <= int(matrix.max()) + 1


def test_kconnec_with_duplicates():
    matrix = distance_matrix(line_suites(4, 4, 4))
    assert minimal_connecting_k(matrix) == 1


def _population(model, n, seed=0):
    rng = np.random.default_rng(seed)
    config = SearchConfig(suite_size=3, min_seq_len=5, max_seq_len=30)
    suites = [random_suite(rng, config, model.alphabet_size) for _ in range(n)]
    return [Individual(suite, evaluate(suite, model)) for suite in suites]


def test_snapshot_invariants(small_model, small_config):
    for seed in range(5):
        population = _population(small_model, 10, seed)
        snap = snapshot(
            0,
            population,
            None,
            [ind.fitness for ind in population],
            small_config,
            coverage=0.5,
            crashes=2,
        )
        front_size = len(fast_non_dominated_sort([ind.fitness for ind in population])[0])
        assert snap.mindiam <= snap.avgdiam <= snap.maxdiam
        assert snap.reldiam == pytest.approx(snap.avgdiam / small_config.max_distance)
        assert 0.0 < snap.ppos <= 1.0
        assert 0.0 <= snap.pconnec <= 1.0
        assert 0.0 <= snap.hvconnec <= 1.0 + 1e-12
        assert 1 <= snap.lconnec <= front_size
        assert snap.hv >= 0.0
        assert snap.archive_size == 10


def test_snapshot_csv_round_trip(tmp_path, small_model, small_config):
    population = _population(small_model, 10)
    archive = [ind.fitness for ind in population]
    snaps = [
        snapshot(0, population, None, archive, small_config, div_pop=12.25),
        snapshot(
            1,
            population,
            None,
            archive,
            small_config,
            coverage=0.3,
            crashes=1,
            adaptive_fired=True,
            dedup_shortfall=True,
        ),
    ]
    path = tmp_path / 'snapshots.csv'
    path.write_text(snapshots_to_csv(snaps), encoding='utf-8')
    assert snapshots_from_csv(path) == snaps
