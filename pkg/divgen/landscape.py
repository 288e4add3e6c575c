"""Per-generation fitness landscape metrics.

Evolvability: ppos and hv. Population diversity: maxdiam, avgdiam, mindiam,
reldiam. Diversity of the Pareto-optimal solutions, read off a connectedness
graph whose edges join solutions closer than k: pconnec, nconnec, kconnec,
lconnec, hvconnec.
"""

from collections.abc import Callable, Mapping, Sequence
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, minimum_spanning_tree

from .appmodel import Individual
from .errors import ConfigError, PreconditionError
from .genotype import TestSuite, distance_matrix
from .hparams import SearchConfig
from .moea import FitnessTriple, fast_non_dominated_sort, hypervolume
from .utils import format_csv, read_csv

LANDSCAPE_COLUMNS = (
    'generation',
    'ppos',
    'hv',
    'maxdiam',
    'avgdiam',
    'mindiam',
    'reldiam',
    'pconnec',
    'nconnec',
    'kconnec',
    'lconnec',
    'hvconnec',
)


@dataclass(frozen=True)
class Connectedness:
    pconnec: float
    nconnec: int
    kconnec: int
    lconnec: int
    hvconnec: float
    nconnec_with_singletons: int


@dataclass(frozen=True)
class LandscapeSnapshot:
    generation: int
    ppos: float
    hv: float
    maxdiam: int
    avgdiam: float
    mindiam: int
    reldiam: float
    pconnec: float
    nconnec: int
    kconnec: int
    lconnec: int
    hvconnec: float
    nconnec_with_singletons: int
    coverage: float
    crashes: int
    archive_size: int
    adaptive_fired: bool
    dedup_shortfall: bool
    div_pop: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> 'LandscapeSnapshot':
        return cls(**{f.name: data[f.name] for f in fields(cls) if f.name in data})


def ppos(fronts: Sequence[Sequence[int]]) -> float:
    """Share of the population in the first front."""
    size = sum(len(front) for front in fronts)
    if not size:
        raise PreconditionError('ppos needs a non-empty population')
    return len(fronts[0]) / size


def diameters(
    population: Sequence[TestSuite], matrix: np.ndarray | None = None
) -> tuple[int, float, int]:
    """(maxdiam, avgdiam, mindiam) over all distinct pairs."""
    n = len(population)
    if n < 2:
        raise PreconditionError(f'diameters need at least 2 individuals, got {n}')
    matrix = distance_matrix(population) if matrix is None else matrix
    pairs = matrix[np.triu_indices(n, k=1)]
    # ordered-pair average equals the unordered one: every pair is counted twice
    return int(pairs.max()), float(pairs.sum() * 2 / (n * (n - 1))), int(pairs.min())


def reldiam(avgdiam: float, d_max: float) -> float:
    if d_max <= 0:
        raise ConfigError(f'largest possible distance must be positive, got {d_max}')
    return avgdiam / d_max


def build_clusters(
    front: Sequence[TestSuite], k: int, matrix: np.ndarray | None = None
) -> list[list[int]]:
    """Connected components of the graph joining members closer than k."""
    n = len(front)
    if not n:
        return []
    if k < 0:
        raise PreconditionError(f'k must be >= 0, got {k}')
    matrix = distance_matrix(front) if matrix is None else matrix
    adjacency = matrix < k
    np.fill_diagonal(adjacency, False)
    _, labels = connected_components(csr_matrix(adjacency), directed=False)
    groups: dict[int, list[int]] = {}
    for member, label in enumerate(labels):
        groups.setdefault(int(label), []).append(member)
    return sorted(groups.values(), key=lambda c: (-len(c), c[0]))


def minimal_connecting_k(matrix: np.ndarray) -> int:
    """Smallest k for which the strict (< k) graph is connected.

    That is the bottleneck edge of a minimum spanning tree plus one. Weights
    are shifted by one because zero entries mean "no edge" to scipy.
    """
    if matrix.shape[0] < 2:
        return 1
    tree = minimum_spanning_tree(csr_matrix(matrix + 1 - np.eye(len(matrix), dtype=matrix.dtype)))
    return int(tree.max())


def connectedness_metrics(
    front: Sequence[TestSuite],
    fitnesses: Sequence[FitnessTriple],
    k: int,
    hv_fn: Callable[[Sequence[FitnessTriple]], float],
    matrix: np.ndarray | None = None,
) -> Connectedness:
    if not front:
        raise PreconditionError('connectedness needs a non-empty front')
    matrix = distance_matrix(front) if matrix is None else matrix
    clusters = build_clusters(front, k, matrix)
    grouped = [c for c in clusters if len(c) >= 2]
    largest = clusters[0]
    full_hv = hv_fn(fitnesses)
    hvconnec = 1.0 if full_hv == 0 else hv_fn([fitnesses[i] for i in largest]) / full_hv
    return Connectedness(
        pconnec=sum(len(c) for c in grouped) / len(front),
        nconnec=len(grouped),
        kconnec=minimal_connecting_k(matrix),
        lconnec=len(largest),
        hvconnec=hvconnec,
        nconnec_with_singletons=len(clusters),
    )


def nadir(config: SearchConfig) -> FitnessTriple:
    return FitnessTriple(0, 0.0, config.max_length_objective)


def snapshot(
    generation: int,
    population: Sequence[Individual],
    front: Sequence[Individual] | None,
    archive: Sequence[FitnessTriple],
    config: SearchConfig,
    *,
    coverage: float = 0.0,
    crashes: int = 0,
    adaptive_fired: bool = False,
    dedup_shortfall: bool = False,
    div_pop: float | None = None,
) -> LandscapeSnapshot:
    """Assemble every metric of one generation.

    hv is measured on the archive, diameters on the whole population and
    connectedness on its first front.
    """
    fitnesses = [ind.fitness for ind in population]
    fronts = fast_non_dominated_sort(fitnesses)
    if front is None:
        front = [population[i] for i in fronts[0]]
    reference = nadir(config)

    def hv_fn(points: Sequence[FitnessTriple]) -> float:
        return hypervolume(points, reference)

    suites = [ind.suite for ind in population]
    maxdiam, avgdiam, mindiam = diameters(suites)
    connec = connectedness_metrics(
        [ind.suite for ind in front], [ind.fitness for ind in front], config.connectedness_k, hv_fn
    )
    return LandscapeSnapshot(
        generation=generation,
        ppos=ppos(fronts),
        hv=hv_fn(archive),
        maxdiam=maxdiam,
        avgdiam=avgdiam,
        mindiam=mindiam,
        reldiam=reldiam(avgdiam, config.max_distance),
        pconnec=connec.pconnec,
        nconnec=connec.nconnec,
        kconnec=connec.kconnec,
        lconnec=connec.lconnec,
        hvconnec=connec.hvconnec,
        nconnec_with_singletons=connec.nconnec_with_singletons,
        coverage=coverage,
        crashes=crashes,
        archive_size=len(archive),
        adaptive_fired=adaptive_fired,
        dedup_shortfall=dedup_shortfall,
        div_pop=div_pop,
    )


SNAPSHOT_COLUMNS = tuple(f.name for f in fields(LandscapeSnapshot))


def _cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float | np.floating):
        return repr(float(value))
    return str(value)


def _parse(name: str, text: str):
    kind = LandscapeSnapshot.__dataclass_fields__[name].type
    if text == '':
        return None
    if kind in ('bool', bool):
        return text == 'true'
    if kind in ('int', int):
        return int(text)
    return float(text)


def snapshots_to_csv(snapshots: Sequence[LandscapeSnapshot]) -> str:
    rows = [{name: _cell(getattr(s, name)) for name in SNAPSHOT_COLUMNS} for s in snapshots]
    return format_csv(SNAPSHOT_COLUMNS, rows)


def snapshots_from_csv(path: Path) -> list[LandscapeSnapshot]:
    return [
        LandscapeSnapshot(**{name: _parse(name, row[name]) for name in SNAPSHOT_COLUMNS})
        for row in read_csv(path)
    ]
