from collections.abc import Sequence

import numpy as np

from .errors import PreconditionError
from .genotype import TestCase, TestSuite
from .hparams import VariationConfig


def uniform_suite_crossover(
    t1: TestSuite, t2: TestSuite, rng_stream: np.random.Generator
) -> tuple[TestSuite, TestSuite]:
    """Swap the cases at each index independently with probability 0.5."""
    if t1.size != t2.size:
        raise PreconditionError(f'suite sizes differ: {t1.size} != {t2.size}')
    swaps = rng_stream.random(t1.size) < 0.5
    child1, child2 = [], []
    for swap, a, b in zip(swaps, t1.cases, t2.cases, strict=True):
        child1.append(b if swap else a)
        child2.append(a if swap else b)
    return TestSuite(tuple(child1)), TestSuite(tuple(child2))


def _single_point_crossover(
    a: TestCase, b: TestCase, rng_stream: np.random.Generator, min_len: int, max_len: int
) -> tuple[TestCase, TestCase]:
    shortest = min(len(a), len(b))
    if shortest < 2:
        return a, b
    cut = int(rng_stream.integers(1, shortest))
    new_a, new_b = a[:cut] + b[cut:], b[:cut] + a[cut:]
    if not (min_len <= len(new_a) <= max_len and min_len <= len(new_b) <= max_len):
        return a, b
    return new_a, new_b


def suite_mutation(
    t: TestSuite,
    q: float,
    rng_stream: np.random.Generator,
    min_len: int = 1,
    max_len: int | None = None,
) -> TestSuite:
    """Shuffle the cases, cross adjacent cases and shuffle case events.

    Steps 2 and 3 fire with probability q per adjacent pair / per case.
    """
    max_len = max_len if max_len is not None else max(t.lengths, default=0)
    order = rng_stream.permutation(t.size)
    cases = [t.cases[int(i)] for i in order]

    for i in range(len(cases) - 1):
        if rng_stream.random() < q:
            cases[i], cases[i + 1] = _single_point_crossover(
                cases[i], cases[i + 1], rng_stream, min_len, max_len
            )

    for i, case in enumerate(cases):
        if rng_stream.random() < q:
            cases[i] = tuple(case[int(j)] for j in rng_stream.permutation(len(case)))

    return TestSuite(tuple(cases))


def _mating_pool(size: int, n: int, rng_stream: np.random.Generator) -> list[int]:
    pool: list[int] = []
    while len(pool) < n + (n % 2):
        pool.extend(int(i) for i in rng_stream.permutation(size))
    return pool


def whole_test_suite_variation(
    P: Sequence[TestSuite],
    cfg: VariationConfig,
    rng_stream: np.random.Generator,
    size_off: int | None = None,
) -> list[TestSuite]:
    """Create offspring by pairwise crossover and per-child mutation.

    Parents are paired sequentially over shuffled copies of P; each pair
    draws from its own spawned generator.
    """
    if len(P) < 2:
        raise PreconditionError(f'need at least 2 parents, got {len(P)}')
    size_off = len(P) if size_off is None else size_off
    pool = _mating_pool(len(P), size_off, rng_stream)
    pair_streams = rng_stream.spawn(len(pool) // 2)

    offspring: list[TestSuite] = []
    for pair_idx, pair_rng in enumerate(pair_streams):
        a, b = P[pool[2 * pair_idx]], P[pool[2 * pair_idx + 1]]
        if pair_rng.random() < cfg.crossover_prob:
            a, b = uniform_suite_crossover(a, b, pair_rng)
        for child in (a, b):
            if pair_rng.random() < cfg.mutation_prob:
                child = suite_mutation(
                    child, cfg.inner_prob, pair_rng, cfg.min_seq_len, cfg.max_seq_len
                )
            offspring.append(child)
    return offspring[:size_off]
