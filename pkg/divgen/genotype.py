"""Test-suite genotype and the genotypic distance between suites.

A suite is an ordered tuple of test cases, a case an ordered tuple of integer
event ids. The distance of two suites compares their cases index by index:
per case pair it counts the length difference plus the positions, within the
shorter case, at which the events differ.
"""

import json
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .hparams import SearchConfig

Event = int
TestCase = tuple[Event, ...]

PAD = -1


@dataclass(frozen=True)
class TestSuite:
    cases: tuple[TestCase, ...]

    __test__ = False  # not a pytest class

    @classmethod
    def of(cls, cases: Sequence[Sequence[int]]) -> 'TestSuite':
        return cls(tuple(tuple(int(e) for e in case) for case in cases))

    @property
    def size(self) -> int:
        return len(self.cases)

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(len(case) for case in self.cases)

    @property
    def total_length(self) -> int:
        return sum(self.lengths)

    def satisfies(self, config: SearchConfig, alphabet_size: int | None = None) -> bool:
        """Check suite size, case length bounds and, optionally, event range."""
        if self.size != config.suite_size:
            return False
        for case in self.cases:
            if not config.min_seq_len <= len(case) <= config.max_seq_len:
                return False
            if alphabet_size is not None and any(not 0 <= e < alphabet_size for e in case):
                return False
        return True

    def to_json(self) -> list[list[int]]:
        return [list(case) for case in self.cases]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[int]]) -> 'TestSuite':
        return cls.of(data)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(',', ':'))


def _check_sizes(t1: TestSuite, t2: TestSuite):
    if t1.size != t2.size:
        raise PreconditionError(f'suite sizes differ: {t1.size} != {t2.size}')


def case_distance(s1: TestCase, s2: TestCase) -> int:
    n = min(len(s1), len(s2))
    mismatches = int(np.count_nonzero(np.asarray(s1[:n]) != np.asarray(s2[:n]))) if n else 0
    return abs(len(s1) - len(s2)) + mismatches


def distance(t1: TestSuite, t2: TestSuite) -> int:
    _check_sizes(t1, t2)
    return sum(case_distance(s1, s2) for s1, s2 in zip(t1.cases, t2.cases, strict=True))


def is_duplicate(t1: TestSuite, t2: TestSuite) -> bool:
    return distance(t1, t2) == 0


def padded(suites: Sequence[TestSuite]) -> np.ndarray:
    """Stack suites into a (n, m, max_len) array padded with PAD.

    Padding never equals a real event, so counting unequal cells of two rows
    gives the length difference plus the mismatches, i.e. the suite distance.
    """
    m = suites[0].size
    for suite in suites:
        if suite.size != m:
            raise PreconditionError(f'suite sizes differ: {suite.size} != {m}')
    width = max(max(suite.lengths, default=0) for suite in suites)
    out = np.full((len(suites), m, max(width, 1)), PAD, dtype=np.int32)
    for i, suite in enumerate(suites):
        for j, case in enumerate(suite.cases):
            out[i, j, : len(case)] = case
    return out


def distance_matrix(suites: Sequence[TestSuite]) -> np.ndarray:
    """Symmetric (n, n) matrix of pairwise suite distances."""
    n = len(suites)
    matrix = np.zeros((n, n), dtype=np.int64)
    if n < 2:
        return matrix
    arr = padded(suites).reshape(n, -1)
    for i in range(n - 1):
        row = np.count_nonzero(arr[i + 1 :] != arr[i], axis=1)
        matrix[i, i + 1 :] = row
        matrix[i + 1 :, i] = row
    return matrix


def random_suite(
    rng_stream: np.random.Generator, config: SearchConfig, alphabet_size: int
) -> TestSuite:
    if alphabet_size < 1:
        raise PreconditionError(f'alphabet_size must be >= 1, got {alphabet_size}')
    lengths = rng_stream.integers(
        config.min_seq_len, config.max_seq_len, size=config.suite_size, endpoint=True
    )
    return TestSuite(
        tuple(
            tuple(int(e) for e in rng_stream.integers(0, alphabet_size, size=int(length)))
            for length in lengths
        )
    )
