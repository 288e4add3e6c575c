import numpy as np
import pytest

from divgen.appmodel import AppModel, Transition, generate_model
from divgen.hparams import GeneratorParams, SearchConfig


class ScriptedRng:
    """Stand-in for numpy's Generator replaying scripted draws."""

    def __init__(self, randoms=(), permutations=(), integers=()):
        self.randoms = list(randoms)
        self.permutations = list(permutations)
        self.integers_ = list(integers)

    def random(self, size=None):
        if size is None:
            return self.randoms.pop(0)
        return np.array([self.randoms.pop(0) for _ in range(size)])

    def permutation(self, n):
        if self.permutations:
            perm = self.permutations.pop(0)
            assert len(perm) == n
            return list(perm)
        return list(range(n))

    def integers(self, low, high=None):
        return self.integers_.pop(0)


@pytest.fixture
def scripted_rng():
    return ScriptedRng


@pytest.fixture
def small_config() -> SearchConfig:
    return SearchConfig(
        size_pop=10,
        size_off=10,
        size_init=20,
        n_div=3,
        suite_size=3,
        min_seq_len=5,
        max_seq_len=30,
        g_max=6,
        connectedness_k=20,
        seed=11,
    )


@pytest.fixture
def small_model() -> AppModel:
    params = GeneratorParams(
        n_states=12, alphabet_size=6, total_blocks=60, n_crash_rules=6, branching=3
    )
    return generate_model(3, params)


@pytest.fixture
def crash_model() -> AppModel:
    """One state; event 3 crashes with signature 7, event 1 covers block 0."""
    return AppModel(
        alphabet_size=5,
        initial_state=0,
        states=(0,),
        transitions={(0, 1): Transition(0, frozenset({0}))},
        crash_rules={(0, 3): 7},
        total_blocks=4,
    )
