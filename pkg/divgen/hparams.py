import json
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Literal

from .errors import ConfigError

Mode = Literal['baseline', 'div']
MODES: tuple[Mode, ...] = ('baseline', 'div')


def _check_probability(name: str, value: float):
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f'{name} must be in [0, 1], got {value}')


@dataclass(frozen=True)
class VariationConfig:
    crossover_prob: float = field(default=0.7, metadata={'help': 'Suite crossover probability p'})
    mutation_prob: float = field(
        default=0.3, metadata={'help': 'Probability of mutating an offspring'}
    )
    inner_prob: float = field(
        default=0.3, metadata={'help': 'Inner probability q of case crossover / event shuffle'}
    )
    min_seq_len: int = field(default=20, metadata={'help': 'Shortest allowed test case'})
    max_seq_len: int = field(default=500, metadata={'help': 'Longest allowed test case'})

    def __post_init__(self):
        _check_probability('crossover_prob', self.crossover_prob)
        _check_probability('mutation_prob', self.mutation_prob)
        _check_probability('inner_prob', self.inner_prob)
        if not 1 <= self.min_seq_len <= self.max_seq_len:
            raise ConfigError(
                f'need 1 <= min_seq_len <= max_seq_len, got {self.min_seq_len}, {self.max_seq_len}'
            )


@dataclass(frozen=True)
class SearchConfig:
    # Variation
    crossover_prob: float = field(default=0.7, metadata={'help': 'Suite crossover probability p'})
    mutation_prob: float = field(
        default=0.3, metadata={'help': 'Probability of mutating an offspring'}
    )
    inner_prob: float = field(
        default=0.3, metadata={'help': 'Inner probability q of case crossover / event shuffle'}
    )

    # Population
    size_pop: int = field(default=50, metadata={'help': 'Population size'})
    size_off: int = field(default=50, metadata={'help': 'Offspring size'})
    suite_size: int = field(default=5, metadata={'help': 'Test cases per suite (m)'})
    min_seq_len: int = field(default=20, metadata={'help': 'Shortest allowed test case'})
    max_seq_len: int = field(default=500, metadata={'help': 'Longest allowed test case'})
    g_max: int = field(default=40, metadata={'help': 'Number of generations'})
    length_aggregate: Literal['sum', 'mean'] = field(
        default='sum', metadata={'help': 'How case lengths fold into the length objective'}
    )

    # Diversity
    mode: Mode = field(default='baseline', metadata={'help': 'Search variant'})
    size_init: int = field(default=100, metadata={'help': 'Size of the large initial population'})
    div_limit: float = field(default=0.5, metadata={'help': 'Diversity threshold'})
    n_div: int = field(default=15, metadata={'help': 'Diverse solutions kept per generation'})
    diverse_init: bool = field(default=True, metadata={'help': 'Div mode: diverse initialization'})
    adaptive_control: bool = field(
        default=True, metadata={'help': 'Div mode: restart on diversity loss'}
    )
    dedup: bool = field(default=True, metadata={'help': 'Div mode: duplicate elimination'})
    diverse_selection: bool = field(
        default=True, metadata={'help': 'Div mode: keep n_div most distant solutions'}
    )

    # Landscape
    connectedness_k: int = field(
        default=300, metadata={'help': 'Distance threshold of the connectedness graph'}
    )

    alphabet_size: int | None = field(
        default=None, metadata={'help': 'Event alphabet the model must have, checked when set'}
    )
    seed: int = field(default=0, metadata={'help': 'Base seed of the run'})

    def __post_init__(self):
        _check_probability('crossover_prob', self.crossover_prob)
        _check_probability('mutation_prob', self.mutation_prob)
        _check_probability('inner_prob', self.inner_prob)
        _check_probability('div_limit', self.div_limit)
        if self.mode not in MODES:
            raise ConfigError(f'mode must be one of {MODES}, got {self.mode!r}')
        if self.length_aggregate not in ('sum', 'mean'):
            raise ConfigError(
                f'length_aggregate must be sum or mean, got {self.length_aggregate!r}'
            )
        if self.size_pop < 2:
            raise ConfigError(f'size_pop must be >= 2, got {self.size_pop}')
        if self.size_off < 1:
            raise ConfigError(f'size_off must be >= 1, got {self.size_off}')
        if self.suite_size < 1:
            raise ConfigError(f'suite_size must be >= 1, got {self.suite_size}')
        if not 1 <= self.min_seq_len <= self.max_seq_len:
            raise ConfigError(
                f'need 1 <= min_seq_len <= max_seq_len, got {self.min_seq_len}, {self.max_seq_len}'
            )
        if self.g_max < 0:
            raise ConfigError(f'g_max must be >= 0, got {self.g_max}')
        if self.size_init < self.size_pop:
            raise ConfigError(f'size_init ({self.size_init}) must be >= size_pop ({self.size_pop})')
        if not 0 <= self.n_div <= self.size_pop:
            raise ConfigError(f'n_div must be in [0, size_pop], got {self.n_div}')
        if self.alphabet_size is not None and self.alphabet_size < 1:
            raise ConfigError(f'alphabet_size must be >= 1, got {self.alphabet_size}')
        if self.connectedness_k < 0:
            raise ConfigError(f'connectedness_k must be >= 0, got {self.connectedness_k}')

    @property
    def variation(self) -> VariationConfig:
        return VariationConfig(
            crossover_prob=self.crossover_prob,
            mutation_prob=self.mutation_prob,
            inner_prob=self.inner_prob,
            min_seq_len=self.min_seq_len,
            max_seq_len=self.max_seq_len,
        )

    @property
    def max_distance(self) -> int:
        """Largest possible distance between two suites."""
        return self.suite_size * self.max_seq_len

    @property
    def max_length_objective(self) -> float:
        """Length coordinate of the hypervolume nadir."""
        if self.length_aggregate == 'mean':
            return float(self.max_seq_len)
        return float(self.suite_size * self.max_seq_len)

    def with_overrides(self, **overrides) -> 'SearchConfig':
        return replace(self, **overrides)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, hparams_dict):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(hparams_dict) - known)
        if unknown:
            raise ConfigError(f'unknown config fields: {", ".join(unknown)}')
        return cls(**hparams_dict)

    @classmethod
    def from_json(cls, json_file):
        with open(json_file, encoding='utf-8') as f:
            hparams_dict = json.load(f)
        return cls.from_dict(hparams_dict)


@dataclass(frozen=True)
class GeneratorParams:
    n_states: int = field(default=30, metadata={'help': 'Number of app states'})
    alphabet_size: int = field(default=12, metadata={'help': 'Number of distinct events'})
    total_blocks: int = field(default=200, metadata={'help': 'Number of coverable blocks'})
    n_crash_rules: int = field(default=8, metadata={'help': 'Number of crashing (state, event)'})
    branching: int = field(default=4, metadata={'help': 'Explicit transitions per state'})
    max_blocks_per_transition: int = field(
        default=3, metadata={'help': 'Upper bound of blocks covered by one transition'}
    )

    def __post_init__(self):
        for name in ('n_states', 'alphabet_size', 'total_blocks', 'branching'):
            if getattr(self, name) < 1:
                raise ConfigError(f'{name} must be >= 1, got {getattr(self, name)}')
        if self.max_blocks_per_transition < 1:
            raise ConfigError('max_blocks_per_transition must be >= 1')
        if self.n_crash_rules < 0:
            raise ConfigError(f'n_crash_rules must be >= 0, got {self.n_crash_rules}')
        if self.branching > self.alphabet_size:
            raise ConfigError(
                f'branching ({self.branching}) must be <= alphabet_size ({self.alphabet_size})'
            )
        free_slots = self.n_states * (self.alphabet_size - self.branching)
        if self.n_crash_rules > free_slots:
            raise ConfigError(
                f'n_crash_rules ({self.n_crash_rules}) must be <= '
                f'n_states * (alphabet_size - branching) = {free_slots}'
            )

    @classmethod
    def from_dict(cls, params_dict):
        return cls(**params_dict)
