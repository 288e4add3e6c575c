"""Head-to-head comparison of two approaches over repeated runs.

Differences are tested with the two-sided Mann-Whitney U test and sized with
the Vargha-Delaney A12 effect size.
"""

import math
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.stats import mannwhitneyu

from .errors import DomainError, PreconditionError
from .record import RunRecord
from .utils import log_warning

EffectClass = Literal['negligible', 'small', 'medium', 'large']
Direction = Literal['better', 'worse', 'equal']

SIGNIFICANCE_LEVEL = 0.05
# lower bounds of small, medium, large on max(a12, 1 - a12)
EFFECT_THRESHOLDS = ((0.71, 'large'), (0.64, 'medium'), (0.56, 'small'))

COMPARISON_COLUMNS = (
    'subject',
    'gen_a',
    'mean_a',
    'median_a',
    'sd_a',
    'gen_b',
    'mean_b',
    'median_b',
    'sd_b',
    'p_value',
    'a12',
    'effect_class',
    'direction',
)


@dataclass(frozen=True)
class SampleSet:
    values: tuple[float, ...]
    label: str = ''

    @classmethod
    def of(cls, values: Iterable[float], label: str = '') -> 'SampleSet':
        return cls(tuple(float(v) for v in values), label)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class ComparisonRow:
    mean_a: float
    median_a: float
    sd_a: float | None
    mean_b: float
    median_b: float
    sd_b: float | None
    u: float
    p_value: float
    a12: float
    effect_class: EffectClass
    significant: bool
    direction: Direction


def _values(sample: SampleSet | Sequence[float]) -> np.ndarray:
    values = np.asarray(sample.values if isinstance(sample, SampleSet) else sample, dtype=float)
    if values.size == 0:
        raise PreconditionError('sample must not be empty')
    return values


def mann_whitney_u(
    a: SampleSet | Sequence[float],
    b: SampleSet | Sequence[float],
    method: Literal['auto', 'asymptotic', 'exact'] = 'auto',
) -> tuple[float, float]:
    """U statistic of a and two-sided p-value.

    'auto' uses the exact null distribution for small tie-free samples and the
    tie- and continuity-corrected normal approximation otherwise.
    """
    x, y = _values(a), _values(b)
    if np.ptp(np.concatenate([x, y])) == 0:
        # every value tied: no evidence either way
        return len(x) * len(y) / 2, 1.0
    result = mannwhitneyu(x, y, use_continuity=True, alternative='two-sided', method=method)
    p_value = float(result.pvalue)
    return float(result.statistic), 1.0 if math.isnan(p_value) else min(p_value, 1.0)


def vargha_delaney_a12(
    a: SampleSet | Sequence[float], b: SampleSet | Sequence[float], larger_is_better: bool = True
) -> float:
    """Probability that a draw from a beats a draw from b, ties counting half."""
    x, y = _values(a), _values(b)
    if not larger_is_better:
        x, y = -x, -y
    wins = np.count_nonzero(x[:, None] > y[None, :])
    ties = np.count_nonzero(x[:, None] == y[None, :])
    return float((wins + 0.5 * ties) / (x.size * y.size))


def effect_class(a12: float) -> EffectClass:
    magnitude = max(a12, 1.0 - a12)
    for bound, name in EFFECT_THRESHOLDS:
        if magnitude > bound:
            return name  # type: ignore[return-value]
    return 'negligible'


def overhead_percent(median_base: float, median_div: float) -> float:
    if median_base <= 0:
        raise DomainError(f'baseline median must be positive, got {median_base}')
    return 100.0 * (median_div - median_base) / median_base


def adjusted_generations(g_max: int, overhead: float) -> int:
    """Generations a slower approach gets under the same time budget."""
    if overhead < 0:
        raise DomainError(f'overhead must be >= 0, got {overhead}')
    if overhead >= 100:
        log_warning(f'overhead {overhead:.2f}% leaves no generation of the budget')
        return 0
    return math.floor(g_max * (1.0 - overhead / 100.0) + 0.5)


def min_crash_sequence_length(record: RunRecord, generation: int | None = None) -> float | None:
    """Mean over unique crashes of the shortest case revealing each of them."""
    minima: dict[int, int] = {}
    for entry in record.crash_log:
        if generation is not None and entry.generation > generation:
            continue
        known = minima.get(entry.signature)
        if known is None or entry.length < known:
            minima[entry.signature] = entry.length
    if not minima:
        return None
    return sum(minima.values()) / len(minima)


def _describe(values: np.ndarray) -> tuple[float, float, float | None]:
    sd = float(np.std(values, ddof=1)) if values.size > 1 else None
    return float(np.mean(values)), float(np.median(values)), sd


def compare(
    a: SampleSet | Sequence[float],
    b: SampleSet | Sequence[float],
    larger_is_better: bool = True,
) -> ComparisonRow:
    x, y = _values(a), _values(b)
    mean_a, median_a, sd_a = _describe(x)
    mean_b, median_b, sd_b = _describe(y)
    u, p_value = mann_whitney_u(x, y)
    a12 = vargha_delaney_a12(x, y, larger_is_better)
    direction: Direction = 'better' if a12 > 0.5 else 'worse' if a12 < 0.5 else 'equal'
    return ComparisonRow(
        mean_a=mean_a,
        median_a=median_a,
        sd_a=sd_a,
        mean_b=mean_b,
        median_b=median_b,
        sd_b=sd_b,
        u=u,
        p_value=p_value,
        a12=a12,
        effect_class=effect_class(a12),
        significant=p_value < SIGNIFICANCE_LEVEL,
        direction=direction,
    )


def summarize(rows: Iterable[ComparisonRow]) -> dict[str, int]:
    """Count significant wins and losses of side a, and the rest."""
    counts: Counter[str] = Counter()
    for row in rows:
        if row.significant and row.direction != 'equal':
            counts[row.direction] += 1
        else:
            counts['no_difference'] += 1
    return {key: counts[key] for key in ('better', 'worse', 'no_difference')}
