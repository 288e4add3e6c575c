import json
from dataclasses import dataclass, field
from pathlib import Path

from .appmodel import Individual
from .genotype import TestSuite
from .hparams import SearchConfig
from .landscape import LandscapeSnapshot, snapshots_to_csv
from .moea import FitnessTriple
from .utils import atomic_write_text


@dataclass(frozen=True)
class Solution:
    """An evaluated suite as kept in a run record."""

    suite: TestSuite
    fitness: FitnessTriple
    crash_signatures: tuple[int, ...] = ()

    @classmethod
    def from_individual(cls, individual: Individual) -> 'Solution':
        return cls(
            individual.suite,
            individual.fitness,
            tuple(sorted(individual.result.crash_signatures)),
        )

    def to_dict(self) -> dict:
        return {
            'suite': self.suite.to_json(),
            'fitness': self.fitness.to_json(),
            'crash_signatures': list(self.crash_signatures),
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'Solution':
        return cls(
            TestSuite.from_json(data['suite']),
            FitnessTriple.from_json(data['fitness']),
            tuple(data.get('crash_signatures', ())),
        )


@dataclass(frozen=True)
class CrashLogEntry:
    """A signature revealed in some generation by a case of the given length.

    Entries are logged on first sight and whenever a strictly shorter case
    reveals the same signature.
    """

    signature: int
    generation: int
    length: int


@dataclass
class RunRecord:
    model_id: str
    config: SearchConfig
    snapshots: list[LandscapeSnapshot] = field(default_factory=list)
    population: list[Solution] = field(default_factory=list)
    archive: list[Solution] = field(default_factory=list)
    crash_log: list[CrashLogEntry] = field(default_factory=list)
    duration: float = 0.0

    @property
    def mode(self) -> str:
        return self.config.mode

    @property
    def seed(self) -> int:
        return self.config.seed

    def to_dict(self) -> dict:
        return {
            'model_id': self.model_id,
            'mode': self.mode,
            'seed': self.seed,
            'config': self.config.to_dict(),
            'duration': self.duration,
            'snapshots': [s.to_dict() for s in self.snapshots],
            'crash_log': [[e.signature, e.generation, e.length] for e in self.crash_log],
            'archive': [s.to_dict() for s in self.archive],
            'population': [s.to_dict() for s in self.population],
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'RunRecord':
        return cls(
            model_id=data['model_id'],
            config=SearchConfig.from_dict(data['config']),
            snapshots=[LandscapeSnapshot.from_dict(s) for s in data['snapshots']],
            population=[Solution.from_dict(s) for s in data['population']],
            archive=[Solution.from_dict(s) for s in data['archive']],
            crash_log=[CrashLogEntry(*entry) for entry in data['crash_log']],
            duration=float(data['duration']),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), separators=(',', ':')) + '\n'


def run_stem(model_id: str, mode: str, rep: int) -> str:
    return f'{model_id}_{mode}_{rep}'


def save_run(record: RunRecord, out_dir: Path, rep: int) -> tuple[Path, Path]:
    """Write run_<stem>.json and snapshots_<stem>.csv."""
    stem = run_stem(record.model_id, record.mode, rep)
    run_path = Path(out_dir) / f'run_{stem}.json'
    csv_path = Path(out_dir) / f'snapshots_{stem}.csv'
    atomic_write_text(csv_path, snapshots_to_csv(record.snapshots))
    atomic_write_text(run_path, record.dumps())
    return run_path, csv_path


def load_run(path: Path) -> RunRecord:
    with open(path, encoding='utf-8') as f:
        return RunRecord.from_dict(json.load(f))
