import time
from concurrent.futures import Executor, ProcessPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass

from ..appmodel import AppModel, Individual, evaluate_all
from ..errors import ConfigError
from ..genotype import TestSuite, random_suite
from ..hparams import SearchConfig
from ..landscape import LandscapeSnapshot, snapshot
from ..moea import ParetoArchive, nsga2_order
from ..record import CrashLogEntry, RunRecord, Solution
from ..utils import Role, log_debug, log_info, sub_stream
from ..variation import whole_test_suite_variation


@dataclass(frozen=True)
class StepInfo:
    adaptive_fired: bool = False
    dedup_shortfall: bool = False
    div_pop: float | None = None


class BaselineSearch:
    """NSGA-II over test suites with plain random initialization.

    Every evaluation feeds the Pareto archive and the cumulative coverage and
    crash bookkeeping; a landscape snapshot closes every generation.
    """

    def __init__(self, config: SearchConfig, model: AppModel, model_id: str = 'model'):
        if config.alphabet_size is not None and config.alphabet_size != model.alphabet_size:
            raise ConfigError(
                f'config expects alphabet_size {config.alphabet_size}, '
                f'model has {model.alphabet_size}'
            )
        self.config = config
        self.model = model
        self.model_id = model_id

        self.generation = 0
        self.archive: ParetoArchive[Individual] = ParetoArchive()
        self.covered: set[int] = set()
        self.crash_minima: dict[int, int] = {}
        self.crash_log: list[CrashLogEntry] = []
        self.executor: Executor | None = None

    @property
    def seed(self) -> int:
        return self.config.seed

    def random_suites(self, n: int, role: Role) -> list[TestSuite]:
        return [
            random_suite(
                sub_stream(self.seed, self.generation, role, i),
                self.config,
                self.model.alphabet_size,
            )
            for i in range(n)
        ]

    def evaluate(self, suites: list[TestSuite]) -> list[Individual]:
        individuals = evaluate_all(
            suites, self.model, self.config.length_aggregate, self.executor
        )
        self.archive.update(individuals)
        for ind in individuals:
            self.covered |= ind.result.covered_blocks
            for case, crash in zip(ind.suite.cases, ind.result.per_case_crash, strict=True):
                if crash is None:
                    continue
                known = self.crash_minima.get(crash.signature)
                if known is None or len(case) < known:
                    self.crash_minima[crash.signature] = len(case)
                    self.crash_log.append(
                        CrashLogEntry(crash.signature, self.generation, len(case))
                    )
                    if known is None:
                        log_debug(f'new crash signature {crash.signature} at gen {self.generation}')
        return individuals

    def initialize(self) -> list[Individual]:
        return self.evaluate(self.random_suites(self.config.size_pop, Role.INIT))

    def make_offspring(self, population: list[Individual]) -> list[TestSuite]:
        return whole_test_suite_variation(
            [ind.suite for ind in population],
            self.config.variation,
            sub_stream(self.seed, self.generation, Role.PAIRING),
            self.config.size_off,
        )

    def select(
        self, population: list[Individual], offspring: list[Individual]
    ) -> tuple[list[Individual], bool]:
        """Environmental selection; the flag reports a deduplication shortfall."""
        pool = population + offspring
        order = nsga2_order([ind.fitness for ind in pool], self.config.size_pop)
        return [pool[i] for i in order[: self.config.size_pop]], False

    def step(self, population: list[Individual]) -> tuple[list[Individual], StepInfo]:
        offspring = self.evaluate(self.make_offspring(population))
        population, shortfall = self.select(population, offspring)
        return population, StepInfo(dedup_shortfall=shortfall)

    def take_snapshot(self, population: list[Individual], info: StepInfo) -> LandscapeSnapshot:
        return snapshot(
            self.generation,
            population,
            None,
            self.archive.fitnesses,
            self.config,
            coverage=len(self.covered) / self.model.total_blocks,
            crashes=len(self.crash_minima),
            adaptive_fired=info.adaptive_fired,
            dedup_shortfall=info.dedup_shortfall,
            div_pop=info.div_pop,
        )

    def start_info(self, population: list[Individual]) -> StepInfo:
        return StepInfo()

    def run(self, workers: int = 1) -> RunRecord:
        start = time.perf_counter()
        pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else nullcontext()
        with pool as executor:
            self.executor = executor
            try:
                self.generation = 0
                population = self.initialize()
                snapshots = [self.take_snapshot(population, self.start_info(population))]
                while self.generation < self.config.g_max:
                    self.generation += 1
                    population, info = self.step(population)
                    snapshots.append(self.take_snapshot(population, info))
                    self.log_progress(snapshots[-1])
            finally:
                self.executor = None

        return RunRecord(
            model_id=self.model_id,
            config=self.config,
            snapshots=snapshots,
            population=[Solution.from_individual(ind) for ind in population],
            archive=[Solution.from_individual(ind) for ind in self.archive],
            crash_log=list(self.crash_log),
            duration=time.perf_counter() - start,
        )

    def log_progress(self, s: LandscapeSnapshot):
        log_info(
            f'[{self.model_id}/{self.config.mode}] gen {s.generation}/{self.config.g_max} '
            f'ppos={s.ppos:.2f} hv={s.hv:.1f} avgdiam={s.avgdiam:.1f} mindiam={s.mindiam} '
            f'coverage={s.coverage:.3f} crashes={s.crashes}'
            + (' restart' if s.adaptive_fired else '')
        )
