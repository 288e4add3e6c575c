import numpy as np

from ..appmodel import Individual
from ..genotype import distance_matrix
from ..moea import nsga2_order
from ..utils import Role, log_debug
from .baseline import BaselineSearch, StepInfo
from .utils import calculate_diversity, duplicate_free_indices, most_distant_indices


class DivSearch(BaselineSearch):
    """NSGA-II extended by four diversity mechanisms.

    - diverse initialization: the size_pop most distant of size_init random suites
    - adaptive control: when the average diameter drops to div_limit times its
      initial value, the generation draws fresh random suites and keeps the
      most distant members of population and newcomers
    - duplicate elimination before environmental selection
    - diverse selection: n_div slots of the next population go to the most
      distant remaining solutions instead of the crowded-order best

    Each mechanism can be switched off through its config flag.
    """

    div_init: float = 0.0

    def initialize(self) -> list[Individual]:
        if not self.config.diverse_init:
            population = super().initialize()
        else:
            candidates = self.random_suites(self.config.size_init, Role.INIT)
            keep = most_distant_indices(distance_matrix(candidates), self.config.size_pop)
            population = self.evaluate([candidates[i] for i in keep])
        self.div_init = calculate_diversity([ind.suite for ind in population])
        return population

    def start_info(self, population: list[Individual]) -> StepInfo:
        return StepInfo(div_pop=self.div_init)

    def step(self, population: list[Individual]) -> tuple[list[Individual], StepInfo]:
        div_pop = calculate_diversity([ind.suite for ind in population])
        if self.config.adaptive_control and div_pop <= self.config.div_limit * self.div_init:
            log_debug(f'gen {self.generation}: diversity {div_pop:.1f} of {self.div_init:.1f}')
            fresh = self.evaluate(self.random_suites(self.config.size_off, Role.FRESH))
            pool = population + fresh
            keep = most_distant_indices(
                distance_matrix([ind.suite for ind in pool]), len(population)
            )
            return [pool[i] for i in keep], StepInfo(adaptive_fired=True, div_pop=div_pop)

        offspring = self.evaluate(self.make_offspring(population))
        population, shortfall = self.select(population, offspring)
        return population, StepInfo(dedup_shortfall=shortfall, div_pop=div_pop)

    def select(
        self, population: list[Individual], offspring: list[Individual]
    ) -> tuple[list[Individual], bool]:
        size_pop = self.config.size_pop
        pool = population + offspring
        matrix = distance_matrix([ind.suite for ind in pool])
        keep = duplicate_free_indices(matrix) if self.config.dedup else list(range(len(pool)))

        if len(keep) < size_pop:
            # not enough distinct solutions: re-admit duplicates in crowded order
            chosen = set(keep)
            order = nsga2_order([ind.fitness for ind in pool], len(pool))
            fill = [i for i in order if i not in chosen][: size_pop - len(keep)]
            return [pool[i] for i in keep + fill], True

        n_div = self.config.n_div if self.config.diverse_selection else 0
        order = nsga2_order([pool[i].fitness for i in keep], size_pop)
        elite = [keep[i] for i in order[: size_pop - n_div]]
        diverse: list[int] = []
        if n_div:
            taken = set(elite)
            rest = [i for i in keep if i not in taken]
            picked = most_distant_indices(matrix[np.ix_(rest, rest)], n_div)
            diverse = [rest[j] for j in picked]
        return [pool[i] for i in elite + diverse], False
