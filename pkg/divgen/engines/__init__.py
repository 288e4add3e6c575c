from ..appmodel import AppModel
from ..hparams import SearchConfig
from ..record import RunRecord
from .baseline import BaselineSearch
from .div import DivSearch
from .utils import calculate_diversity, remove_duplicates, select_most_distant

ENGINE_DICT = {
    'baseline': BaselineSearch,
    'div': DivSearch,
}


def get_engine_class(mode: str):
    return ENGINE_DICT[mode]


def run(
    config: SearchConfig, model: AppModel, model_id: str = 'model', workers: int = 1
) -> RunRecord:
    return get_engine_class(config.mode)(config, model, model_id).run(workers)


__all__ = [
    'BaselineSearch',
    'DivSearch',
    'calculate_diversity',
    'remove_duplicates',
    'run',
    'select_most_distant',
]
