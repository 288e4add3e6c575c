"""Deterministic finite-state stand-in for an app under test.

Every test case starts from the initial state. A (state, event) pair either
follows a transition (covering its blocks), hits a crash rule (recording the
signature and ending the case), or is an inert self-loop.
"""

import json
from collections.abc import Sequence
from concurrent.futures import Executor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ModelParseError, PreconditionError
from .genotype import TestSuite
from .hparams import GeneratorParams
from .moea import FitnessTriple
from .utils import Role, atomic_write_text, sub_stream

StateEvent = tuple[int, int]


@dataclass(frozen=True)
class Transition:
    target: int
    blocks: frozenset[int]


@dataclass(frozen=True)
class AppModel:
    alphabet_size: int
    initial_state: int
    states: tuple[int, ...]
    transitions: dict[StateEvent, Transition] = field(hash=False)
    crash_rules: dict[StateEvent, int] = field(hash=False)
    total_blocks: int


@dataclass(frozen=True)
class CaseCrash:
    signature: int
    index: int


@dataclass(frozen=True)
class EvaluationResult:
    fitness: FitnessTriple
    crash_signatures: frozenset[int]
    covered_blocks: frozenset[int]
    per_case_crash: tuple[CaseCrash | None, ...]


@dataclass(frozen=True)
class Individual:
    suite: TestSuite
    result: EvaluationResult

    @property
    def fitness(self) -> FitnessTriple:
        return self.result.fitness


def _run_case(case: Sequence[int], model: AppModel) -> tuple[set[int], CaseCrash | None]:
    state = model.initial_state
    covered: set[int] = set()
    for index, event in enumerate(case):
        key = (state, event)
        signature = model.crash_rules.get(key)
        if signature is not None:
            return covered, CaseCrash(signature, index)
        transition = model.transitions.get(key)
        if transition is not None:
            state = transition.target
            covered |= transition.blocks
    return covered, None


def evaluate(t: TestSuite, model: AppModel, length_aggregate: str = 'sum') -> EvaluationResult:
    covered: set[int] = set()
    signatures: set[int] = set()
    crashes: list[CaseCrash | None] = []
    for case in t.cases:
        if any(not 0 <= e < model.alphabet_size for e in case):
            raise PreconditionError(f'event outside alphabet of size {model.alphabet_size}')
        case_blocks, crash = _run_case(case, model)
        covered |= case_blocks
        if crash is not None:
            signatures.add(crash.signature)
        crashes.append(crash)

    length: float = t.total_length
    if length_aggregate == 'mean':
        length = t.total_length / t.size
    fitness = FitnessTriple(len(signatures), len(covered) / model.total_blocks, length)
    return EvaluationResult(fitness, frozenset(signatures), frozenset(covered), tuple(crashes))


def _evaluate_args(args):
    return evaluate(*args)


def evaluate_all(
    suites: Sequence[TestSuite],
    model: AppModel,
    length_aggregate: str = 'sum',
    executor: Executor | None = None,
) -> list[Individual]:
    """Evaluate a batch; results keep input order whatever executor runs them."""
    if executor is not None and len(suites) > 1:
        jobs = [(suite, model, length_aggregate) for suite in suites]
        results = list(executor.map(_evaluate_args, jobs))
    else:
        results = [evaluate(suite, model, length_aggregate) for suite in suites]
    return [Individual(suite, result) for suite, result in zip(suites, results, strict=True)]


def generate_model(seed: int, params: GeneratorParams) -> AppModel:
    """Random model where every state is reachable from state 0.

    A random spanning tree guarantees reachability; the remaining transition
    slots get random targets, and crash rules go to slots without a transition.
    """
    rng = sub_stream(seed, 0, Role.MODEL)
    n, k = params.n_states, params.alphabet_size

    events = {s: [int(e) for e in rng.permutation(k)[: params.branching]] for s in range(n)}
    used = {s: 0 for s in range(n)}
    targets: dict[StateEvent, int] = {}
    for child in range(1, n):
        open_parents = [s for s in range(child) if used[s] < params.branching]
        parent = open_parents[int(rng.integers(len(open_parents)))]
        targets[(parent, events[parent][used[parent]])] = child
        used[parent] += 1
    for s in range(n):
        for e in events[s][used[s] :]:
            targets[(s, e)] = int(rng.integers(n))

    keys = sorted(targets)
    blocks: dict[StateEvent, set[int]] = {key: set() for key in keys}
    # spread every block over some transition first
    for block in rng.permutation(params.total_blocks):
        blocks[keys[int(rng.integers(len(keys)))]].add(int(block))
    for key in keys:
        extra = int(rng.integers(0, params.max_blocks_per_transition, endpoint=True))
        blocks[key].update(int(b) for b in rng.integers(params.total_blocks, size=extra))

    free = [(s, e) for s in range(n) for e in range(k) if (s, e) not in targets]
    picked = []
    if params.n_crash_rules:
        chosen = rng.choice(len(free), params.n_crash_rules, replace=False)
        picked = sorted(free[int(i)] for i in chosen)
    crash_rules = {key: signature for signature, key in enumerate(picked)}

    transitions = {key: Transition(targets[key], frozenset(blocks[key])) for key in keys}
    return AppModel(k, 0, tuple(range(n)), transitions, crash_rules, params.total_blocks)


def model_summary(model: AppModel) -> str:
    return (
        f'states={len(model.states)} alphabet={model.alphabet_size} '
        f'transitions={len(model.transitions)} crash_rules={len(model.crash_rules)} '
        f'blocks={model.total_blocks}'
    )


def model_to_dict(model: AppModel) -> dict:
    return {
        'alphabet_size': model.alphabet_size,
        'initial_state': model.initial_state,
        'states': list(model.states),
        'transitions': [
            {'from': s, 'event': e, 'to': t.target, 'blocks': sorted(t.blocks)}
            for (s, e), t in sorted(model.transitions.items())
        ],
        'crash_rules': [
            {'state': s, 'event': e, 'signature': sig}
            for (s, e), sig in sorted(model.crash_rules.items())
        ],
        'total_blocks': model.total_blocks,
    }


def _require(data: dict, key: str, where: str = ''):
    if not isinstance(data, dict) or key not in data:
        raise ModelParseError(f'{where}{key}', 'missing field')
    return data[key]


def _require_int(data: dict, key: str, where: str = '', minimum: int = 0) -> int:
    value = _require(data, key, where)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ModelParseError(f'{where}{key}', f'expected integer >= {minimum}, got {value!r}')
    return value


def _require_list(data: dict, key: str) -> list:
    value = _require(data, key)
    if not isinstance(value, list):
        raise ModelParseError(key, 'expected a list')
    return value


def model_from_dict(data: dict) -> AppModel:
    alphabet_size = _require_int(data, 'alphabet_size', minimum=1)
    total_blocks = _require_int(data, 'total_blocks', minimum=1)
    initial_state = _require_int(data, 'initial_state')
    raw_states = _require(data, 'states')
    if not isinstance(raw_states, list) or not all(isinstance(s, int) for s in raw_states):
        raise ModelParseError('states', 'expected a list of integers')
    states = tuple(raw_states)
    known = set(states)
    if len(known) != len(states):
        raise ModelParseError('states', 'duplicate state id')
    if initial_state not in known:
        raise ModelParseError('initial_state', f'{initial_state} is not a listed state')

    def check_key(entry: dict, state_field: str, where: str) -> StateEvent:
        state = _require_int(entry, state_field, where)
        event = _require_int(entry, 'event', where)
        if state not in known:
            raise ModelParseError(f'{where}{state_field}', f'unknown state {state}')
        if event >= alphabet_size:
            raise ModelParseError(f'{where}event', f'{event} >= alphabet_size {alphabet_size}')
        return state, event

    transitions: dict[StateEvent, Transition] = {}
    for i, entry in enumerate(_require_list(data, 'transitions')):
        where = f'transitions[{i}].'
        key = check_key(entry, 'from', where)
        target = _require_int(entry, 'to', where)
        if target not in known:
            raise ModelParseError(f'{where}to', f'unknown state {target}')
        block_list = _require(entry, 'blocks', where)
        if not isinstance(block_list, list):
            raise ModelParseError(f'{where}blocks', 'expected a list')
        for block in block_list:
            if not isinstance(block, int) or not 0 <= block < total_blocks:
                raise ModelParseError(
                    f'{where}blocks', f'block {block!r} outside [0, {total_blocks})'
                )
        if key in transitions:
            raise ModelParseError(f'{where}from', f'duplicate transition for {key}')
        transitions[key] = Transition(target, frozenset(block_list))

    crash_rules: dict[StateEvent, int] = {}
    for i, entry in enumerate(_require_list(data, 'crash_rules')):
        where = f'crash_rules[{i}].'
        key = check_key(entry, 'state', where)
        signature = _require_int(entry, 'signature', where)
        if key in transitions:
            raise ModelParseError(f'{where}state', f'{key} also has a transition')
        if key in crash_rules:
            raise ModelParseError(f'{where}state', f'duplicate crash rule for {key}')
        crash_rules[key] = signature

    return AppModel(alphabet_size, initial_state, states, transitions, crash_rules, total_blocks)


def save_model(model: AppModel, path: Path):
    atomic_write_text(Path(path), json.dumps(model_to_dict(model), indent=2) + '\n')


def load_model(path: Path) -> AppModel:
    with open(path, encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ModelParseError('<file>', f'invalid JSON: {e}') from e
    if not isinstance(data, dict):
        raise ModelParseError('<file>', 'expected a JSON object')
    return model_from_dict(data)
