"""Command-line entry point.

Subcommands: generate-model, run, compare, landscape. Exit codes: 0 success,
2 usage or input error, 1 internal error.
"""

import argparse
import statistics
import sys
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import engines
from .appmodel import generate_model, load_model, model_summary, save_model
from .errors import DivgenError, InputError
from .hparams import MODES, GeneratorParams, SearchConfig
from .landscape import LANDSCAPE_COLUMNS
from .record import RunRecord, load_run, save_run
from .stats import (
    COMPARISON_COLUMNS,
    ComparisonRow,
    adjusted_generations,
    compare,
    min_crash_sequence_length,
    overhead_percent,
    summarize,
)
from .utils import derive_seed, log_error, log_info, write_csv

# name, larger_is_better
CONCERNS = (
    ('duration', False),
    ('coverage', True),
    ('crashes', True),
    ('min_crash_length', False),
)


@dataclass(frozen=True)
class ExperimentSpec:
    models: tuple[Path, ...]
    modes: tuple[str, ...]
    repetitions: int
    base_seed: int
    config: SearchConfig
    out_dir: Path
    workers: int = 1

    def __post_init__(self):
        if self.repetitions < 1:
            raise InputError(f'repetitions must be >= 1, got {self.repetitions}')

    def jobs(self) -> list[tuple[Path, str, int, SearchConfig]]:
        jobs = []
        for model_path in self.models:
            model_id = Path(model_path).stem
            for mode in self.modes:
                for rep in range(self.repetitions):
                    seed = derive_seed(self.base_seed, model_id, mode, rep)
                    config = self.config.with_overrides(mode=mode, seed=seed)
                    jobs.append((model_path, mode, rep, config))
        return jobs


def _cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _run_job(job: tuple[Path, str, int, SearchConfig], out_dir: Path, workers: int) -> Path:
    model_path, _, rep, config = job
    model = load_model(model_path)
    record = engines.run(config, model, Path(model_path).stem, workers)
    run_path, _ = save_run(record, out_dir, rep)
    return run_path


def run_experiment(spec: ExperimentSpec) -> list[Path]:
    jobs = spec.jobs()
    for model_path in spec.models:
        if not Path(model_path).is_file():
            raise InputError(f'model file not found: {model_path}')
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as executor:
            futures = [executor.submit(_run_job, job, spec.out_dir, 1) for job in jobs]
            paths = [future.result() for future in futures]
    else:
        paths = [_run_job(job, spec.out_dir, spec.workers) for job in jobs]
    for path in paths:
        log_info(f'wrote {path}')
    return paths


def _rep_index(path: Path) -> int:
    tail = path.stem.rsplit('_', 1)[-1]
    return int(tail) if tail.isdigit() else 0


def _collect(directories: Sequence[Path]) -> list[tuple[int, str, RunRecord]]:
    entries = []
    for directory in directories:
        if not Path(directory).is_dir():
            raise InputError(f'not a directory: {directory}')
        for path in Path(directory).glob('run_*.json'):
            entries.append((_rep_index(path), path.name, load_run(path)))
    return sorted(entries, key=lambda e: (e[0], e[1]))


def load_runs(directories: Sequence[Path], mode: str | None = None) -> dict[str, list[RunRecord]]:
    """Run records grouped by model id, ordered by repetition."""
    grouped: dict[str, list[RunRecord]] = {}
    for *_, record in _collect(directories):
        if mode is None or record.mode == mode:
            grouped.setdefault(record.model_id, []).append(record)
    return dict(sorted(grouped.items()))


def load_runs_by_mode(directories: Sequence[Path]) -> dict[tuple[str, str], list[RunRecord]]:
    grouped: dict[tuple[str, str], list[RunRecord]] = {}
    for *_, record in _collect(directories):
        grouped.setdefault((record.model_id, record.mode), []).append(record)
    return dict(sorted(grouped.items()))


def _concern_values(records: list[RunRecord], concern: str, generation: int) -> list[float]:
    values: list[float] = []
    for record in records:
        if concern == 'duration':
            values.append(record.duration)
        elif concern == 'coverage':
            values.append(record.snapshots[generation].coverage)
        elif concern == 'crashes':
            values.append(record.snapshots[generation].crashes)
        else:
            length = min_crash_sequence_length(record, generation)
            if length is not None:
                values.append(length)
    return values


def _comparison_csv_row(subject: str, gen_a: int, gen_b: int, row: ComparisonRow | None) -> dict:
    out = {name: '' for name in COMPARISON_COLUMNS}
    out.update(subject=subject, gen_a=gen_a, gen_b=gen_b)
    if row is not None:
        for name in COMPARISON_COLUMNS:
            if name not in ('subject', 'gen_a', 'gen_b'):
                out[name] = _cell(getattr(row, name))
    return out


def compare_runs(
    control: dict[str, list[RunRecord]], treatment: dict[str, list[RunRecord]], out_dir: Path
) -> dict[str, list[tuple[str, ComparisonRow | None]]]:
    """Compare treatment (side a) against control (side b) per model and concern.

    The treatment's coverage, crash and crash-length results are read at the
    generation its runtime overhead would have allowed under the control's budget.
    """
    if set(control) != set(treatment):
        only_control = sorted(set(control) - set(treatment))
        only_treatment = sorted(set(treatment) - set(control))
        raise InputError(
            f'model sets differ: only in control {only_control}, only in treatment {only_treatment}'
        )
    if not control:
        raise InputError('no run artifacts found')

    results: dict[str, list[tuple[str, ComparisonRow | None]]] = {c: [] for c, _ in CONCERNS}
    csv_rows: dict[str, list[dict]] = {c: [] for c, _ in CONCERNS}
    for model_id in sorted(control):
        runs_b, runs_a = control[model_id], treatment[model_id]
        gen_b = min(len(r.snapshots) for r in runs_b) - 1
        full_a = min(len(r.snapshots) for r in runs_a) - 1
        overhead = overhead_percent(
            statistics.median(r.duration for r in runs_b),
            statistics.median(r.duration for r in runs_a),
        )
        gen_a = adjusted_generations(full_a, overhead) if overhead > 0 else full_a
        log_info(f'{model_id}: overhead {overhead:.2f}%, treatment read at gen {gen_a}/{full_a}')

        for concern, larger_is_better in CONCERNS:
            g_a, g_b = (full_a, gen_b) if concern == 'duration' else (gen_a, gen_b)
            values_a = _concern_values(runs_a, concern, g_a)
            values_b = _concern_values(runs_b, concern, g_b)
            row = compare(values_a, values_b, larger_is_better) if values_a and values_b else None
            results[concern].append((model_id, row))
            csv_rows[concern].append(_comparison_csv_row(model_id, g_a, g_b, row))

    summary_rows = []
    for concern, _ in CONCERNS:
        write_csv(Path(out_dir) / f'compare_{concern}.csv', COMPARISON_COLUMNS, csv_rows[concern])
        counts = summarize(row for _, row in results[concern] if row is not None)
        summary_rows.append({'concern': concern, **counts})
    write_csv(
        Path(out_dir) / 'summary.csv', ('concern', 'better', 'worse', 'no_difference'), summary_rows
    )
    return results


def format_table(results: dict[str, list[tuple[str, ComparisonRow | None]]]) -> str:
    lines = [
        f'{"concern":<17}{"subject":<20}{"mean_a":>10}{"mean_b":>10}{"p":>9}{"a12":>7}  effect'
    ]
    for concern, rows in results.items():
        for subject, row in rows:
            if row is None:
                lines.append(f'{concern:<17}{subject:<20}{"--":>10}{"--":>10}{"--":>9}{"--":>7}')
                continue
            mark = '*' if row.significant else ' '
            lines.append(
                f'{concern:<17}{subject:<20}{row.mean_a:>10.3f}{row.mean_b:>10.3f}'
                f'{row.p_value:>8.4f}{mark}{row.a12:>7.3f}  {row.effect_class} ({row.direction})'
            )
    return '\n'.join(lines)


def export_landscape(
    grouped: dict[tuple[str, str], list[RunRecord]], out_dir: Path
) -> list[Path]:
    """Raw per-repetition and repetition-averaged metric series."""
    if not grouped:
        raise InputError('no run artifacts found')
    written = []
    metrics = LANDSCAPE_COLUMNS[1:]
    for (model_id, mode), records in sorted(grouped.items()):
        for rep, record in enumerate(records):
            path = Path(out_dir) / f'landscape_{model_id}_{mode}_rep{rep}.csv'
            rows = [{c: _cell(getattr(s, c)) for c in LANDSCAPE_COLUMNS} for s in record.snapshots]
            write_csv(path, LANDSCAPE_COLUMNS, rows)
            written.append(path)

        n_generations = min(len(r.snapshots) for r in records)
        averaged = []
        for g in range(n_generations):
            row = {'generation': str(g)}
            for metric in metrics:
                values = [float(getattr(r.snapshots[g], metric)) for r in records]
                row[metric] = repr(sum(values) / len(values))
            averaged.append(row)
        path = Path(out_dir) / f'landscape_{model_id}_{mode}.csv'
        write_csv(path, LANDSCAPE_COLUMNS, averaged)
        written.append(path)
    return written


def cmd_generate_model(args: argparse.Namespace) -> int:
    params = GeneratorParams(
        n_states=args.states,
        alphabet_size=args.alphabet,
        total_blocks=args.blocks,
        n_crash_rules=args.crash_rules,
        branching=min(4, args.alphabet) if args.branching is None else args.branching,
        max_blocks_per_transition=args.max_blocks,
    )
    model = generate_model(args.seed, params)
    save_model(model, args.out)
    print(f'{args.out}: {model_summary(model)}')
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    config = SearchConfig.from_json(args.config) if args.config else SearchConfig()
    if args.generations is not None:
        config = config.with_overrides(g_max=args.generations)
    spec = ExperimentSpec(
        models=tuple(args.model),
        modes=tuple(dict.fromkeys(args.mode or ['baseline'])),
        repetitions=args.reps,
        base_seed=args.seed,
        config=config,
        out_dir=args.out,
        workers=args.workers,
    )
    run_experiment(spec)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    control = load_runs([args.control], args.control_mode)
    treatment = load_runs([args.treatment], args.treatment_mode)
    results = compare_runs(control, treatment, args.out)
    print(format_table(results))
    return 0


def cmd_landscape(args: argparse.Namespace) -> int:
    for path in export_landscape(load_runs_by_mode(args.runs), args.out):
        log_info(f'wrote {path}')
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='divgen', description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest='command', required=True)

    gen = sub.add_parser('generate-model', help='Write a random app model')
    gen.add_argument('--seed', type=int, default=0)
    gen.add_argument('--states', type=int, default=30)
    gen.add_argument('--alphabet', type=int, default=12)
    gen.add_argument('--blocks', type=int, default=200)
    gen.add_argument('--crash-rules', type=int, default=8)
    gen.add_argument('--branching', type=int, default=None, help='Defaults to min(4, alphabet)')
    gen.add_argument('--max-blocks', type=int, default=3)
    gen.add_argument('-o', '--out', type=Path, required=True)
    gen.set_defaults(func=cmd_generate_model)

    run = sub.add_parser('run', help='Run repeated searches')
    run.add_argument('--model', type=Path, action='append', required=True)
    run.add_argument('--mode', choices=MODES, action='append')
    run.add_argument('--reps', type=int, default=1)
    run.add_argument('--generations', type=int, default=None)
    run.add_argument('--seed', type=int, default=0)
    run.add_argument('--config', type=Path, default=None, help='JSON of SearchConfig fields')
    run.add_argument('--workers', type=int, default=1)
    run.add_argument('-o', '--out', type=Path, required=True)
    run.set_defaults(func=cmd_run)

    cmp = sub.add_parser('compare', help='Compare treatment runs against control runs')
    cmp.add_argument('control', type=Path)
    cmp.add_argument('treatment', type=Path)
    cmp.add_argument('--control-mode', choices=MODES, default=None)
    cmp.add_argument('--treatment-mode', choices=MODES, default=None)
    cmp.add_argument('-o', '--out', type=Path, required=True)
    cmp.set_defaults(func=cmd_compare)

    land = sub.add_parser('landscape', help='Export landscape metric series')
    land.add_argument('runs', type=Path, nargs='+')
    land.add_argument('-o', '--out', type=Path, required=True)
    land.set_defaults(func=cmd_landscape)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DivgenError, OSError) as e:
        print(f'divgen {args.command}: {e}', file=sys.stderr)
        return 2
    except Exception:  # pylint: disable=broad-exception-caught
        log_error(f'divgen {args.command} failed', exc_info=True)
        return 1


if __name__ == '__main__':
    sys.exit(main())
