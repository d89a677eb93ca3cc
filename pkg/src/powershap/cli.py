"""Command-line surface.

Subcommands:
  select    feature selection on a CSV file, JSON report out
  simulate  recovery benchmark grid on generated data, CSV out
  power     required-iterations query for (alpha, power, effect size)

Exit codes: 0 success, 2 input/validation error, 1 internal error.
POWERSHAP_THREADS caps simulate-grid parallelism (0 or unset = auto);
results are assembled in deterministic (m, k, repeat) order regardless.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time

import numpy as np

from .datagen import SimSpec, make_dataset
from .domain import Mode, PowershapConfig, PValueStyle, Task, validate_dataset
from .errors import PowershapError, ValidationError
from .models import LearnerKind, LearnerSpec
from .report import build_report, render_json
from .selection import run_selection
from .stats import PowerQuery, solve_required_iterations

_TASKS = {"classification": Task.BINARY_CLASSIFICATION, "regression": Task.REGRESSION}
_MODES = {"fixed": Mode.FIXED, "automatic": Mode.AUTOMATIC, "convergence": Mode.CONVERGENCE}
_STYLES = {
    "anticonservative": PValueStyle.ANTICONSERVATIVE,
    "north-corrected": PValueStyle.NORTH_CORRECTED,
}
_LEARNERS = {"gbt": LearnerKind.GRADIENT_BOOSTED_TREES, "linear": LearnerKind.LINEAR}


class CliInputError(Exception):
    """Bad file or flag content; maps to exit code 2."""


def load_csv(path: str, target_column: str) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Parse a comma-separated, '.'-decimal CSV with a mandatory header.

    Every non-target column is a numeric feature. Errors cite the
    offending 1-based line number.
    """
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise CliInputError(f"cannot open {path}: {exc.strerror}") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CliInputError(f"{path}: empty file, header row required") from None
        header = [h.strip() for h in header]
        if target_column not in header:
            raise CliInputError(
                f"{path}: target column {target_column!r} not in header {header}"
            )
        target_pos = header.index(target_column)
        feature_names = [h for i, h in enumerate(header) if i != target_pos]

        features: list[list[float]] = []
        target: list[float] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CliInputError(
                    f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            parsed = []
            for pos, cell in enumerate(row):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise CliInputError(
                        f"{path}: line {lineno}: could not parse {cell.strip()!r} "
                        f"in column {header[pos]!r} as a number"
                    ) from None
            target.append(parsed.pop(target_pos))
            features.append(parsed)
    return np.asarray(features), np.asarray(target), feature_names


def _add_learner_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--learner", choices=sorted(_LEARNERS), default="gbt")
    parser.add_argument("--n-estimators", type=int, default=100)
    parser.add_argument("--max-depth", type=int, default=4)
    parser.add_argument("--learning-rate", type=float, default=0.1)
    parser.add_argument("--min-samples-leaf", type=int, default=5)
    parser.add_argument("--leaf-l2", type=float, default=3.0)
    parser.add_argument("--split-noise", type=float, default=1.0)
    parser.add_argument("--l2-penalty", type=float, default=1e-6)


def _add_selection_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=0.01)
    parser.add_argument("--power", type=float, default=0.99, dest="required_power")
    parser.add_argument("--initial-iterations", type=int, default=10)
    parser.add_argument("--max-iterations", type=int, default=100)
    parser.add_argument("--val-fraction", type=float, default=0.2)
    parser.add_argument("--seed", type=int, default=0)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powershap",
        description="Shapley-value feature selection against a random probe.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sel = sub.add_parser("select", help="select features from a CSV dataset")
    p_sel.add_argument("--csv", required=True, help="input CSV with header row")
    p_sel.add_argument("--target", required=True, help="name of the target column")
    p_sel.add_argument("--task", choices=sorted(_TASKS), required=True)
    p_sel.add_argument("--mode", choices=sorted(_MODES), default="automatic")
    p_sel.add_argument(
        "--iterations", type=int, default=10, help="iteration count for fixed mode"
    )
    p_sel.add_argument("--p-value-style", choices=sorted(_STYLES), default="anticonservative")
    p_sel.add_argument("--out", help="write the JSON report here instead of stdout")
    _add_selection_flags(p_sel)
    _add_learner_flags(p_sel)

    p_sim = sub.add_parser("simulate", help="recovery benchmark on generated datasets")
    p_sim.add_argument("--features", default="20", help="comma list of total feature counts")
    p_sim.add_argument("--ratios", default="0.1", help="comma list of informative ratios")
    p_sim.add_argument("--repeats", type=int, default=5)
    p_sim.add_argument("--samples", type=int, default=5000)
    p_sim.add_argument("--task", choices=sorted(_TASKS), default="classification")
    p_sim.add_argument("--class-sep", type=float, default=1.0)
    p_sim.add_argument("--out", help="write the CSV grid here instead of stdout")
    _add_selection_flags(p_sim)
    _add_learner_flags(p_sim)

    p_pow = sub.add_parser("power", help="required iterations for a power target")
    p_pow.add_argument("--alpha", type=float, default=0.01)
    p_pow.add_argument("--power", type=float, default=0.99, dest="required_power")
    p_pow.add_argument("--effect-size", type=float, required=True)

    return parser


def _learner_from_args(args) -> LearnerSpec:
    return LearnerSpec(
        kind=_LEARNERS[args.learner],
        n_estimators=args.n_estimators,
        max_depth=args.max_depth,
        learning_rate=args.learning_rate,
        min_samples_leaf=args.min_samples_leaf,
        leaf_l2=args.leaf_l2,
        split_noise=args.split_noise,
        l2_penalty=args.l2_penalty,
    )


def _config_from_args(args, mode: Mode) -> PowershapConfig:
    return PowershapConfig(
        alpha=args.alpha,
        required_power=args.required_power,
        initial_iterations=args.initial_iterations,
        max_iterations=args.max_iterations,
        fixed_iterations=getattr(args, "iterations", 10),
        val_fraction=args.val_fraction,
        base_seed=args.seed,
        mode=mode,
        p_value_style=_STYLES[getattr(args, "p_value_style", "anticonservative")],
    )


def _write_out(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_select(args) -> int:
    raw = load_csv(args.csv, args.target)
    features, target, names = raw
    data = validate_dataset(features, target, names, _TASKS[args.task])
    learner = _learner_from_args(args)
    config = _config_from_args(args, _MODES[args.mode])

    start = time.perf_counter()
    result = run_selection(data, learner, config)
    wall = time.perf_counter() - start

    config_echo = {
        "mode": args.mode,
        "alpha": config.alpha,
        "required_power": config.required_power,
        "initial_iterations": config.initial_iterations,
        "max_iterations": config.max_iterations,
        "fixed_iterations": config.fixed_iterations,
        "val_fraction": config.val_fraction,
        "p_value_style": config.p_value_style.value,
        "learner": {
            "kind": args.learner,
            "n_estimators": learner.n_estimators,
            "max_depth": learner.max_depth,
            "learning_rate": learner.learning_rate,
            "min_samples_leaf": learner.min_samples_leaf,
            "leaf_l2": learner.leaf_l2,
            "split_noise": learner.split_noise,
            "l2_penalty": learner.l2_penalty,
        },
    }
    report = build_report(
        result,
        config_echo=config_echo,
        task=args.task,
        seed=args.seed,
        wall_time_s=wall,
    )
    _write_out(render_json(report), args.out)
    return 0


def _parse_grid_list(text: str, cast, flag: str) -> list:
    try:
        values = [cast(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise CliInputError(f"could not parse --{flag} value {text!r}") from None
    if not values:
        raise CliInputError(f"--{flag} must list at least one value")
    return values


def _simulate_cell(payload) -> tuple:
    (m, k, rep, cell_seed, samples, task_name, class_sep, learner, config_kwargs) = payload
    spec = SimSpec(
        n_samples=samples,
        n_features=m,
        n_informative=k,
        class_sep=class_sep,
        task=_TASKS[task_name],
        seed=cell_seed,
    )
    data, mask = make_dataset(spec)
    config = PowershapConfig(base_seed=cell_seed, mode=Mode.AUTOMATIC, **config_kwargs)
    start = time.perf_counter()
    result = run_selection(data, learner, config)
    duration = time.perf_counter() - start

    informative = {name for name, is_inf in zip(data.feature_names, mask) if is_inf}
    hit = sum(1 for name in result.selected if name in informative)
    noise = len(result.selected) - hit
    recovered_pct = 100.0 * hit / k
    return (m, k, rep, recovered_pct, noise, duration)


def _cmd_simulate(args) -> int:
    feature_counts = _parse_grid_list(args.features, int, "features")
    ratios = _parse_grid_list(args.ratios, float, "ratios")
    if args.repeats < 1:
        raise CliInputError("--repeats must be >= 1")
    learner = _learner_from_args(args)
    config_kwargs = {
        "alpha": args.alpha,
        "required_power": args.required_power,
        "initial_iterations": args.initial_iterations,
        "max_iterations": args.max_iterations,
        "val_fraction": args.val_fraction,
    }

    cells = []
    index = 0
    for m in feature_counts:
        for ratio in ratios:
            k = max(1, round(ratio * m))
            k = min(k, m)
            for rep in range(args.repeats):
                cell_seed = args.seed + 104729 * index
                cells.append(
                    (m, k, rep, cell_seed, args.samples, args.task, args.class_sep,
                     learner, config_kwargs)
                )
                index += 1

    threads = int(os.environ.get("POWERSHAP_THREADS", "0") or "0")
    if threads == 0:
        threads = os.cpu_count() or 1
    if threads > 1 and len(cells) > 1:
        import multiprocessing as mp

        with mp.get_context("spawn").Pool(min(threads, len(cells))) as pool:
            rows = pool.map(_simulate_cell, cells)
    else:
        rows = [_simulate_cell(cell) for cell in cells]
    rows.sort(key=lambda row: (row[0], row[1], row[2]))

    lines = ["m,k,repeat,recovered_informative_pct,selected_noise_count,duration_s"]
    for m, k, rep, pct, noise, duration in rows:
        lines.append(f"{m},{k},{rep},{pct:.6f},{noise},{duration:.3f}")
    _write_out("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_power(args) -> int:
    if not math.isfinite(args.effect_size):
        raise CliInputError("--effect-size must be finite")
    required = solve_required_iterations(
        PowerQuery(
            alpha=args.alpha,
            target_power=args.required_power,
            effect_size=args.effect_size,
        )
    )
    if math.isinf(required):
        print("unattainable")
    else:
        print(int(math.ceil(required)))
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "select":
            return _cmd_select(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        return _cmd_power(args)
    except (CliInputError, ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PowershapError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
