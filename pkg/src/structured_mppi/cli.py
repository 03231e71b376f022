"""Command-line front end: ``run``, ``bench`` and ``plot``.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
Flags override values from ``--config``, which override built-in defaults.
``MPPI_THREADS`` caps rollout parallelism (0 = one thread per CPU).
"""
from __future__ import annotations

import argparse
import csv
import sys
from importlib import resources

from . import bench, plot
from .config import (
    METHOD_KEYS,
    TASK_KEYS,
    ConfigError,
    ExperimentFile,
    apply_overrides,
    build_method,
    build_task,
    parse_task_kind,
)
from .mppi import thread_count
from .samplers import KIND_ALIASES

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2
TASK_CHOICES = ("flat", "stairs", "big-box")


def packaged_config_path():
    return resources.files("structured_mppi") / "configs" / "paper_repro.ini"


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="experiment INI file")
    p.add_argument("--sampler", choices=list(KIND_ALIASES), help="sampling strategy")
    p.add_argument("--k", type=int, help="knots / control points / waypoints")
    p.add_argument("--rollouts", type=int, help="rollouts per MPPI iteration (N)")
    p.add_argument("--horizon", type=int, help="planning horizon in steps (H)")
    p.add_argument("--lambda", dest="lam", type=float, help="softmax temperature")
    p.add_argument("--sigma", help="noise std, one value or a comma list per action dim")
    p.add_argument("--seed", type=int, help="trial seed (bench: base seed)")
    p.add_argument("--max-steps", type=int, help="episode step cap")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="structured-mppi",
        description="MPPI with structured control sampling on point-mass locomotion analogs.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="{run,bench,plot}")

    run = sub.add_parser("run", help="run one closed-loop trial, print its CSV row")
    run.add_argument("--task", choices=TASK_CHOICES, default="flat")
    _add_common(run)

    bench_p = sub.add_parser("bench", help="run a full experiment sweep, write CSV files")
    _add_common(bench_p)
    bench_p.add_argument("--trials", type=int, help="trials per (task, method) cell")
    bench_p.add_argument("--out", help="output path prefix for the CSV files")
    bench_p.add_argument("--quiet", action="store_true", help="no per-trial progress on stderr")

    plot_p = sub.add_parser("plot", help="SVG bar charts from a summary CSV")
    plot_p.add_argument("summary", help="<prefix>.summary.csv written by bench")
    plot_p.add_argument("--out", default=".", help="output directory for SVG files")
    return parser


def _overrides(args) -> dict:
    return {
        "sampler": args.sampler,
        "k": args.k,
        "rollouts": args.rollouts,
        "horizon": args.horizon,
        "lambda": args.lam,
        "sigma": args.sigma,
        "seed": args.seed,
        "max_steps": args.max_steps,
        "trials": getattr(args, "trials", None),
        "out": getattr(args, "out", None),
    }


def _read_config(path) -> ExperimentFile:
    return ExperimentFile.read(path if path else packaged_config_path())


def cmd_run(args, out=None) -> int:
    out = out or sys.stdout
    over = _overrides(args)
    over["sampler"] = over["sampler"] or "cubic-spline"
    spec = apply_overrides(_read_config(args.config), **over)
    exp = spec.experiment
    task_values = {k: v for k, v in exp.items() if k in TASK_KEYS}
    for _, values in spec.tasks:
        if parse_task_kind(values.get("kind", "")) == parse_task_kind(args.task):
            task_values.update(values)
            break
    task_values["kind"] = args.task
    if args.max_steps is not None:
        task_values["max_steps"] = str(args.max_steps)
    try:
        task = build_task(task_values)
        method = build_method({k: v for k, v in exp.items() if k in METHOD_KEYS}, task.bounds)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    seed = args.seed if args.seed is not None else int(exp.get("base_seed", 0))
    label = f"{over['sampler']}-k{method.sampler.knot_count}"
    rec = bench.run_trial(task, method, seed, task_label=args.task, method_label=label)
    writer = csv.DictWriter(out, bench.TRIAL_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerow(rec.row())
    return EXIT_OK


def cmd_bench(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    spec = apply_overrides(_read_config(args.config), **_overrides(args))
    config = spec.build()

    def progress(rec):
        if not args.quiet:
            status = "ok  " if rec.success else "fail"
            print(f"[{status}] {rec.task:<10} {rec.method:<18} trial {rec.trial} "
                  f"seed {rec.seed} steps {rec.steps}", file=err)

    records = bench.run_experiment(config, progress=progress)
    summaries = bench.aggregate(records)
    trials_path, summary_path = bench.write_csv(summaries, records, config.output_path)
    print(bench.format_table(summaries), file=out)
    print(f"wrote {trials_path} and {summary_path}", file=out)
    return EXIT_OK


def cmd_plot(args, out=None) -> int:
    out = out or sys.stdout
    try:
        paths = plot.write_plots(args.summary, args.out)
    except OSError as exc:
        raise ConfigError(f"cannot read summary {args.summary}: {exc}") from exc
    except plot.SummaryFormatError as exc:
        raise ConfigError(str(exc)) from exc
    for p in paths:
        print(p, file=out)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "bench": cmd_bench, "plot": cmd_plot}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        thread_count()
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"structured-mppi {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # Invalid values that slipped past argparse (e.g. MPPI_THREADS, bounds).
        print(f"structured-mppi {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"structured-mppi {args.command}: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
