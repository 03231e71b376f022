"""Multi-trial benchmark runs, aggregation and CSV output."""
from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import CRASHED, SUCCESS, Environment, TaskSpec
from .mppi import MppiConfig, MppiController
from .trajectory import clip_trajectory

TRIAL_FIELDS = ["task", "method", "trial", "seed", "success", "steps", "mean_iter_ms", "std_iter_ms"]
SUMMARY_FIELDS = ["task", "method", "success_pct", "steps_mean", "steps_std",
                  "time_mean_ms", "time_std_ms"]
SUMMARY_NOTE = "# steps_mean/steps_std include failed trials counted at max_steps"


@dataclass
class TrialRecord:
    task: str
    method: str
    trial: int
    seed: int
    success: bool
    steps: int
    mean_iter_ms: float
    std_iter_ms: float
    iter_ms: tuple = field(default=(), repr=False)
    outcome: str = ""
    no_viable_events: int = 0

    def row(self) -> dict:
        return {
            "task": self.task,
            "method": self.method,
            "trial": self.trial,
            "seed": self.seed,
            "success": int(self.success),
            "steps": self.steps,
            "mean_iter_ms": _fmt(self.mean_iter_ms),
            "std_iter_ms": _fmt(self.std_iter_ms),
        }


@dataclass(frozen=True)
class CellSummary:
    success_pct: float
    steps_mean: float
    steps_std: float
    time_mean_ms: float
    time_std_ms: float


@dataclass
class ExperimentConfig:
    tasks: list  # of (label, TaskSpec)
    methods: list  # of (label, MppiConfig)
    trials_per_cell: int = 5
    base_seed: int = 0
    seeds: list | None = None
    output_path: str = "results/bench"

    def __post_init__(self):
        if self.trials_per_cell < 1:
            raise ValueError("trials_per_cell must be >= 1")
        for kind, items in (("task", self.tasks), ("method", self.methods)):
            labels = [label for label, _ in items]
            if len(set(labels)) != len(labels):
                raise ValueError(f"{kind} labels must be unique: {labels}")
            if not labels:
                raise ValueError(f"experiment needs at least one {kind}")
        if self.seeds is not None and len(self.seeds) < self.trials_per_cell:
            raise ValueError(
                f"{len(self.seeds)} explicit seeds for {self.trials_per_cell} trials per cell"
            )

    def seed_for(self, trial: int) -> int:
        if self.seeds is not None:
            return int(self.seeds[trial])
        return self.base_seed + trial


def _std(values) -> float:
    return statistics.stdev(values) if len(values) > 1 else 0.0


def _fmt(x) -> str:
    return format(float(x), ".6g")


def run_trial(task: TaskSpec, method: MppiConfig, seed: int, *, task_label: str | None = None,
              method_label: str = "", trial: int = 0, threads: int | None = None) -> TrialRecord:
    """Run one closed-loop episode until success, crash or ``task.max_steps``.

    The nominal starts as the hover control repeated over the horizon.
    """
    env = Environment(task)
    ctrl = MppiController(method, env, seed=seed, threads=threads)
    state = env.reset()
    times = []
    for _ in range(task.max_steps):
        start = time.perf_counter()
        executed, _ = ctrl.step(state)
        times.append((time.perf_counter() - start) * 1e3)
        state = env.step(state, clip_trajectory(executed, method.bounds))
        if state.terminal:
            break
    success = state.status == SUCCESS
    return TrialRecord(
        task=task_label or task.kind,
        method=method_label,
        trial=trial,
        seed=seed,
        success=success,
        steps=state.step_count if success else task.max_steps,
        mean_iter_ms=float(np.mean(times)),
        std_iter_ms=_std(times),
        iter_ms=tuple(times),
        outcome=state.status if state.status in (SUCCESS, CRASHED) else "timeout",
        no_viable_events=ctrl.no_viable_events,
    )


def run_experiment(config: ExperimentConfig, threads: int | None = None, progress=None) -> list:
    """All trials in config order: task, then method, then trial index."""
    records = []
    for task_label, task in config.tasks:
        for method_label, method in config.methods:
            for trial in range(config.trials_per_cell):
                seed = config.seed_for(trial)
                try:
                    rec = run_trial(task, method, seed, task_label=task_label,
                                    method_label=method_label, trial=trial, threads=threads)
                except (ValueError, FloatingPointError) as exc:
                    # A broken cell is recorded as a failed trial, the sweep goes on.
                    rec = TrialRecord(task_label, method_label, trial, seed, False,
                                      task.max_steps, 0.0, 0.0, outcome=f"error: {exc}")
                records.append(rec)
                if progress is not None:
                    progress(rec)
    return records


def aggregate(records) -> dict:
    """Per-(task, method) summaries, in first-appearance order.

    Steps statistics cover every trial with failures counted at the step cap;
    time statistics pool all iterations of all trials.  Standard deviations use
    ``n - 1`` and are 0 for a single sample.
    """
    records = list(records)
    if not records:
        raise ValueError("aggregate needs at least one trial record")
    cells: dict = {}
    for rec in records:
        cells.setdefault((rec.task, rec.method), []).append(rec)
    out = {}
    for key, recs in cells.items():
        steps = [r.steps for r in recs]
        times = [t for r in recs for t in r.iter_ms] or [r.mean_iter_ms for r in recs]
        out[key] = CellSummary(
            success_pct=100.0 * sum(r.success for r in recs) / len(recs),
            steps_mean=float(np.mean(steps)),
            steps_std=_std(steps),
            time_mean_ms=float(np.mean(times)),
            time_std_ms=_std(times),
        )
    return out


def write_csv(summaries: dict, records, path) -> tuple[Path, Path]:
    """Write ``<path>.trials.csv`` and ``<path>.summary.csv``; return both paths."""
    if not summaries:
        raise ValueError("nothing to write: summary table is empty")
    base = Path(path)
    trials_path = base.with_name(base.name + ".trials.csv")
    summary_path = base.with_name(base.name + ".summary.csv")
    try:
        base.parent.mkdir(parents=True, exist_ok=True)
        with open(trials_path, "w", newline="") as f:
            writer = csv.DictWriter(f, TRIAL_FIELDS, lineterminator="\n")
            writer.writeheader()
            for rec in records:
                writer.writerow(rec.row())
        with open(summary_path, "w", newline="") as f:
            f.write(SUMMARY_NOTE + "\n")
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(SUMMARY_FIELDS)
            for (task, method), s in summaries.items():
                writer.writerow([task, method, _fmt(s.success_pct), _fmt(s.steps_mean),
                                 _fmt(s.steps_std), _fmt(s.time_mean_ms), _fmt(s.time_std_ms)])
    except OSError as exc:
        raise OSError(f"could not write benchmark CSV at {base}: {exc}") from exc
    return trials_path, summary_path


def read_trials_csv(path) -> list:
    with open(path, newline="") as f:
        rows = list(csv.DictReader(line for line in f if not line.startswith("#")))
    return [
        TrialRecord(
            task=r["task"], method=r["method"], trial=int(r["trial"]), seed=int(r["seed"]),
            success=r["success"] == "1", steps=int(r["steps"]),
            mean_iter_ms=float(r["mean_iter_ms"]), std_iter_ms=float(r["std_iter_ms"]),
        )
        for r in rows
    ]


def format_table(summaries: dict) -> str:
    """Plain-text table, one block per task, laid out like the usual results tables."""
    lines = []
    tasks = list(dict.fromkeys(task for task, _ in summaries))
    width = max(len(m) for _, m in summaries) + 2
    for task in tasks:
        lines.append(f"== {task} ==")
        lines.append(f"{'Method':<{width}}{'Success (%)':>12}  {'Steps to Goal':>20}  {'Time (ms)':>18}")
        for (t, method), s in summaries.items():
            if t != task:
                continue
            steps = f"{s.steps_mean:.1f} ± {s.steps_std:.1f}"
            tms = f"{s.time_mean_ms:.2f} ± {s.time_std_ms:.2f}"
            lines.append(f"{method:<{width}}{s.success_pct:>12.0f}  {steps:>20}  {tms:>18}")
        lines.append("")
    return "\n".join(lines)
