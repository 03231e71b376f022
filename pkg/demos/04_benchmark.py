"""A reduced benchmark sweep, written to CSV and plotted as SVG.

The full sweep is ``structured-mppi bench``; this one uses one task, three
methods and three trials so it finishes in a few seconds.
Run with ``python demos/04_benchmark.py [output_dir]``.
"""
# %%
import sys
from pathlib import Path

from structured_mppi import ExperimentConfig, MppiConfig, NoiseSpec, SamplerConfig, TaskSpec
from structured_mppi import aggregate, run_experiment, write_csv
from structured_mppi.bench import format_table
from structured_mppi.plot import write_plots

out_dir = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_results")
task = TaskSpec("big_box")


def method(kind, k):
    return MppiConfig(40, 64, 1.0, SamplerConfig(kind, NoiseSpec([0.5, 0.5]), k), task.bounds)


config = ExperimentConfig(
    tasks=[("big-box", task)],
    methods=[("Normal", method("normal", 4)),
             ("CubicSpline-k4", method("cubic-spline", 4)),
             ("LinearInterp-w10", method("linear-interp", 10))],
    trials_per_cell=3,
)

# %% Run, aggregate, write
records = run_experiment(config)
summaries = aggregate(records)
print(format_table(summaries))
trials_csv, summary_csv = write_csv(summaries, records, out_dir / "box")
print("wrote", trials_csv, summary_csv)

# %% One SVG bar chart per task
for path in write_plots(summary_csv, out_dir):
    print("wrote", path)
