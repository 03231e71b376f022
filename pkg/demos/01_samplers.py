"""Four ways to perturb a control trajectory.

Each sampler draws noise, builds candidate trajectories around a nominal and
reports how many random numbers it used.  Run with ``python demos/01_samplers.py``.
"""
# %%
import numpy as np

from structured_mppi import (
    ActionBounds,
    CountingGenerator,
    NoiseSpec,
    SamplerConfig,
    generate_batch,
    smoothness_report,
)

H, m, N = 40, 2, 64
nominal = np.tile([0.0, 9.81], (H, 1))
bounds = ActionBounds([-1.0, 0.0], [1.0, 11.0])

# %% Draw counts and smoothness of one batch per sampler
print(f"{'sampler':<16}{'draws':>8}{'max |d2u|':>12}{'mean |d2u|':>12}")
for kind, k in [("normal", 4), ("cubic-spline", 4), ("bezier", 4), ("linear-interp", 10)]:
    rng = CountingGenerator(np.random.default_rng(0))
    cfg = SamplerConfig(kind, NoiseSpec([0.5, 0.5]), k)
    batch = generate_batch(cfg, nominal, bounds, N, rng)
    reports = [smoothness_report(u) for u in batch.trajectories]
    peak = np.mean([r.max_second_diff for r in reports])
    mean = np.mean([r.mean_abs_second_diff for r in reports])
    print(f"{kind + '-' + str(k):<16}{rng.draws:>8}{peak:>12.4f}{mean:>12.4f}")

# %% Structured samplers pass exactly through (or, for Bezier, start and end at)
# the perturbed knots; everything between is reconstructed.
cfg = SamplerConfig("cubic-spline", NoiseSpec([0.5, 0.5]), 4)
batch = generate_batch(cfg, nominal, bounds, 1, np.random.default_rng(1))
print("knot indices:", batch.knot_indices.tolist())
print("Fx at knots:", np.round(batch.trajectories[0, batch.knot_indices, 0], 3).tolist())
