"""A single MPPI iteration, then a short closed-loop episode.

Run with ``python demos/03_mppi_step.py``.
"""
# %%
import numpy as np

from structured_mppi import (
    Environment,
    MppiConfig,
    MppiController,
    NoiseSpec,
    SamplerConfig,
    TaskSpec,
    control_step,
    trajectory_cost,
)

task = TaskSpec("stairs")
env = Environment(task)
config = MppiConfig(
    horizon=40, rollouts=64, temperature=1.0,
    sampler=SamplerConfig("cubic-spline", NoiseSpec([0.5, 0.5]), knot_count=4),
    bounds=task.bounds,
)

# %% One iteration from the hover nominal
nominal = np.tile(task.hover_control, (config.horizon, 1))
state = env.reset()
result = control_step(config, env, state, nominal, np.random.default_rng(0))
d = result.diagnostics
print(f"executed u0 = {np.round(result.executed, 3)}")
print(f"ESS {d.effective_sample_size:.1f} of {config.rollouts}, "
      f"iteration {d.wall_time_ms:.2f} ms")
print("nominal cost before:", round(trajectory_cost(env, state, nominal).total, 2))
print("nominal cost after: ", round(trajectory_cost(env, state, result.updated_nominal).total, 2))

# %% Closed loop: climb the stairs
ctrl = MppiController(config, env, seed=0)
state = env.reset()
while not state.terminal and state.step_count < task.max_steps:
    u, _ = ctrl.step(state)
    state = env.step(state, u)
    if state.step_count % 50 == 0:
        print(f"step {state.step_count:>3}: x={state.position[0]:.2f} z={state.position[1]:.2f}")
print(f"episode ended: {state.status} at step {state.step_count}")
