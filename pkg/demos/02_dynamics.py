"""The three point-mass tasks: terrain, dynamics and costs.

Run with ``python demos/02_dynamics.py``.
"""
# %%
import numpy as np

from structured_mppi import Environment, TaskSpec

# %% Terrain profiles
for kind in ("flat", "stairs", "big_box"):
    env = Environment(TaskSpec(kind))
    xs = np.linspace(0.0, env.spec.goal_x, 7)
    print(f"{kind:<8} goal x={env.spec.goal_x:<4} h(x) =", np.round(env.terrain.height(xs), 2))

# %% Hovering holds altitude; cutting thrust falls onto the ground
env = Environment(TaskSpec("flat"))
state = env.reset()
for _ in range(50):
    state = env.step(state, env.spec.hover_control)
print("after 50 hover steps z =", state.position[1])

state, steps = env.reset(), 0
while not state.terminal:
    state = env.step(state, [0.0, 0.0])
    steps += 1
print(f"free fall: {state.status} after {steps} steps")

# %% Running and terminal cost along a gentle forward push
state, total = env.reset(), 0.0
u = np.array([0.5, 9.81])
while not state.terminal and state.step_count < 400:
    total += float(env.running_cost(state.position, u))
    state = env.step(state, u)
print(f"constant push: {state.status} at step {state.step_count}, running cost {total:.2f}")
