"""Planar thrust-controlled point mass over piecewise-constant terrain.

Desk-scale stand-ins for three legged-locomotion tasks: walking on flat
ground, climbing a staircase and getting over a large box.  The state is
``position = [x, z]``, ``velocity = [vx, vz]``; controls are ``[Fx, Fz]``.

Every numeric routine works on single states and on ``(N, 2)`` batches, which
is what the MPPI rollouts use.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .trajectory import ActionBounds

GRAVITY = 9.81
TASK_KINDS = ("flat", "stairs", "big_box")

RUNNING, SUCCESS, CRASHED = "running", "success", "crashed"


class Terrain:
    """Right-continuous step profile ``h(x)`` from sorted ``(x_start, height)`` pairs.

    Left of the first segment the first height applies.
    """

    def __init__(self, segments):
        segs = [(float(x), float(h)) for x, h in segments]
        if not segs:
            raise ValueError("terrain needs at least one segment")
        starts = np.array([s[0] for s in segs])
        heights = np.array([s[1] for s in segs])
        if np.any(np.diff(starts) <= 0):
            raise ValueError("terrain segments must be sorted and non-overlapping")
        if np.any(heights < 0):
            raise ValueError("terrain heights must be >= 0")
        self.segments = tuple(segs)
        self._starts = starts
        self._heights = heights

    def height(self, x):
        x = np.asarray(x, dtype=float)
        i = np.clip(np.searchsorted(self._starts, x, side="right") - 1, 0, None)
        h = self._heights[i]
        return float(h) if h.ndim == 0 else h

    @property
    def max_height(self) -> float:
        return float(self._heights.max())

    def to_table(self) -> str:
        """Two-column ``x h`` text table, one row per segment start."""
        return "".join(f"{x:.6g} {h:.6g}\n" for x, h in self.segments)

    def __repr__(self):
        return f"Terrain({list(self.segments)!r})"


def default_terrain(kind: str) -> Terrain:
    if kind == "flat":
        return Terrain([(0.0, 0.0)])
    if kind == "stairs":
        return Terrain([(0.8 * i, 0.15 * i) for i in range(5)])
    if kind == "big_box":
        return Terrain([(0.0, 0.0), (0.4, 0.4), (0.6, 0.0)])
    raise ValueError(f"unknown task kind {kind!r}; expected one of {TASK_KINDS}")


DEFAULT_GOALS = {"flat": 1.0, "stairs": 3.3, "big_box": 1.0}


@dataclass(frozen=True)
class CostWeights:
    goal: float = 1.0
    clearance: float = 10.0
    control: float = 1e-3
    z_margin: float = 0.05
    terminal: float = 100.0
    crash_base: float = 1e6


@dataclass(frozen=True)
class TaskSpec:
    kind: str
    goal_x: float | None = None
    max_steps: int = 400
    dt: float = 0.02
    bounds: ActionBounds = field(
        default_factory=lambda: ActionBounds(np.array([-1.0, 0.0]), np.array([1.0, 11.0]))
    )
    start: tuple[float, float] = (0.0, 0.1)
    landing_speed: float = 1.0
    mass: float = 1.0
    weights: CostWeights = field(default_factory=CostWeights)

    def __post_init__(self):
        if self.kind not in TASK_KINDS:
            raise ValueError(f"unknown task kind {self.kind!r}; expected one of {TASK_KINDS}")
        if self.goal_x is None:
            object.__setattr__(self, "goal_x", DEFAULT_GOALS[self.kind])
        if self.goal_x <= 0:
            raise ValueError("goal_x must be > 0")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be > 0")
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.mass <= 0:
            raise ValueError("mass must be > 0")
        if self.bounds.dim != 2:
            raise ValueError("point-mass tasks take 2-D controls [Fx, Fz]")

    def with_overrides(self, **changes) -> "TaskSpec":
        return replace(self, **changes)

    @property
    def hover_control(self) -> np.ndarray:
        return np.array([0.0, self.mass * GRAVITY])


@dataclass(frozen=True)
class EnvState:
    position: np.ndarray
    velocity: np.ndarray
    step_count: int = 0
    status: str = RUNNING

    @property
    def terminal(self) -> bool:
        return self.status != RUNNING


class Environment:
    """A task specification bound to its terrain."""

    def __init__(self, spec: TaskSpec, terrain: Terrain | None = None):
        self.spec = spec
        self.terrain = terrain if terrain is not None else default_terrain(spec.kind)
        self.gravity = np.array([0.0, -GRAVITY])
        w = spec.weights
        reach = max(abs(spec.goal_x), 1.0) + 1.0
        umax = np.maximum(np.abs(spec.bounds.lower), np.abs(spec.bounds.upper))
        self.max_running_cost = (
            w.goal * reach**2
            + w.clearance * (self.terrain.max_height + w.z_margin + 1.0) ** 2
            + w.control * float(umax @ umax)
        )

    def reset(self) -> EnvState:
        return EnvState(np.array(self.spec.start, dtype=float), np.zeros(2))

    # -- batched primitives -------------------------------------------------
    def integrate(self, pos, vel, u):
        """Semi-implicit Euler step; works on ``(2,)`` or ``(N, 2)`` arrays."""
        dt = self.spec.dt
        vel = vel + dt * (u / self.spec.mass + self.gravity)
        pos = pos + dt * vel
        return pos, vel

    def integrate_sequence(self, pos0, vel0, controls):
        """States ``(N, H + 1, 2)`` visited under ``(N, H, 2)`` controls from one start.

        Equivalent to calling :meth:`integrate` ``H`` times; the accumulations run
        in the same order, so the results match exactly.
        """
        controls = np.asarray(controls, dtype=float)
        n = controls.shape[0]
        dt = self.spec.dt
        dv = dt * (controls / self.spec.mass + self.gravity)
        vel = np.cumsum(
            np.concatenate([np.broadcast_to(vel0, (n, 1, 2)), dv], axis=1), axis=1
        )
        dp = dt * vel[:, 1:]
        pos = np.cumsum(
            np.concatenate([np.broadcast_to(pos0, (n, 1, 2)), dp], axis=1), axis=1
        )
        return pos, vel

    def penetrates(self, pos):
        pos = np.asarray(pos)
        return pos[..., 1] < self.terrain.height(pos[..., 0])

    def reached(self, pos, vel):
        return (np.asarray(pos)[..., 0] >= self.spec.goal_x) & (
            np.abs(np.asarray(vel)[..., 1]) < self.spec.landing_speed
        )

    def running_cost(self, pos, u):
        w = self.spec.weights
        pos = np.asarray(pos, dtype=float)
        u = np.asarray(u, dtype=float)
        gap = np.maximum(self.spec.goal_x - pos[..., 0], 0.0)
        clear = np.maximum(self.terrain.height(pos[..., 0]) + w.z_margin - pos[..., 1], 0.0)
        return w.goal * gap**2 + w.clearance * clear**2 + w.control * np.sum(u * u, axis=-1)

    def terminal_cost(self, pos):
        gap = np.maximum(self.spec.goal_x - np.asarray(pos, dtype=float)[..., 0], 0.0)
        return self.spec.weights.terminal * gap**2

    def crash_penalty(self, remaining_steps):
        return self.spec.weights.crash_base + remaining_steps * self.max_running_cost

    # -- EnvState interface -------------------------------------------------
    def step(self, state: EnvState, control) -> EnvState:
        if state.terminal:
            raise ValueError(f"cannot step a {state.status} state")
        u = np.asarray(control, dtype=float)
        if u.shape != (2,) or not np.all(np.isfinite(u)):
            raise ValueError(f"control must be a finite 2-vector, got {control!r}")
        pos, vel = self.integrate(state.position, state.velocity, u)
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))) or self.penetrates(pos):
            status = CRASHED
        elif self.reached(pos, vel):
            status = SUCCESS
        else:
            status = RUNNING
        return EnvState(pos, vel, state.step_count + 1, status)


def build_env(spec: TaskSpec) -> Environment:
    return Environment(spec)


def step_dynamics(state: EnvState, control, dt: float, env: Environment | None = None) -> EnvState:
    """One semi-implicit Euler step with the given ``dt``.

    Without ``env`` the state is stepped over flat ground with a 1 kg mass and
    an unreachable goal, which is enough for pure dynamics checks.
    """
    if env is None:
        env = Environment(TaskSpec("flat", goal_x=np.inf, dt=dt))
    elif env.spec.dt != dt:
        env = Environment(replace(env.spec, dt=dt), env.terrain)
    return env.step(state, control)


def running_cost(state: EnvState, control, spec: TaskSpec) -> float:
    if state.status != RUNNING:
        raise ValueError("running cost is only defined for running states")
    return float(Environment(spec).running_cost(state.position, control))


def terminal_cost(state: EnvState, spec: TaskSpec) -> float:
    return float(Environment(spec).terminal_cost(state.position))
