"""MPPI: rollout costing, importance weighting, nominal update, receding horizon."""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import EnvState, Environment
from .samplers import SampleBatch, SamplerConfig, generate_batch, reconstruct_batch
from .trajectory import ActionBounds, as_trajectory, clip_trajectory, shift_horizon

UPDATE_SPACES = ("dense", "knot")


class NoViableRollout(ValueError):
    """Every rollout in the batch has an infinite or undefined cost."""


@dataclass(frozen=True)
class MppiConfig:
    horizon: int
    rollouts: int
    temperature: float
    sampler: SamplerConfig
    bounds: ActionBounds
    baseline_subtraction: bool = True
    iterations_per_step: int = 1
    update_space: str = "dense"
    shift_fill: str = "repeat_last"

    def __post_init__(self):
        if self.horizon < 2:
            raise ValueError(f"horizon must be >= 2, got {self.horizon}")
        if self.rollouts < 1:
            raise ValueError(f"rollouts must be >= 1, got {self.rollouts}")
        if not self.temperature > 0:
            raise ValueError(f"temperature must be > 0, got {self.temperature}")
        if self.iterations_per_step < 1:
            raise ValueError("iterations_per_step must be >= 1")
        if self.update_space not in UPDATE_SPACES:
            raise ValueError(f"update_space must be one of {UPDATE_SPACES}")
        if self.sampler.structured and self.sampler.knot_count > self.horizon:
            raise ValueError(
                f"knot_count={self.sampler.knot_count} exceeds horizon={self.horizon}"
            )
        if self.sampler.noise.dim != self.bounds.dim:
            raise ValueError("noise and bounds dimensions disagree")


@dataclass(frozen=True)
class CostBreakdown:
    running_total: float
    terminal: float
    total: float


@dataclass
class StepDiagnostics:
    min_cost: float
    mean_cost: float
    effective_sample_size: float
    wall_time_ms: float
    nan_rollouts: int = 0


@dataclass
class StepResult:
    executed: np.ndarray
    next_nominal: np.ndarray
    diagnostics: StepDiagnostics
    updated_nominal: np.ndarray = field(repr=False, default=None)


def thread_count(threads: int | None = None) -> int:
    """Resolve the rollout thread cap; ``None`` reads ``MPPI_THREADS`` (0 = auto)."""
    if threads is None:
        raw = os.environ.get("MPPI_THREADS", "1").strip() or "1"
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(f"MPPI_THREADS must be an integer, got {raw!r}") from None
    if threads < 0:
        raise ValueError("thread count must be >= 0")
    if threads == 0:
        threads = os.cpu_count() or 1
    return threads


def _rollout_chunk(env: Environment, pos0, vel0, controls):
    n, H, _ = controls.shape
    # Whole state trajectories at once; the cumulative sums reproduce the
    # step-by-step semi-implicit Euler recursion bit for bit.
    pos, vel = env.integrate_sequence(pos0, vel0, controls)  # (n, H + 1, 2)
    with np.errstate(invalid="ignore", over="ignore"):
        cost = env.running_cost(pos[:, :-1], controls)  # (n, H)
        nxt_pos, nxt_vel = pos[:, 1:], vel[:, 1:]
        finite = np.isfinite(nxt_pos).all(axis=2) & np.isfinite(nxt_vel).all(axis=2)
        crash = ~finite | env.penetrates(nxt_pos)
        event = crash | env.reached(nxt_pos, nxt_vel)
    has_event = event.any(axis=1)
    first = np.where(has_event, event.argmax(axis=1), H)
    rows = np.arange(n)
    crashed = has_event & crash[rows, np.minimum(first, H - 1)]
    nan_hits = has_event & ~finite[rows, np.minimum(first, H - 1)]

    # Cost up to and including the step that ends the rollout.  Reaching the
    # goal absorbs (no further cost); a crash swaps the rest for the penalty.
    steps = np.arange(H)[None, :]
    upto = steps <= first[:, None]
    # The step that produced a non-finite state is covered by the penalty.
    upto &= ~((steps == first[:, None]) & nan_hits[:, None])
    running = np.where(upto, cost, 0.0).sum(axis=1)
    running = running + np.where(crashed, env.crash_penalty(H - first - 1), 0.0)
    with np.errstate(invalid="ignore"):
        terminal = np.where(has_event, 0.0, env.terminal_cost(pos[:, -1]))
    return running, terminal, nan_hits


def rollout_costs(env: Environment, state: EnvState, controls, threads: int | None = None):
    """Running and terminal costs of ``(N, H, m)`` control trajectories from ``state``.

    A rollout that penetrates the terrain (or produces a non-finite state) stops
    there and is charged ``env.crash_penalty(remaining_steps)`` instead of the
    rest of its running cost.  Rollouts are split into contiguous chunks across
    threads; results are gathered by rollout index, so the thread count never
    changes the output.

    Returns ``(running, terminal, nan_count)``.
    """
    controls = np.asarray(controls, dtype=float)
    n = controls.shape[0]
    workers = min(thread_count(threads), n)
    if workers <= 1:
        running, terminal, nan_hits = _rollout_chunk(env, state.position, state.velocity, controls)
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        chunks = [controls[a:b] for a, b in zip(bounds[:-1], bounds[1:])]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda c: _rollout_chunk(env, state.position, state.velocity, c), chunks
            ))
        running, terminal, nan_hits = (np.concatenate(p) for p in zip(*parts))
    return running, terminal, int(nan_hits.sum())


def trajectory_cost(env: Environment, x0: EnvState, traj) -> CostBreakdown:
    traj = as_trajectory(traj, min_steps=1)
    running, terminal, _ = rollout_costs(env, x0, traj[None], threads=1)
    r, t = float(running[0]), float(terminal[0])
    return CostBreakdown(r, t, r + t)


def importance_weights(costs, temperature: float) -> np.ndarray:
    """Softmax of ``-costs / temperature`` evaluated relative to the minimum cost.

    Infinite (and NaN) costs get zero weight.
    """
    costs = np.asarray(costs, dtype=float)
    if costs.ndim != 1 or costs.size == 0:
        raise ValueError("costs must be a non-empty vector")
    if not temperature > 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    finite = np.isfinite(costs)
    if not finite.any():
        raise NoViableRollout("no viable rollout: every cost is infinite or NaN")
    shifted = np.where(finite, costs - costs[finite].min(), np.inf)
    w = np.exp(-shifted / temperature)
    return w / w.sum()


def update_nominal(nominal, batch: SampleBatch, weights, bounds: ActionBounds) -> np.ndarray:
    nominal = as_trajectory(nominal)
    weights = np.asarray(weights, dtype=float)
    eps = batch.perturbations
    if eps.shape[1:] != nominal.shape or eps.shape[0] != weights.shape[0]:
        raise ValueError(
            f"shape mismatch: nominal {nominal.shape}, perturbations {eps.shape}, "
            f"weights {weights.shape}"
        )
    return clip_trajectory(nominal + np.tensordot(weights, eps, axes=1), bounds)


def _knot_space_update(config: MppiConfig, nominal, batch: SampleBatch, weights):
    idx = batch.knot_indices
    knots = nominal[idx] + np.tensordot(weights, batch.knot_noise, axes=1)
    dense = reconstruct_batch(config.sampler.kind, idx, knots[None], config.horizon,
                              config.sampler.boundary)[0]
    return clip_trajectory(dense, config.bounds)


def optimize(config: MppiConfig, env: Environment, state: EnvState, nominal, rng,
             threads: int | None = None):
    """One MPPI iteration: sample, cost, weight, update.

    Returns ``(updated_nominal, costs, weights, nan_count)``.
    """
    batch = generate_batch(config.sampler, nominal, config.bounds, config.rollouts, rng)
    running, terminal, nan_count = rollout_costs(env, state, batch.trajectories, threads)
    costs = running + terminal
    weights = importance_weights(costs, config.temperature)
    if config.update_space == "knot" and config.sampler.structured:
        updated = _knot_space_update(config, nominal, batch, weights)
    else:
        updated = update_nominal(nominal, batch, weights, config.bounds)
    return updated, costs, weights, nan_count


def control_step(config: MppiConfig, env: Environment, state: EnvState, nominal, rng,
                 threads: int | None = None) -> StepResult:
    """Optimize, execute the first row of the updated nominal, shift the horizon.

    Raises :class:`NoViableRollout` when a batch has no finite cost; the caller
    is expected to fall back to the unmodified nominal.
    """
    start = time.perf_counter()
    nominal = as_trajectory(nominal)
    if nominal.shape != (config.horizon, config.bounds.dim):
        raise ValueError(
            f"nominal shape {nominal.shape} does not match horizon {config.horizon} "
            f"x {config.bounds.dim} actions"
        )
    updated = clip_trajectory(nominal, config.bounds)
    nan_total = 0
    for _ in range(config.iterations_per_step):
        updated, costs, weights, nan_count = optimize(config, env, state, updated, rng, threads)
        nan_total += nan_count
    executed = updated[0].copy()
    next_nominal = shift_horizon(updated, config.shift_fill)
    finite = costs[np.isfinite(costs)]
    reported = finite - finite.min() if config.baseline_subtraction else finite
    diag = StepDiagnostics(
        min_cost=float(reported.min()),
        mean_cost=float(reported.mean()),
        effective_sample_size=float(1.0 / np.sum(weights**2)),
        wall_time_ms=(time.perf_counter() - start) * 1e3,
        nan_rollouts=nan_total,
    )
    return StepResult(executed, next_nominal, diag, updated)


class MppiController:
    """Stateful receding-horizon wrapper: keeps the nominal between steps."""

    def __init__(self, config: MppiConfig, env: Environment, nominal=None, seed=None,
                 threads: int | None = None):
        self.config = config
        self.env = env
        if nominal is None:
            nominal = np.tile(env.spec.hover_control, (config.horizon, 1))
        self.nominal = clip_trajectory(as_trajectory(nominal), config.bounds)
        self.rng = np.random.default_rng(seed)
        self.threads = threads
        self.no_viable_events = 0

    def step(self, state: EnvState):
        try:
            result = control_step(self.config, self.env, state, self.nominal, self.rng,
                                  self.threads)
        except NoViableRollout:
            self.no_viable_events += 1
            executed = self.nominal[0].copy()
            self.nominal = shift_horizon(self.nominal, self.config.shift_fill)
            return executed, None
        self.nominal = result.next_nominal
        return result.executed, result.diagnostics
