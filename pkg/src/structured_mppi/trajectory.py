"""Dense control trajectories, actuator bounds and smoothness diagnostics.

A control trajectory is a plain ``(H, m)`` float array, time-major (row = time
step).  The helpers here validate and operate on such arrays and never modify
their inputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FILL_POLICIES = ("repeat_last", "zero")


def as_trajectory(values, min_steps: int = 2) -> np.ndarray:
    """Validate ``values`` as an ``(H, m)`` trajectory and return a float copy.

    A 1-D input is treated as a single action dimension.
    """
    arr = np.array(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"trajectory must be 2-D (H, m), got shape {arr.shape}")
    if arr.shape[0] < min_steps:
        raise ValueError(f"trajectory needs at least {min_steps} steps, got H={arr.shape[0]}")
    if arr.shape[1] < 1:
        raise ValueError("trajectory needs at least one action dimension")
    if not np.all(np.isfinite(arr)):
        raise ValueError("trajectory contains non-finite entries")
    return arr


@dataclass(frozen=True, eq=False)
class ActionBounds:
    """Per-dimension actuator limits ``lower[j] < upper[j]``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float)).copy()
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float)).copy()
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise ValueError(f"bounds shape mismatch: {lower.shape} vs {upper.shape}")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("bounds must be finite")
        if not np.all(lower < upper):
            raise ValueError("every lower bound must be strictly below its upper bound")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def __eq__(self, other):
        if not isinstance(other, ActionBounds):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @classmethod
    def symmetric(cls, limit, dim: int | None = None) -> "ActionBounds":
        limit = np.atleast_1d(np.asarray(limit, dtype=float))
        if dim is not None and limit.shape[0] == 1:
            limit = np.repeat(limit, dim)
        return cls(-limit, limit)


@dataclass(frozen=True)
class SmoothnessReport:
    max_first_diff: float
    max_second_diff: float
    mean_abs_second_diff: float


def clip_trajectory(traj, bounds: ActionBounds) -> np.ndarray:
    """Element-wise clip of a trajectory (or a stack of them) to ``bounds``.

    Works on any array whose last axis is the action dimension, so a whole
    ``(N, H, m)`` batch can be clipped in one call.
    """
    arr = np.asarray(traj, dtype=float)
    if arr.shape[-1] != bounds.dim:
        raise ValueError(
            f"action dimension mismatch: trajectory has {arr.shape[-1]} columns, "
            f"bounds have {bounds.dim}"
        )
    return np.clip(arr, bounds.lower, bounds.upper)


def shift_horizon(traj, fill: str = "repeat_last") -> np.ndarray:
    """Drop the executed first row and append a new tail row.

    ``fill="repeat_last"`` duplicates the final row, ``fill="zero"`` appends zeros.
    """
    arr = np.asarray(traj, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 2:
        raise ValueError(f"shift_horizon needs H >= 2, got shape {arr.shape}")
    if fill not in FILL_POLICIES:
        raise ValueError(f"unknown fill policy {fill!r}; expected one of {FILL_POLICIES}")
    out = np.empty_like(arr)
    out[:-1] = arr[1:]
    out[-1] = arr[-1] if fill == "repeat_last" else 0.0
    return out


def smoothness_report(traj) -> SmoothnessReport:
    arr = np.asarray(traj, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape[0] < 3:
        raise ValueError(f"smoothness_report needs H >= 3, got H={arr.shape[0]}")
    d1 = np.abs(np.diff(arr, axis=0))
    d2 = np.abs(arr[2:] - 2.0 * arr[1:-1] + arr[:-2])
    return SmoothnessReport(
        max_first_diff=float(d1.max()),
        max_second_diff=float(d2.max()),
        mean_abs_second_diff=float(d2.mean()),
    )
