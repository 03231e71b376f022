"""Control-trajectory sampling strategies.

Four interchangeable ways of turning a nominal ``(H, m)`` control trajectory
into ``N`` perturbed dense trajectories:

* ``iid_gaussian``  - independent noise at every time step and dimension
* ``cubic_spline``  - noise at ``K`` knots, natural (or clamped) cubic spline
* ``bezier``        - noise at ``K`` control points, Bernstein basis
* ``linear_interp`` - noise at ``K`` waypoints, piecewise-linear interpolation

Structured kinds draw ``K * m`` normals per rollout instead of ``H * m``.  All
randomness comes from a single ``standard_normal`` call per batch so the
consumption order is fixed (rollout, then time/knot, then dimension).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .trajectory import ActionBounds, as_trajectory, clip_trajectory

KINDS = ("iid_gaussian", "cubic_spline", "bezier", "linear_interp")
STRUCTURED_KINDS = KINDS[1:]
SPLINE_BOUNDARIES = ("natural", "clamped")

# External (config file / CLI) names for the sampler kinds.
KIND_ALIASES = {
    "normal": "iid_gaussian",
    "cubic-spline": "cubic_spline",
    "bezier": "bezier",
    "linear-interp": "linear_interp",
}
EXTERNAL_NAMES = {v: k for k, v in KIND_ALIASES.items()}


def parse_kind(name: str) -> str:
    """Map an external name (``"cubic-spline"``) or internal name to the internal kind."""
    if name in KINDS:
        return name
    try:
        return KIND_ALIASES[name]
    except KeyError:
        valid = ", ".join(KIND_ALIASES)
        raise ValueError(f"unknown sampler kind {name!r}; valid kinds: {valid}") from None


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    """Per-action-dimension noise standard deviations."""

    sigma: np.ndarray

    def __post_init__(self):
        sigma = np.atleast_1d(np.asarray(self.sigma, dtype=float)).copy()
        if sigma.ndim != 1 or sigma.size == 0:
            raise ValueError("sigma must be a non-empty vector")
        if not np.all(np.isfinite(sigma)) or not np.all(sigma > 0):
            raise ValueError(f"sigma entries must be finite and > 0, got {sigma}")
        sigma.flags.writeable = False
        object.__setattr__(self, "sigma", sigma)

    def __eq__(self, other):
        if not isinstance(other, NoiseSpec):
            return NotImplemented
        return np.array_equal(self.sigma, other.sigma)

    def __hash__(self):
        return hash(self.sigma.tobytes())

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]

    @classmethod
    def isotropic(cls, sigma: float, dim: int) -> "NoiseSpec":
        return cls(np.full(dim, float(sigma)))


@dataclass(frozen=True, eq=False)
class KnotSet:
    """``K`` horizon indices and the ``(K, m)`` parameter block attached to them."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices)
        if idx.ndim != 1 or not np.issubdtype(idx.dtype, np.integer):
            raise ValueError("knot indices must be a 1-D integer vector")
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] != idx.shape[0]:
            raise ValueError(f"knot values shape {values.shape} does not match {idx.shape[0]} indices")
        if idx.shape[0] < 2:
            raise ValueError("need at least two knots")
        if idx[0] != 0:
            raise ValueError("first knot index must be 0")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("knot indices must be strictly increasing (no duplicates)")
        object.__setattr__(self, "indices", idx.astype(np.int64))
        object.__setattr__(self, "values", values)

    @property
    def count(self) -> int:
        return self.indices.shape[0]

    @property
    def horizon(self) -> int:
        return int(self.indices[-1]) + 1


@dataclass(frozen=True)
class SamplerConfig:
    kind: str
    noise: NoiseSpec
    knot_count: int = 4
    boundary: str = "natural"
    preserve_nominal: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", parse_kind(self.kind))
        if self.kind in STRUCTURED_KINDS and self.knot_count < 2:
            raise ValueError(f"{self.kind} needs knot_count >= 2, got {self.knot_count}")
        if self.boundary not in SPLINE_BOUNDARIES:
            raise ValueError(f"unknown spline boundary {self.boundary!r}")

    @property
    def structured(self) -> bool:
        return self.kind in STRUCTURED_KINDS

    def draws_per_rollout(self, horizon: int) -> int:
        rows = self.knot_count if self.structured else horizon
        return rows * self.noise.dim


@dataclass(frozen=True)
class SampleBatch:
    """Clipped trajectories ``(N, H, m)`` and their pre-clip perturbations.

    ``knot_noise`` holds the raw ``(N, K, m)`` knot perturbations for structured
    kinds (``None`` for iid sampling).
    """

    trajectories: np.ndarray
    perturbations: np.ndarray
    knot_indices: np.ndarray | None = None
    knot_noise: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.trajectories.shape[0]


class CountingGenerator:
    """Wraps a ``numpy.random.Generator`` and counts normal draws."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.draws = 0

    def standard_normal(self, size=None):
        out = self.rng.standard_normal(size)
        self.draws += int(np.size(out))
        return out


def uniform_indices(H: int, K: int) -> np.ndarray:
    """``round((k-1)(H-1)/(K-1))`` for ``k = 1..K``, halves rounded away from zero.

    Evaluated in integer arithmetic so ties are exact.
    """
    H, K = int(H), int(K)
    if K < 2:
        raise ValueError(f"need K >= 2 knots, got K={K}")
    if K > H:
        raise ValueError(f"K={K} knots exceed horizon H={H}; indices would repeat")
    k = np.arange(K, dtype=np.int64)
    return (2 * k * (H - 1) + (K - 1)) // (2 * (K - 1))


def _check_noise(noise: NoiseSpec, dim: int):
    if noise.dim != dim:
        raise ValueError(f"noise has {noise.dim} dimensions, trajectory has {dim}")


def sample_iid(nominal, noise: NoiseSpec, N: int, rng) -> SampleBatch:
    """Unclipped iid Gaussian batch around ``nominal``."""
    nominal = as_trajectory(nominal)
    if N < 1:
        raise ValueError(f"need N >= 1 rollouts, got {N}")
    _check_noise(noise, nominal.shape[1])
    eps = rng.standard_normal((N, *nominal.shape)) * noise.sigma
    return SampleBatch(trajectories=nominal + eps, perturbations=eps)


def perturb_knots(nominal_knots: KnotSet, noise: NoiseSpec, rng) -> KnotSet:
    _check_noise(noise, nominal_knots.values.shape[1])
    eps = rng.standard_normal(nominal_knots.values.shape) * noise.sigma
    return KnotSet(nominal_knots.indices, nominal_knots.values + eps)


# ---------------------------------------------------------------------------
# Cubic spline

def _spline_second_derivatives(t: np.ndarray, y: np.ndarray, boundary: str) -> np.ndarray:
    """Knot second derivatives for columns of ``y`` (shape ``(K, C)``).

    Solves the tridiagonal moment system with the Thomas algorithm.
    """
    K = t.shape[0]
    h = np.diff(t).astype(float)
    slopes = np.diff(y, axis=0) / h[:, None]

    sub = np.zeros(K)
    diag = np.ones(K)
    sup = np.zeros(K)
    rhs = np.zeros_like(y)

    sub[1:-1] = h[:-1]
    diag[1:-1] = 2.0 * (h[:-1] + h[1:])
    sup[1:-1] = h[1:]
    rhs[1:-1] = 6.0 * (slopes[1:] - slopes[:-1])

    if boundary == "clamped":
        # S'(t_0) = S'(t_K) = 0
        diag[0] = 2.0 * h[0]
        sup[0] = h[0]
        rhs[0] = 6.0 * slopes[0]
        sub[-1] = h[-1]
        diag[-1] = 2.0 * h[-1]
        rhs[-1] = -6.0 * slopes[-1]
    # natural: rows 0 and K-1 stay M = 0

    c = np.zeros(K)
    d = np.zeros_like(y)
    c[0] = sup[0] / diag[0]
    d[0] = rhs[0] / diag[0]
    for i in range(1, K):
        denom = diag[i] - sub[i] * c[i - 1]
        c[i] = sup[i] / denom
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom
    M = np.empty_like(y)
    M[-1] = d[-1]
    for i in range(K - 2, -1, -1):
        M[i] = d[i] - c[i] * M[i + 1]
    return M


def _spline_eval(t_knots: np.ndarray, y: np.ndarray, M: np.ndarray, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    seg = np.clip(np.searchsorted(t_knots, t, side="right") - 1, 0, t_knots.shape[0] - 2)
    t0 = t_knots[seg].astype(float)
    h = (t_knots[seg + 1] - t_knots[seg]).astype(float)
    a = (t_knots[seg + 1] - t)[:, None]
    b = (t - t0)[:, None]
    h = h[:, None]
    y0, y1 = y[seg], y[seg + 1]
    M0, M1 = M[seg], M[seg + 1]
    return (
        M0 * a**3 / (6.0 * h)
        + M1 * b**3 / (6.0 * h)
        + (y0 / h - M0 * h / 6.0) * a
        + (y1 / h - M1 * h / 6.0) * b
    )


def cubic_spline_eval(knots: KnotSet, t, boundary: str = "natural") -> np.ndarray:
    """Evaluate the interpolating cubic spline at (possibly fractional) times ``t``.

    Returns an array of shape ``(len(t), m)``.
    """
    if boundary not in SPLINE_BOUNDARIES:
        raise ValueError(f"unknown spline boundary {boundary!r}")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    M = _spline_second_derivatives(knots.indices, knots.values, boundary)
    return _spline_eval(knots.indices, knots.values, M, t)


def reconstruct_cubic_spline(knots: KnotSet, H: int, boundary: str = "natural") -> np.ndarray:
    _check_span(knots, H)
    return cubic_spline_eval(knots, np.arange(H), boundary)


# ---------------------------------------------------------------------------
# Bezier

def bernstein_basis(n: int, i: int, tau: float) -> float:
    """``C(n, i) * tau**i * (1 - tau)**(n - i)``."""
    if not 0 <= i <= n:
        raise ValueError(f"basis index i={i} outside [0, {n}]")
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau={tau} outside [0, 1]")
    return math.comb(n, i) * tau**i * (1.0 - tau) ** (n - i)


def bernstein_matrix(n: int, tau) -> np.ndarray:
    """All degree-``n`` basis functions at each ``tau``: shape ``(len(tau), n + 1)``."""
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any((tau < 0.0) | (tau > 1.0)):
        raise ValueError("tau must lie in [0, 1]")
    i = np.arange(n + 1)
    coeffs = np.array([math.comb(n, k) for k in i], dtype=float)
    return coeffs * tau[:, None] ** i * (1.0 - tau[:, None]) ** (n - i)


def reconstruct_bezier(points: KnotSet, H: int) -> np.ndarray:
    if H < 2:
        raise ValueError(f"need H >= 2, got {H}")
    basis = bernstein_matrix(points.count - 1, np.arange(H) / (H - 1))
    return basis @ points.values


# ---------------------------------------------------------------------------
# Linear interpolation

def _linear_weights(indices: np.ndarray, H: int):
    t = np.arange(H)
    seg = np.clip(np.searchsorted(indices, t, side="right") - 1, 0, indices.shape[0] - 2)
    frac = (t - indices[seg]) / (indices[seg + 1] - indices[seg])
    return seg, frac[:, None]


def reconstruct_linear(waypoints: KnotSet, H: int) -> np.ndarray:
    _check_span(waypoints, H)
    seg, frac = _linear_weights(waypoints.indices, H)
    v = waypoints.values
    return (1.0 - frac) * v[seg] + frac * v[seg + 1]


def _check_span(knots: KnotSet, H: int):
    if knots.horizon != H:
        raise ValueError(f"knot indices span [0, {knots.horizon - 1}] but horizon is H={H}")


# ---------------------------------------------------------------------------
# Batched reconstruction

def reconstruct_batch(kind: str, indices: np.ndarray, values: np.ndarray, H: int,
                      boundary: str = "natural") -> np.ndarray:
    """Reconstruct ``(N, K, m)`` knot blocks into ``(N, H, m)`` dense trajectories."""
    kind = parse_kind(kind)
    N, K, m = values.shape
    if kind == "bezier":
        basis = bernstein_matrix(K - 1, np.arange(H) / (H - 1))
        return np.einsum("hk,nkm->nhm", basis, values)
    if int(indices[-1]) != H - 1:
        raise ValueError(f"knot indices end at {indices[-1]}, expected {H - 1}")
    if kind == "linear_interp":
        seg, frac = _linear_weights(indices, H)
        return (1.0 - frac) * values[:, seg] + frac * values[:, seg + 1]
    if kind == "cubic_spline":
        cols = values.transpose(1, 0, 2).reshape(K, N * m)
        M = _spline_second_derivatives(indices, cols, boundary)
        dense = _spline_eval(indices, cols, M, np.arange(H))
        return dense.reshape(H, N, m).transpose(1, 0, 2)
    raise ValueError(f"{kind} is not a structured sampler kind")


def generate_batch(config: SamplerConfig, nominal, bounds: ActionBounds, N: int, rng) -> SampleBatch:
    """Sample ``N`` clipped rollouts around ``nominal``.

    Perturbations are dense and measured before clipping, so that
    ``trajectories[k] == clip(nominal + perturbations[k])``.
    """
    nominal = as_trajectory(nominal)
    H, m = nominal.shape
    if N < 1:
        raise ValueError(f"need N >= 1 rollouts, got {N}")
    if bounds.dim != m:
        raise ValueError(f"bounds have {bounds.dim} dimensions, trajectory has {m}")
    _check_noise(config.noise, m)

    if not config.structured:
        raw = sample_iid(nominal, config.noise, N, rng)
        eps = raw.perturbations
        if config.preserve_nominal:
            eps[0] = 0.0
        return SampleBatch(clip_trajectory(nominal + eps, bounds), eps)

    idx = uniform_indices(H, config.knot_count)
    knot_eps = rng.standard_normal((N, idx.shape[0], m)) * config.noise.sigma
    if config.preserve_nominal:
        knot_eps[0] = 0.0
    dense = reconstruct_batch(config.kind, idx, nominal[idx] + knot_eps, H, config.boundary)
    eps = dense - nominal
    return SampleBatch(
        trajectories=clip_trajectory(nominal + eps, bounds),
        perturbations=eps,
        knot_indices=idx,
        knot_noise=knot_eps,
    )
