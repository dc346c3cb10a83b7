"""Window-sum perturbation functionals, delta-net quantization and the discrete Gronwall envelope."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dynamics import Trajectory
from .errors import ResourceLimit
from .fields import TimeField, sup_norm

MAX_GRID_POINTS = 10**7


@dataclass
class WindowNormReport:
    window: int
    value: float
    witness_n: int
    witness_x: np.ndarray
    grid_spacing: float
    probe_limit: int
    exact_in_n: bool  # True when the sup over n is exact (declared period)
    upper_bound: Optional[float] = None  # value + N L h/2, when the field is Lipschitz and exact_in_n
    absolute: bool = False


def grid_axis(radius: float, spacing: float) -> np.ndarray:
    count = math.ceil(2 * radius / spacing) + 1
    return np.linspace(-radius, radius, count)


def _grid(f: TimeField, spacing: float):
    if not 0 < spacing <= f.domain.radius:
        raise ValueError(f"grid spacing must be in (0, K], got {spacing}")
    axis = grid_axis(f.domain.radius, spacing)
    total = len(axis) ** f.dim
    if total > MAX_GRID_POINTS:
        raise ResourceLimit(f"grid of {total} points exceeds {MAX_GRID_POINTS}; use a coarser spacing")
    actual = float(axis[1] - axis[0]) if len(axis) > 1 else float(spacing)
    return itertools.product(axis.tolist(), repeat=f.dim), actual


def window_sum(f: TimeField, x, n: int, N: int) -> np.ndarray:
    """Sum of f(k, x) over k = n .. n+N-1 (same summation as the S-norm scan)."""
    return f.values(np.arange(n, n + N), x).sum(axis=0)


def _scan(f: TimeField, N: int, grid_spacing: float, probe_limit: int, absolute: bool) -> WindowNormReport:
    if N < 1:
        raise ValueError("window must be positive")
    if probe_limit < 0:
        raise ValueError("probe_limit must be nonnegative")
    exact = f.period is not None
    last = min(probe_limit, f.period - 1) if exact else probe_limit
    points, spacing = _grid(f, grid_spacing)
    xs = []
    table = []
    ks = np.arange(0, last + N)
    for x in points:
        vals = f.values(ks, x)
        if absolute:
            terms = np.max(np.abs(vals), axis=1)
            row = [terms[s:s + N].sum() for s in range(last + 1)]
        else:
            row = [np.max(np.abs(vals[s:s + N].sum(axis=0))) for s in range(last + 1)]
        xs.append(x)
        table.append(row)
    table = np.asarray(table, dtype=float)
    value = float(table.max())
    hits = np.argwhere(table == value)
    # smallest start index first, then lexicographic grid point
    xi, n = min(hits.tolist(), key=lambda ij: (ij[1], ij[0]))
    upper = None
    if exact and f.lipschitz is not None:
        upper = value + N * f.lipschitz * spacing / 2
    return WindowNormReport(
        window=N,
        value=value,
        witness_n=int(n),
        witness_x=np.asarray(xs[xi]),
        grid_spacing=spacing,
        probe_limit=int(last),
        exact_in_n=exact,
        upper_bound=upper,
        absolute=absolute,
    )


def window_sum_norm(f: TimeField, N: int, grid_spacing: float, probe_limit: int) -> WindowNormReport:
    """sup over grid x and starts n of |sum_{k=n}^{n+N-1} f(k, x)|.

    For a field with a declared period the starts are clamped to one period
    and the sup over n is exact; otherwise the value is a lower bound.
    """
    return _scan(f, N, grid_spacing, probe_limit, absolute=False)


def window_abs_norm(f: TimeField, N: int, grid_spacing: float, probe_limit: int) -> WindowNormReport:
    """As :func:`window_sum_norm` with |f(k, x)| summed (no cancellation)."""
    return _scan(f, N, grid_spacing, probe_limit, absolute=True)


@dataclass
class QuantizedTrajectory:
    states: np.ndarray
    delta: float
    value_count: int
    max_error: float


def quantize_to_net(traj: Trajectory, delta: float) -> QuantizedTrajectory:
    """Round each coordinate to the nearest multiple of ``delta`` inside [-K, K].

    A rounded value that would land outside [-K, K] moves one grid step toward
    zero, so every state stays on the delta-grid and inside the ball.
    """
    if traj.exited is not None:
        raise ValueError("cannot quantize a trajectory that left the domain")
    if not delta > 0:
        raise ValueError("delta must be positive")
    K = traj.domain.radius
    k = np.round(traj.states / delta)
    k = np.where(k * delta > K, k - 1, k)
    k = np.where(k * delta < -K, k + 1, k)
    q = k * delta
    err = float(np.max(np.abs(q - traj.states))) if len(q) else 0.0
    count = len({tuple(row) for row in q.tolist()})
    return QuantizedTrajectory(q, float(delta), count, err)


@dataclass
class TrajectorySumReport:
    lhs: float
    holds: bool
    witness_n: int


def trajectory_sums(f: TimeField, traj: Trajectory, N: int) -> np.ndarray:
    """Norms of sum_{k=n}^{n+N-1} f(k, x(k)) for every admissible start n (absolute time)."""
    if len(traj) < N:
        raise ValueError(f"trajectory has {len(traj)} states, fewer than the window {N}")
    if traj.exited is not None:
        raise ValueError("trajectory left the domain")
    vals = np.array([f.raw(traj.start + j, s) for j, s in enumerate(traj.states)])
    return np.array([np.max(np.abs(vals[s:s + N].sum(axis=0))) for s in range(len(traj) - N + 1)])


def lemma_check(f: TimeField, traj: Trajectory, N: int, eta: float) -> TrajectorySumReport:
    sums = trajectory_sums(f, traj, N)
    i = int(np.argmax(sums))
    lhs = float(sums[i])
    return TrajectorySumReport(lhs, lhs < eta, traj.start + i)


def _check_forcing(forcing, L) -> np.ndarray:
    f = np.asarray(forcing, dtype=float)
    if f.ndim != 1:
        raise ValueError("forcing must be a sequence of reals")
    if np.any(f < 0) or not np.all(np.isfinite(f)):
        raise ValueError("forcing values must be finite and nonnegative")
    if not L >= 0:
        raise ValueError("L must be nonnegative")
    return f


def gronwall_envelope(forcing: Sequence[float], L: float) -> np.ndarray:
    """b(n) = f(n) + L sum_{k<n} f(k) (1+L)^(n-1-k), via an O(n) recurrence.

    Any d with d(n) <= L sum_{k<n} d(k) + f(n) satisfies d <= b.
    """
    f = _check_forcing(forcing, L)
    b = np.empty_like(f)
    if len(f) == 0:
        return b
    b[0] = f[0]
    for n in range(len(f) - 1):
        b[n + 1] = f[n + 1] + (1 + L) * (b[n] - f[n]) + L * f[n]
    return b


def gronwall_envelope_direct(forcing: Sequence[float], L: float) -> np.ndarray:
    """The same envelope by the O(n^2) double sum."""
    f = _check_forcing(forcing, L)
    return np.array(
        [f[n] + L * sum(f[k] * (1 + L) ** (n - 1 - k) for k in range(n)) for n in range(len(f))]
    )


def perturbation_forcing(R: TimeField, traj: Trajectory) -> np.ndarray:
    """f(n) = |sum_{k=n0}^{n-1} R(k, x(k))| along ``traj``, one value per state."""
    out = np.zeros(len(traj))
    total = np.zeros(R.dim)
    for j in range(len(traj) - 1):
        total = total + R.raw(traj.start + j, traj.states[j])
        out[j + 1] = sup_norm(total)
    return out
