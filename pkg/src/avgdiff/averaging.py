"""Cesaro time averages of a field and the uniformity of the averaging limit."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import AveragingDivergence
from .fields import AveragedField, TimeField, sup_norm

START_WINDOW = 64
MAX_WINDOW = 2**20


@dataclass
class AverageEstimate:
    x: np.ndarray
    value: np.ndarray
    window: int
    start: int
    cauchy_gap: float


def _window_total(f: TimeField, x: np.ndarray, n: int, N: int, total: Optional[np.ndarray] = None) -> np.ndarray:
    # left-to-right accumulation, continuing ``total`` if given
    total = np.zeros(f.dim) if total is None else total.copy()
    for k in range(n, n + N):
        total = total + f.raw(k, x)
    return total


def cesaro_average(f: TimeField, x, n: int, N: int) -> AverageEstimate:
    """Mean of X(k, x) over k = n .. n+N-1, with the change upon doubling N."""
    if N < 1:
        raise ValueError("window must be positive")
    x = f.domain.check(x)
    first = _window_total(f, x, n, N)
    both = _window_total(f, x, n + N, N, first)
    value = first / N
    return AverageEstimate(x, value, N, n, sup_norm(value - both / (2 * N)))


def period_average(f: TimeField, x) -> np.ndarray:
    if f.period is None:
        raise ValueError("field has no declared period")
    x = f.domain.check(x)
    return _window_total(f, x, 0, f.period) / f.period


def estimate_average(f: TimeField, x, tol: float = 1e-9) -> np.ndarray:
    """Constructive Xbar(x).

    Declared-period fields return the exact one-period mean.  Otherwise N is
    doubled from 64 until the Cauchy gap is within ``tol`` at two consecutive
    doublings.
    """
    if f.period is not None:
        return period_average(f, x)
    x = f.domain.check(x)
    N = START_WINDOW
    hits = 0
    total = _window_total(f, x, 0, N)
    while True:
        doubled = _window_total(f, x, N, N, total)
        gap = sup_norm(total / N - doubled / (2 * N))
        hits = hits + 1 if gap <= tol else 0
        total, N = doubled, 2 * N
        if hits >= 2:
            return total / N
        if N > MAX_WINDOW:
            raise AveragingDivergence(
                f"Cesaro means did not settle to {tol:g} by N={N} (last gap {gap:.3e}); "
                "the field may have no uniform average"
            )


def averaged_field(f: TimeField, tol: float = 1e-9) -> AveragedField:
    """Xbar as an AveragedField.  Averaging preserves the bound and Lipschitz constant."""
    return AveragedField(
        f.domain,
        lambda x: estimate_average(f, x, tol),
        bound=f.bound,
        lipschitz=f.lipschitz,
    )


def uniformity_gap(f: TimeField, avg: AveragedField, x, N: int, probe_starts: Iterable[int]) -> float:
    """max over probe starts n of |mean over [n, n+N) - Xbar(x)|.

    Exact sup over all n for a periodic field whose probes cover one period;
    otherwise a lower bound.
    """
    probes = list(probe_starts)
    if not probes:
        raise ValueError("probe_starts must be nonempty")
    target = avg(x)
    return max(sup_norm(cesaro_average(f, x, n, N).value - target) for n in probes)
