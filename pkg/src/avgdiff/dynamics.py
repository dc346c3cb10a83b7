"""Iteration of Delta x(n) = s(n) X(n, x) and periodic orbits of the period map."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    DomainViolation,
    NonConvergence,
    NumericOverflow,
    SingularJacobian,
    UnsupportedScale,
)
from .fields import Domain, TimeField, sup_norm

UNIT = "unit"
EPSILON = "epsilon"
ONE_OVER_N = "one_over_n"


@dataclass(frozen=True)
class ScaleMode:
    kind: str = UNIT
    eps: Optional[float] = None

    def __post_init__(self):
        if self.kind not in (UNIT, EPSILON, ONE_OVER_N):
            raise ValueError(f"unknown scale kind {self.kind!r}")
        if self.kind == EPSILON:
            if self.eps is None or not self.eps > 0:
                raise ValueError(f"epsilon scale needs eps > 0, got {self.eps!r}")
        elif self.eps is not None:
            raise ValueError(f"scale kind {self.kind!r} takes no eps")

    @classmethod
    def unit(cls) -> "ScaleMode":
        return cls(UNIT)

    @classmethod
    def epsilon(cls, eps: float) -> "ScaleMode":
        return cls(EPSILON, float(eps))

    @classmethod
    def one_over_n(cls) -> "ScaleMode":
        return cls(ONE_OVER_N)

    def factor(self, n: int) -> float:
        if self.kind == UNIT:
            return 1.0
        if self.kind == EPSILON:
            return self.eps
        return 1.0 / n

    @property
    def homogeneous(self) -> bool:
        return self.kind != ONE_OVER_N


@dataclass
class Trajectory:
    start: int
    states: np.ndarray  # shape (len, m)
    scale: ScaleMode
    domain: Domain
    exited: Optional[int] = None

    def __len__(self):
        return len(self.states)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.start, self.start + len(self.states))

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def rows(self):
        header = ["n"] + [f"x{i + 1}" for i in range(self.states.shape[1])]
        return header, [[int(n), *s.tolist()] for n, s in zip(self.times, self.states)]


def step(f: TimeField, scale: ScaleMode, n: int, x: np.ndarray) -> np.ndarray:
    """One exact step x(n+1) = x(n) + s(n) X(n, x(n))."""
    return x + scale.factor(n) * f.raw(n, x)


def iterate(f: TimeField, scale: ScaleMode, n0: int, x0, horizon: int) -> Trajectory:
    """Run the recursion for ``horizon`` steps, stopping at the first state outside B(K).

    A state that leaves the domain is stored and its index recorded in
    ``exited``; it is never fed back into the field.
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if n0 < 0:
        raise ValueError("n0 must be nonnegative")
    if scale.kind == ONE_OVER_N and n0 < 1:
        raise ValueError("one_over_n scale needs n0 >= 1")
    x = f.domain.check(x0)
    radius = f.domain.radius
    states = [x]
    exited = None
    factor, raw = scale.factor, f.raw
    for j in range(horizon):
        n = n0 + j
        x = x + factor(n) * raw(n, x)
        # plain-float checks are much cheaper than numpy reductions on tiny states
        vals = x.tolist()
        if not all(map(math.isfinite, vals)):
            raise NumericOverflow(j + 1)
        states.append(x)
        if max(map(abs, vals)) > radius:
            exited = j + 1
            break
    return Trajectory(n0, np.array(states), scale, f.domain, exited)


def period_map(f: TimeField, scale: ScaleMode, phase: int, x, l: int) -> np.ndarray:
    """The l-step return map started at time index ``phase``."""
    _check_period_args(f, scale, l)
    traj = iterate(f, scale, phase, x, l)
    if traj.exited is not None:
        raise DomainViolation(sup_norm(traj.states[traj.exited]), f.domain.radius)
    return traj.final


def _check_period_args(f: TimeField, scale: ScaleMode, l: int):
    if not scale.homogeneous:
        raise UnsupportedScale("period maps are undefined for the one_over_n scale")
    if l < 1:
        raise ValueError("period must be positive")
    if f.period is None:
        raise ValueError("field has no declared period; cannot form a period map")
    if l % f.period:
        raise ValueError(f"orbit period {l} is not a multiple of the field period {f.period}")


def fd_step(x: np.ndarray) -> float:
    return max(1e-6, 1e-6 * sup_norm(x))


def period_map_jacobian(f: TimeField, scale: ScaleMode, phase: int, x: np.ndarray, l: int) -> np.ndarray:
    """Central finite-difference Jacobian of the period map, one-sided near the boundary."""
    m = f.domain.dim
    h = fd_step(x)
    base = None
    J = np.empty((m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = h
        try:
            J[:, j] = (period_map(f, scale, phase, x + e, l) - period_map(f, scale, phase, x - e, l)) / (2 * h)
        except DomainViolation:
            if base is None:
                base = period_map(f, scale, phase, x, l)
            try:
                J[:, j] = (period_map(f, scale, phase, x + e, l) - base) / h
            except DomainViolation:
                J[:, j] = (base - period_map(f, scale, phase, x - e, l)) / h
    return J


@dataclass
class PeriodicOrbit:
    period: int
    anchor_phase: int
    states: np.ndarray  # one period, shape (l, m)
    residual: float
    multipliers: list
    jacobian: np.ndarray = field(repr=False)
    fd_step: float = 0.0
    iterations: int = 0
    method: str = "newton"

    def state_at(self, n: int) -> np.ndarray:
        return self.states[(n - self.anchor_phase) % self.period]


def _orbit_at(f, scale, l, x, phase, iterations, method) -> PeriodicOrbit:
    traj = iterate(f, scale, phase, x, l)
    if traj.exited is not None:
        raise DomainViolation(sup_norm(traj.states[traj.exited]), f.domain.radius)
    J = period_map_jacobian(f, scale, phase, x, l)
    mults = sorted((float(abs(z)) for z in np.linalg.eigvals(J)), reverse=True)
    return PeriodicOrbit(
        period=l,
        anchor_phase=phase % l,
        states=traj.states[:l].copy(),
        residual=sup_norm(traj.final - x),
        multipliers=mults,
        jacobian=J,
        fd_step=fd_step(x),
        iterations=iterations,
        method=method,
    )


def _nearly_singular(A: np.ndarray) -> bool:
    # Phi_l - I is compared at the scale of I, so tiny singular values are singular even for 1x1
    sv = np.linalg.svd(A, compute_uv=False)
    return not sv[-1] > 1e-10 * max(1.0, sv[0])


def find_periodic_orbit(
    f: TimeField,
    scale: ScaleMode,
    l: int,
    guess,
    tol: float = 1e-12,
    phase: int = 0,
    max_iters: int = 50,
) -> PeriodicOrbit:
    """Newton's method on F(x) = Phi_l(x) - x with a finite-difference Jacobian."""
    _check_period_args(f, scale, l)
    x = f.domain.check(guess)
    m = f.domain.dim
    eye = np.eye(m)
    for it in range(max_iters + 1):
        F = period_map(f, scale, phase, x, l) - x
        res = sup_norm(F)
        if res <= tol:
            return _orbit_at(f, scale, l, x, phase, it, "newton")
        if it == max_iters:
            raise NonConvergence(f"Newton did not converge in {max_iters} iterations", res)
        J = period_map_jacobian(f, scale, phase, x, l) - eye
        if not np.all(np.isfinite(J)) or _nearly_singular(J):
            raise SingularJacobian(
                f"singular Jacobian of Phi_l - I at {x.tolist()}; try a different guess"
            )
        delta = np.linalg.solve(J, -F)
        lam = 1.0
        for _ in range(30):
            trial = x + lam * delta
            if f.domain.contains(trial):
                try:
                    period_map(f, scale, phase, trial, l)
                    break
                except DomainViolation:
                    pass
            lam *= 0.5
        else:
            raise NonConvergence("Newton step left the domain at every damping", res)
        x = trial
    raise AssertionError("unreachable")


def orbit_by_iteration(
    f: TimeField, scale: ScaleMode, l: int, x0, steps: int = 100_000, phase: int = 0
) -> PeriodicOrbit:
    """Long-run iteration: run ``steps`` (rounded up to a multiple of l) and read off one period."""
    _check_period_args(f, scale, l)
    steps = l * math.ceil(steps / l)
    traj = iterate(f, scale, phase, x0, steps)
    if traj.exited is not None:
        raise DomainViolation(sup_norm(traj.states[traj.exited]), f.domain.radius)
    return _orbit_at(f, scale, l, traj.final, phase, steps, "iteration")


def orbit_multipliers(orbit: PeriodicOrbit) -> list:
    return list(orbit.multipliers)


def is_stable(orbit: PeriodicOrbit, margin: float = 1e-6) -> bool:
    return max(orbit.multipliers) < 1.0 - margin
