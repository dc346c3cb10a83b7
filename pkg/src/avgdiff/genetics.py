"""Two-allele selection with periodically varying genotype fitness.

Genotypes AA, Aa, aa have fitness 1 - eps*alpha(n), 1, 1 - eps*beta(n), with
alpha and beta given as explicit period-l value lists.  The allele frequency
p_n of A obeys

    Delta p = eps p (1-p) (beta - (alpha+beta) p) / (1 - eps*[(alpha+beta) p^2 + 2 beta p - beta])

(``form="plus-bp"``, named for the +2 beta p term in the bracket).  Deriving
the step from the genotype fitnesses gives the mean fitness
1 - eps*[(alpha+beta) p^2 - 2 beta p + beta] instead; that denominator is
available as ``form="mean-fitness"``.  The two agree to O(eps^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dynamics import (
    PeriodicOrbit,
    ScaleMode,
    find_periodic_orbit,
    is_stable,
    orbit_by_iteration,
)
from .errors import NonConvergence, ParameterError, SingularJacobian
from .fields import AveragedField, Domain, TimeField
from .stability import HOLDS, HYPOTHESIS, VIOLATED, TheoremReport

FORMS = ("plus-bp", "mean-fitness")
GENETICS_DOMAIN = Domain(1, 1.0)


@dataclass(frozen=True)
class SelectionParams:
    eps: float
    alpha_seq: tuple
    beta_seq: tuple
    form: str = "plus-bp"
    period: int = field(init=False)
    alpha0: float = field(init=False)
    beta0: float = field(init=False)

    def __post_init__(self):
        a = tuple(float(v) for v in self.alpha_seq)
        b = tuple(float(v) for v in self.beta_seq)
        if not a or len(a) != len(b):
            raise ParameterError("alpha and beta must be nonempty lists of equal length")
        if not all(math.isfinite(v) for v in a + b):
            raise ParameterError("fitness values must be finite")
        if not self.eps > 0:
            raise ParameterError(f"eps must be positive, got {self.eps}")
        if self.form not in FORMS:
            raise ParameterError(f"unknown form {self.form!r}")
        object.__setattr__(self, "alpha_seq", a)
        object.__setattr__(self, "beta_seq", b)
        object.__setattr__(self, "eps", float(self.eps))
        object.__setattr__(self, "period", len(a))
        object.__setattr__(self, "alpha0", sum(a) / len(a))
        object.__setattr__(self, "beta0", sum(b) / len(b))
        if not (self.alpha0 > 0 and self.beta0 > 0):
            raise ParameterError(
                f"fitness means must be positive (alpha0={self.alpha0}, beta0={self.beta0})"
            )
        worst = self.eps * max(_max_abs_bracket(ai, bi, self.form) for ai, bi in zip(a, b))
        if not worst < 1:
            raise ParameterError(
                f"eps * max|bracket| = {worst:.4g} >= 1: denominator can vanish; reduce eps"
            )


def _bracket(a, b, p, form):
    if form == "plus-bp":
        return (a + b) * p * p + 2 * b * p - b
    return (a + b) * p * p - 2 * b * p + b


def _max_abs_bracket(a, b, form) -> float:
    ps = np.linspace(0.0, 1.0, 1001)
    candidates = [np.max(np.abs(_bracket(a, b, ps, form)))]
    if a + b != 0:
        vertex = (-b if form == "plus-bp" else b) / (a + b)
        if 0 <= vertex <= 1:
            candidates.append(abs(_bracket(a, b, vertex, form)))
    return float(max(candidates))


def _rhs(a, b, eps, p, form):
    denom = 1 - eps * _bracket(a, b, p, form)
    if denom <= 0:
        raise ParameterError(f"nonpositive denominator {denom} at p={p}")
    return eps * p * (1 - p) * (b - (a + b) * p) / denom


def selection_rhs(n: int, p: float, params: SelectionParams) -> float:
    """Delta p_n at generation n."""
    if not 0 <= p <= 1:
        raise ValueError(f"allele frequency must lie in [0, 1], got {p}")
    i = n % params.period
    return _rhs(params.alpha_seq[i], params.beta_seq[i], params.eps, p, params.form)


def averaged_selection_rhs(p: float, params: SelectionParams) -> float:
    return params.eps * p * (1 - p) * (params.beta0 - (params.alpha0 + params.beta0) * p)


def selection_equilibrium(params: SelectionParams) -> float:
    return params.beta0 / (params.alpha0 + params.beta0)


def genotype_step(n: int, p: float, params: SelectionParams) -> float:
    """Next frequency computed directly from genotype fitnesses (independent of the closed form)."""
    i = n % params.period
    w_AA = 1 - params.eps * params.alpha_seq[i]
    w_aa = 1 - params.eps * params.beta_seq[i]
    q = 1 - p
    wbar = p * p * w_AA + 2 * p * q + q * q * w_aa
    return (p * p * w_AA + p * q) / wbar


def selection_field(params: SelectionParams, slow: bool = False) -> TimeField:
    """The selection recursion as a TimeField on [-1, 1].

    ``slow=False`` gives Delta p = rhs (unit scale); ``slow=True`` gives
    X = rhs / eps, for use with the epsilon scale.
    """
    a, b, eps, form, l = params.alpha_seq, params.beta_seq, params.eps, params.form, params.period
    div = eps if slow else 1.0

    def func(n, x):
        i = n % l
        v = _rhs(a[i], b[i], eps, x[0], form)
        return [v / div] if slow else [v]

    return TimeField(GENETICS_DOMAIN, func, period=l)


def averaged_selection_field(params: SelectionParams, slow: bool = False) -> AveragedField:
    div = params.eps if slow else 1.0
    return AveragedField(GENETICS_DOMAIN, lambda x: [averaged_selection_rhs(x[0], params) / div])


def simulate_selection(params: SelectionParams, p0: float, steps: int, n0: int = 0) -> np.ndarray:
    """p_{n0}, ..., p_{n0+steps}; bit-identical to iterating ``selection_field`` on the unit scale."""
    a, b, eps, form, l = params.alpha_seq, params.beta_seq, params.eps, params.form, params.period
    out = np.empty(steps + 1)
    p = float(p0)
    out[0] = p
    for j in range(steps):
        i = (n0 + j) % l
        p = p + _rhs(a[i], b[i], eps, p, form)
        out[j + 1] = p
    return out


def simulate_averaged_selection(params: SelectionParams, p0: float, steps: int) -> np.ndarray:
    eps, a0, b0 = params.eps, params.alpha0, params.beta0
    out = np.empty(steps + 1)
    p = float(p0)
    out[0] = p
    for j in range(steps):
        p = p + eps * p * (1 - p) * (b0 - (a0 + b0) * p)
        out[j + 1] = p
    return out


def locate_orbit(params: SelectionParams, tol: float = 1e-12, fallback_steps: int = 100_000):
    """Periodic orbit seeded at the averaged equilibrium; falls back to long-run iteration."""
    f = selection_field(params)
    unit = ScaleMode.unit()
    guess = [selection_equilibrium(params)]
    try:
        return find_periodic_orbit(f, unit, params.period, guess, tol), False
    except (NonConvergence, SingularJacobian):
        return orbit_by_iteration(f, unit, params.period, guess, fallback_steps), True


@dataclass
class GeneticsResult:
    params: SelectionParams
    orbit: PeriodicOrbit
    stable: bool
    fallback: bool
    report: TheoremReport
    rows: list
    trajectories: Optional[np.ndarray] = None  # shape (horizon+1, len(p0_list))


def selection_experiment(
    params: SelectionParams,
    p0_list: Sequence[float],
    delta_target: float,
    horizon: int,
    entry_radius: float = 0.1,
    transient: Optional[int] = None,
    tol: float = 1e-12,
    keep_trajectories: bool = False,
) -> GeneticsResult:
    """Locate and classify the l-periodic orbit, then compare trajectories with it and with the averaged solution.

    The averaged comparison runs over the whole horizon; the orbit comparison
    over generations ``transient`` .. ``horizon`` (default horizon // 10).  The
    outcome considers only starts with |p0 - pbar| < entry_radius.
    """
    p0_list = [float(p) for p in p0_list]
    if any(not 0 < p < 1 for p in p0_list):
        raise ParameterError("initial frequencies must lie in the open interval (0, 1)")
    transient = horizon // 10 if transient is None else transient
    if not 0 <= transient <= horizon:
        raise ValueError("transient must lie in [0, horizon]")
    pbar = selection_equilibrium(params)
    orbit, fallback = locate_orbit(params, tol)
    stable = is_stable(orbit)
    cycle = orbit.states[:, 0]
    phase_idx = (np.arange(horizon + 1) - orbit.anchor_phase) % params.period
    orbit_track = cycle[phase_idx]

    rows = []
    trajs = []
    flags = [] if stable else ["unstable-orbit"]
    worst = 0.0
    first = None
    for p0 in p0_list:
        exact = simulate_selection(params, p0, horizon)
        avg = simulate_averaged_selection(params, p0, horizon)
        if keep_trajectories:
            trajs.append(exact)
        d_avg = np.abs(exact - avg)
        d_orb = np.abs(exact - orbit_track)[transient:]
        inside = abs(p0 - pbar) < entry_radius
        rows.append(
            dict(
                p0=p0,
                entry=inside,
                avg_deviation=float(d_avg.max()),
                orbit_deviation=float(d_orb.max()),
            )
        )
        if inside:
            worst = max(worst, float(d_avg.max()), float(d_orb.max()))
            bad = [int(i) for i in np.flatnonzero(d_avg >= delta_target)[:1]]
            bad += [transient + int(i) for i in np.flatnonzero(d_orb >= delta_target)[:1]]
            if bad:
                first = min(bad) if first is None else min(first, *bad)
    if flags:
        outcome = HYPOTHESIS
    elif first is not None:
        outcome = VIOLATED
    else:
        outcome = HOLDS
    report = TheoremReport(
        "genetics",
        dict(eps=params.eps, period=params.period, pbar=pbar, horizon=horizon, transient=transient),
        outcome,
        worst,
        delta_target,
        first,
        flags,
    )
    return GeneticsResult(
        params,
        orbit,
        stable,
        fallback,
        report,
        rows,
        np.column_stack(trajs) if keep_trajectories else None,
    )
