"""Empirical uniform-asymptotic-stability constants and the theorem harnesses.

Deviations are sup norms, optionally restricted to a subset of coordinates
(partial-variable stability).  Infinite horizons are truncated to finite ones.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .averaging import averaged_field
from .dynamics import ScaleMode, Trajectory, iterate
from .errors import AveragingDivergence
from .fields import AveragedField, TimeField, add_fields, as_state
from .norms import window_sum_norm

HOLDS = "holds"
VIOLATED = "violated"
HYPOTHESIS = "hypothesis-violated"

SHELLS = (0.5, 0.9)


@dataclass
class Reference:
    """Generator for the reference solution psi(n, n0, xi0) of the unperturbed equation."""

    field: TimeField
    scale: ScaleMode
    xi0: np.ndarray

    def __post_init__(self):
        self.xi0 = as_state(self.xi0, self.field.dim)

    def solution(self, n0: int, horizon: int) -> Trajectory:
        return iterate(self.field, self.scale, n0, self.xi0, horizon)


def shell_points(center, radius: float, per_shell: int, seed: int = 0) -> np.ndarray:
    """Deterministic initial conditions on the sup-norm spheres |x - center| = s * radius, s in SHELLS.

    Each shell holds the 2m face centres plus ``per_shell`` scrambled Halton
    points projected radially onto the cube surface.
    """
    center = as_state(center)
    m = len(center)
    pts = []
    for s in SHELLS:
        r = s * radius
        for i in range(m):
            for sign in (1.0, -1.0):
                e = np.zeros(m)
                e[i] = sign * r
                pts.append(center + e)
        if per_shell:
            u = 2.0 * qmc.Halton(d=m, scramble=True, seed=seed).random(per_shell) - 1.0
            for v in u:
                top = np.max(np.abs(v))
                if top > 0:
                    pts.append(center + r * v / top)
    return np.array(pts)


def initial_conditions(center, radius: float, per_shell: int, seed: int = 0) -> np.ndarray:
    """The centre itself followed by the shell points (centre first: the matched start)."""
    center = as_state(center)
    if radius <= 0:
        return center[None, :]
    return np.vstack([center[None, :], shell_points(center, radius, per_shell, seed)])


def deviation(a: Trajectory, b: Trajectory, subset: Optional[Sequence[int]] = None) -> np.ndarray:
    """Per-step sup-norm distance between two trajectories over their common length."""
    k = min(len(a), len(b))
    d = a.states[:k] - b.states[:k]
    if subset is not None:
        d = d[:, list(subset)]
    return np.max(np.abs(d), axis=1)


def _subset(var_subset, dim) -> Optional[list]:
    if var_subset is None:
        return None
    idx = sorted(set(int(i) for i in var_subset))
    if not idx or idx[0] < 0 or idx[-1] >= dim:
        raise ValueError(f"var_subset {var_subset!r} must index coordinates 0..{dim - 1}")
    return idx


# -- UAS estimation ------------------------------------------------------------


@dataclass
class StabilityEntry:
    eps: float
    delta: float
    T: int


@dataclass
class StabilityProfile:
    reference: Reference
    entries: list
    var_subset: Optional[list]
    probes: list
    samples_per_shell: int
    horizon: int
    failed: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    seed: int = 0

    def lookup(self, eps: float) -> Optional[StabilityEntry]:
        for e in self.entries:
            if e.eps == eps:
                return e
        return None


def t_schedule(horizon: int) -> list:
    out = []
    T = 8
    while T <= horizon:
        out.append(T)
        T *= 2
    return out


def estimate_uas(
    f: TimeField,
    scale: ScaleMode,
    xi0,
    n0: int,
    eps_grid: Sequence[float],
    probes: Optional[Sequence[int]] = None,
    samples_per_shell: int = 4,
    horizon: int = 512,
    var_subset=None,
    seed: int = 0,
    max_halvings: int = 12,
) -> StabilityProfile:
    """Search (delta, T) per eps so that starts within delta stay within eps/2 and are within delta/2 at T.

    delta halves from eps/2; T runs over 8, 16, 32, ... up to ``horizon``.
    An eps with no admissible pair is recorded in ``failed`` and flagged.
    """
    eps_grid = [float(e) for e in eps_grid]
    if any(b >= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise ValueError("eps_grid must be strictly descending")
    ref = Reference(f, scale, xi0)
    probes = list(probes) if probes else [n0]
    subset = _subset(var_subset, f.dim)
    Ts = t_schedule(horizon)
    if not Ts:
        raise ValueError("horizon must be at least 8")
    flags = []
    refs = {}
    rho = eps_grid[0]
    for p in probes:
        psi = ref.solution(p, horizon)
        refs[p] = psi
        if psi.exited is not None or np.max(np.abs(psi.states)) + rho > f.domain.radius:
            if "domain" not in flags:
                flags.append("domain")

    def admissible(eps, delta):
        ok = np.ones(len(Ts), dtype=bool)
        for x0 in shell_points(ref.xi0, delta, samples_per_shell, seed):
            if not f.domain.contains(x0):
                return None
            for p in probes:
                y = iterate(f, scale, p, x0, horizon)
                if y.exited is not None:
                    return None
                dev = deviation(y, refs[p], subset)
                if not dev.max() < eps / 2:
                    return None
                ok &= dev[Ts] < delta / 2
                if not ok.any():
                    return None
        return Ts[int(np.argmax(ok))]

    entries, failed = [], []
    for eps in eps_grid:
        delta = eps / 2
        for _ in range(max_halvings + 1):
            T = admissible(eps, delta)
            if T is not None:
                entries.append(StabilityEntry(eps, delta, T))
                break
            delta /= 2
        else:
            failed.append(eps)
    if failed:
        flags.append("stability-estimation")
    return StabilityProfile(ref, entries, subset, probes, samples_per_shell, horizon, failed, flags, seed)


def choose_window(eps: float) -> int:
    """N = [1/eps]."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if eps > 1:
        warnings.warn(f"eps={eps} > 1; using window 1", RuntimeWarning, stacklevel=2)
        return 1
    return math.floor(1.0 / eps)


# -- theorem harnesses ---------------------------------------------------------


@dataclass
class TheoremReport:
    theorem: str
    params: dict
    outcome: str
    max_deviation: float
    bound: float
    first_violation: Optional[int] = None
    hypothesis_flags: list = field(default_factory=list)
    matched_deviation: Optional[float] = None

    def row(self) -> dict:
        row = {"theorem": self.theorem}
        row.update(self.params)
        row.update(
            max_deviation=self.max_deviation,
            matched_deviation=self.matched_deviation if self.matched_deviation is not None else "",
            bound=self.bound,
            outcome=self.outcome,
            first_violation=self.first_violation if self.first_violation is not None else "",
            flags=";".join(self.hypothesis_flags),
        )
        return row


@dataclass
class _Tally:
    bound: float
    max_dev: float = 0.0
    first: Optional[int] = None
    matched: Optional[float] = None
    flags: list = field(default_factory=list)

    def flag(self, name):
        if name not in self.flags:
            self.flags.append(name)

    def add(self, exact: Trajectory, ref: Trajectory, subset, matched=False):
        if exact.exited is not None or ref.exited is not None:
            self.flag("domain")
        dev = deviation(exact, ref, subset)
        top = float(dev.max())
        if matched:
            self.matched = top if self.matched is None else max(self.matched, top)
        self.max_dev = max(self.max_dev, top)
        bad = np.flatnonzero(dev >= self.bound)
        if len(bad):
            n = exact.start + int(bad[0])
            self.first = n if self.first is None else min(self.first, n)

    def report(self, theorem, params) -> TheoremReport:
        if self.flags:
            outcome = HYPOTHESIS
        elif self.first is not None:
            outcome = VIOLATED
        else:
            outcome = HOLDS
        return TheoremReport(theorem, params, outcome, self.max_dev, self.bound, self.first, list(self.flags), self.matched)


def total_stability_check(
    X: TimeField,
    R: TimeField,
    psi: Reference,
    eps: float,
    eta1: float,
    eta2: float,
    N: int,
    n0_probes: Sequence[int] = (0,),
    ic_samples: int = 4,
    horizon: int = 1000,
    grid_spacing: Optional[float] = None,
    probe_limit: Optional[int] = None,
    var_subset=None,
    seed: int = 0,
) -> TheoremReport:
    """Perturbed equation x' = x + X + R against psi, starting within eta1 of xi0.

    The window-sum norm of R is checked against eta2 first; a failure is a
    hypothesis flag, not a conclusion violation.
    """
    if X.lipschitz is None:
        raise ValueError("X must declare a Lipschitz constant")
    grid_spacing = grid_spacing or X.domain.radius / 10
    probe_limit = probe_limit if probe_limit is not None else max(N, 100)
    snorm = window_sum_norm(R, N, grid_spacing, probe_limit)
    subset = _subset(var_subset, X.dim)
    tally = _Tally(bound=eps)
    if not snorm.value < eta2:
        tally.flag("snorm")
    perturbed = add_fields(X, R)
    unit = ScaleMode.unit()
    for p in n0_probes:
        ref = iterate(X, unit, p, psi.xi0, horizon)
        for i, x0 in enumerate(initial_conditions(psi.xi0, eta1, ic_samples, seed)):
            if not X.domain.contains(x0):
                tally.flag("domain")
                continue
            tally.add(iterate(perturbed, unit, p, x0, horizon), ref, subset, matched=i == 0)
    params = dict(eps=eps, eta1=eta1, eta2=eta2, N=N, snorm=snorm.value, L=X.lipschitz, horizon=horizon)
    return tally.report("T1", params)


@dataclass
class StagingReport:
    holds: bool
    T: int
    delta: float
    blocks: int
    max_gap: float  # max over blocks of |x - y|, y restarted from x at each block start
    max_block_deviation: float
    max_end_deviation: float

    @property
    def gap_ok(self) -> bool:
        return self.max_gap < self.delta / 2


def staging_check(
    X: TimeField,
    R: TimeField,
    psi: Reference,
    eps: float,
    delta: float,
    T: int,
    blocks: int,
    n0: int = 0,
    ic_samples: int = 4,
    seed: int = 0,
) -> StagingReport:
    """Block-by-block replay of the repetition argument on [n0 + jT, n0 + (j+1)T].

    Holds when every block stays within eps of psi and ends back inside the
    delta-ball.
    """
    perturbed = add_fields(X, R)
    unit = ScaleMode.unit()
    horizon = blocks * T
    ref = iterate(X, unit, n0, psi.xi0, horizon)
    max_gap = max_block = max_end = 0.0
    holds = True
    for x0 in initial_conditions(psi.xi0, delta, ic_samples, seed):
        x = iterate(perturbed, unit, n0, x0, horizon)
        if x.exited is not None:
            holds = False
            continue
        dev = deviation(x, ref)
        for j in range(blocks):
            a, b = j * T, (j + 1) * T
            y = iterate(X, unit, n0 + a, x.states[a], T)
            gap = float(np.max(np.abs(x.states[a:b + 1] - y.states)))
            max_gap = max(max_gap, gap)
            block = float(dev[a:b + 1].max())
            max_block = max(max_block, block)
            max_end = max(max_end, float(dev[b]))
            if not (block < eps and dev[b] < delta):
                holds = False
    return StagingReport(holds, T, delta, blocks, max_gap, max_block, max_end)


def _averaged_or_flag(f: TimeField, avg: Optional[AveragedField], tol: float):
    if avg is not None:
        return avg, None
    avg = averaged_field(f, tol)
    try:
        avg(np.zeros(f.dim))
    except AveragingDivergence:
        return None, "averaging-divergence"
    return avg, None


def averaging_closeness_sweep(
    f: TimeField,
    xi0,
    eps_list: Sequence[float],
    alpha: float,
    beta: float,
    horizon_constant: float = 10.0,
    n0: int = 0,
    ic_samples: int = 0,
    var_subset=None,
    avg: Optional[AveragedField] = None,
    tol: float = 1e-9,
    seed: int = 0,
) -> list:
    """Exact Delta x = eps X(n, x) against the averaged Delta x = eps Xbar(x), per eps.

    The exact solution starts from the centre xi0 (the matched start, whose
    deviation is reported separately) and from shell points within beta.
    Each eps runs for ceil(horizon_constant / eps) steps.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly descending")
    xi0 = as_state(xi0, f.dim)
    subset = _subset(var_subset, f.dim)
    avg, problem = _averaged_or_flag(f, avg, tol)
    reports = []
    for eps in eps_list:
        steps = math.ceil(horizon_constant / eps - 1e-9)
        params = dict(eps=eps, alpha=alpha, beta=beta, steps=steps, n0=n0)
        tally = _Tally(bound=alpha)
        if problem:
            tally.flag(problem)
            tally.max_dev = math.nan
            reports.append(tally.report("T2", params))
            continue
        scale = ScaleMode.epsilon(eps)
        try:
            ref = iterate(avg.as_time_field(), scale, n0, xi0, steps)
        except AveragingDivergence:
            tally.flag("averaging-divergence")
            tally.max_dev = math.nan
            reports.append(tally.report("T2", params))
            continue
        for i, x0 in enumerate(initial_conditions(xi0, beta, ic_samples, seed)):
            if not f.domain.contains(x0):
                tally.flag("domain")
                continue
            tally.add(iterate(f, scale, n0, x0, steps), ref, subset, matched=i == 0)
        reports.append(tally.report("T2", params))
    return reports


def vanishing_rhs_sweep(
    f: TimeField,
    xi0,
    n0_list: Sequence[int],
    alpha: float,
    beta: float,
    horizon: int,
    ic_samples: int = 0,
    var_subset=None,
    avg: Optional[AveragedField] = None,
    tol: float = 1e-9,
    seed: int = 0,
) -> list:
    """Delta x = X(n, x)/n against Delta x = Xbar(x)/n, one report per start index n0.

    The smallness parameter is 1/n0.
    """
    n0_list = [int(n) for n in n0_list]
    if any(n < 1 for n in n0_list):
        raise ValueError("n0_list entries must be >= 1")
    if any(b <= a for a, b in zip(n0_list, n0_list[1:])):
        raise ValueError("n0_list must be strictly ascending")
    xi0 = as_state(xi0, f.dim)
    subset = _subset(var_subset, f.dim)
    avg, problem = _averaged_or_flag(f, avg, tol)
    scale = ScaleMode.one_over_n()
    reports = []
    for n0 in n0_list:
        params = dict(n0=n0, smallness=1.0 / n0, alpha=alpha, beta=beta, steps=horizon)
        tally = _Tally(bound=alpha)
        if problem:
            tally.flag(problem)
            tally.max_dev = math.nan
            reports.append(tally.report("T3", params))
            continue
        ref = iterate(avg.as_time_field(), scale, n0, xi0, horizon)
        for i, x0 in enumerate(initial_conditions(xi0, beta, ic_samples, seed)):
            if not f.domain.contains(x0):
                tally.flag("domain")
                continue
            tally.add(iterate(f, scale, n0, x0, horizon), ref, subset, matched=i == 0)
        reports.append(tally.report("T3", params))
    return reports
