"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line."""

import hashlib
import math
import time
from pathlib import Path

import numpy as np

from avgdiff import stock
from avgdiff.cli import main
from avgdiff.dynamics import ScaleMode, iterate
from avgdiff.fields import scale_field
from avgdiff.genetics import SelectionParams, locate_orbit, selection_experiment
from avgdiff.norms import gronwall_envelope, lemma_check, window_abs_norm, window_sum_norm
from avgdiff.stability import (
    HOLDS,
    Reference,
    averaging_closeness_sweep,
    estimate_uas,
    staging_check,
    total_stability_check,
    vanishing_rhs_sweep,
)

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def test_criterion_1_genetics_orbit(criterion):
    t0 = time.perf_counter()
    params = SelectionParams(0.01, (0.5, 1.5), (3.5, 2.5))
    orbit, fallback = locate_orbit(params)
    p0s = 0.75 + np.linspace(-0.099, 0.099, 9)
    res = selection_experiment(params, p0s, delta_target=0.02, horizon=100_000, transient=10_000)
    elapsed = time.perf_counter() - t0
    near = max(float(np.max(np.abs(orbit.states[:, 0] - 0.75))), 0.0)
    worst = max(r["orbit_deviation"] for r in res.rows)
    checks = [
        orbit.residual <= 1e-10,
        not fallback,
        near < 0.05,
        max(orbit.multipliers) < 1,
        all(r["entry"] for r in res.rows),
        worst < 0.02,
        elapsed < 10,
    ]
    detail = (
        f"residual={orbit.residual:.2e} states={orbit.states[:, 0].round(6).tolist()} "
        f"multiplier={max(orbit.multipliers):.5f} orbit_dev={worst:.2e} t={elapsed:.2f}s"
    )
    assert criterion(1, "genetics 2-periodic orbit", all(checks), detail)


def _tight_solution(f, L):
    d = np.empty_like(f)
    for n in range(len(f)):
        d[n] = L * d[:n].sum() + f[n]
    return d


def test_criterion_2_discrete_gronwall(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240501)
    worst_excess = 0.0
    worst_rel = 0.0
    for _ in range(500):
        L = float(rng.uniform(0, 1))
        horizon = int(rng.integers(1, 51))
        f = rng.uniform(0, 1, horizon)
        env = gronwall_envelope(f, L)
        d = _tight_solution(f, L)
        worst_excess = max(worst_excess, float(np.max((d - env) / np.maximum(1.0, env))))
        c = float(rng.uniform(0.01, 1))
        closed = c * (1 + L) ** np.arange(horizon)
        const = gronwall_envelope(np.full(horizon, c), L)
        worst_rel = max(worst_rel, float(np.max(np.abs(const - closed) / closed)))
    elapsed = time.perf_counter() - t0
    ok = worst_excess <= 1e-9 and worst_rel <= 1e-9 and elapsed < 5
    detail = f"max excess={worst_excess:.2e} closed-form rel err={worst_rel:.2e} t={elapsed:.2f}s"
    assert criterion(2, "discrete Gronwall envelope", ok, detail)


def test_criterion_3_trajectory_sum_scaling(criterion):
    t0 = time.perf_counter()
    R = stock.mixed_zero_mean_perturbation()
    traj = iterate(stock.linear_decay(0.2, radius=1.0), ScaleMode.unit(), 0, [0.8], 60)
    N = 5  # not a multiple of the period 6, so the window sums do not cancel
    base_s = window_sum_norm(R, N, 0.05, 12).value
    base_l = lemma_check(R, traj, N, 1.0).lhs
    errs = []
    for s in (1.0, 0.5, 0.25):
        Rs = scale_field(R, s)
        errs.append(abs(window_sum_norm(Rs, N, 0.05, 12).value - s * base_s))
        errs.append(abs(lemma_check(Rs, traj, N, 1.0).lhs - s * base_l))
    elapsed = time.perf_counter() - t0
    ok = max(errs) <= 1e-12 and base_s > 0 and base_l > 0 and elapsed < 2
    detail = f"S={base_s:.6g} lhs={base_l:.6g} max err={max(errs):.1e} t={elapsed:.2f}s"
    assert criterion(3, "window-sum norm and trajectory sums scale linearly", ok, detail)


def test_criterion_4_averaging_order(criterion):
    t0 = time.perf_counter()
    reports = averaging_closeness_sweep(
        stock.alternating_forced_decay(), [0.5], [0.1, 0.05, 0.025], alpha=1.0, beta=0.0
    )
    elapsed = time.perf_counter() - t0
    devs = [r.max_deviation for r in reports]
    ratios = [b / a for a, b in zip(devs, devs[1:])]
    ok = all(0.3 <= q <= 0.7 for q in ratios) and all(b < a for a, b in zip(devs, devs[1:])) and elapsed < 5
    detail = f"deviations={[round(d, 6) for d in devs]} ratios={[round(q, 4) for q in ratios]} t={elapsed:.2f}s"
    assert criterion(4, "averaging deviation halves with eps", ok, detail)


def test_criterion_5_one_over_n_trend(criterion):
    t0 = time.perf_counter()
    reports = vanishing_rhs_sweep(
        stock.alternating_forced_decay(), [0.5], [10, 100, 1000], alpha=1.0, beta=0.0, horizon=10_000
    )
    elapsed = time.perf_counter() - t0
    devs = [r.max_deviation for r in reports]
    ok = all(b < a for a, b in zip(devs, devs[1:])) and elapsed < 5
    detail = f"deviations={[float(f'{d:.6g}') for d in devs]} t={elapsed:.2f}s"
    assert criterion(5, "1/n deviation decreases with start index", ok, detail)


def test_criterion_6_total_stability_staging(criterion):
    t0 = time.perf_counter()
    X = stock.linear_decay(0.5, radius=1.0)
    R = stock.alternating_constant(0.01)
    psi = Reference(X, ScaleMode.unit(), [0.0])
    eps = 0.1
    entry = estimate_uas(X, ScaleMode.unit(), [0.0], 0, [eps], horizon=512).lookup(eps)
    report = total_stability_check(
        X, R, psi, eps, entry.delta, 1e-3, 2, n0_probes=(0, 3), horizon=10_000, grid_spacing=0.1, probe_limit=10
    )
    blocks = 10_000 // entry.T
    st = staging_check(X, R, psi, eps, entry.delta, entry.T, blocks)
    elapsed = time.perf_counter() - t0
    ok = report.outcome == HOLDS and report.params["snorm"] == 0 and st.holds and elapsed < 5
    detail = (
        f"delta={entry.delta} T={entry.T} max_dev={report.max_deviation:.4g} "
        f"blocks={blocks} max_gap={st.max_gap:.3g} t={elapsed:.2f}s"
    )
    assert criterion(6, "total stability with block staging", ok, detail)


def test_criterion_7_uas_rate(criterion):
    t0 = time.perf_counter()
    analytic = math.ceil(math.log(0.5) / math.log(0.9))
    prof = estimate_uas(stock.linear_decay(1.0, radius=1.0), ScaleMode.epsilon(0.1), [0.0], 0, [0.1], horizon=512)
    entry = prof.lookup(0.1)
    elapsed = time.perf_counter() - t0
    ok = entry is not None and analytic / 2 <= entry.T <= 2 * analytic and elapsed < 2
    detail = f"T={entry.T if entry else None} analytic={analytic} t={elapsed:.2f}s"
    assert criterion(7, "UAS estimator recovers the contraction time", ok, detail)


def test_criterion_8_snorm_contrast(criterion):
    t0 = time.perf_counter()
    f = stock.zero_mean_period_two()
    h = 0.1
    xs = np.linspace(-1, 1, 21)
    one_period = max(max(abs(f(0, x)[0]), abs(f(0, x)[0] + f(1, x)[0])) for x in xs)
    ok = True
    lines = []
    for N in (1, 2, 10, 101, 1000, 10_000):
        s = window_sum_norm(f, N, h, 2).value
        a = window_abs_norm(f, N, h, 2).value / N
        ok &= s <= one_period + 1e-12 and abs(a - 2.0) <= 0.02
        lines.append(f"N={N}:S={s:g},abs/N={a:g}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 5
    assert criterion(8, "window-sum norm bounded, absolute norm linear", bool(ok), " ".join(lines) + f" t={elapsed:.2f}s")


def _digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_criterion_9_determinism(criterion, tmp_path):
    files = sorted(SCENARIOS.glob("*.yaml"))
    same = True
    slowest = 0.0
    for cfg in files:
        t0 = time.perf_counter()
        digests = []
        for run in ("a", "b"):
            prefix = tmp_path / run / cfg.stem
            prefix.parent.mkdir(exist_ok=True)
            command = cfg.read_text().split("command:")[1].split()[0]
            code = main([command, "--config", str(cfg), "--out", str(prefix)])
            assert code in (0, 1, 2)
            digests.append((_digest(prefix.with_suffix(".csv")), _digest(Path(f"{prefix}.summary.txt"))))
        same &= digests[0] == digests[1]
        slowest = max(slowest, time.perf_counter() - t0)
    ok = bool(same) and len(files) >= 8 and slowest < 10
    detail = f"{len(files)} scenarios, slowest pair of runs {slowest:.2f}s"
    assert criterion(9, "bundled scenarios are byte-reproducible", ok, detail)
