"""avgdiff <command> --config <path> [--out <prefix>] [--seed <u64>] [--threads <n>]

Writes ``<prefix>.csv`` and ``<prefix>.summary.txt``.  Exit status: 0 when
every check holds, 1 on a conclusion violation, 2 on a hypothesis or
validation failure, 3 on I/O errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import averaging, dynamics, genetics, norms, stability
from .csvio import dict_rows, render_csv
from .errors import AveragingDivergence, ParameterError
from .fields import field_from_spec
from .scenario import COMMANDS, ScenarioConfig, ScenarioError, parse_scenario

OK, VIOLATION, HYPOTHESIS, IO_ERROR = 0, 1, 2, 3


def format_value(v) -> str:
    # summaries use the shortest round-trip repr; CSVs keep 17 digits
    if hasattr(v, "dtype"):
        v = v.item()
    return repr(v) if isinstance(v, float) else str(v)


@dataclasses.dataclass
class RunResult:
    status: int
    header: list
    rows: list
    summary: list  # lines


def _status(outcomes, flags=False) -> int:
    if stability.VIOLATED in outcomes:
        return VIOLATION
    if flags or stability.HYPOTHESIS in outcomes:
        return HYPOTHESIS
    return OK


def _scale(cfg: ScenarioConfig) -> dynamics.ScaleMode:
    sc = cfg.get("scale", {"kind": "unit"})
    return dynamics.ScaleMode(sc["kind"], sc.get("eps"))


def _report_rows(reports):
    return dict_rows([r.row() for r in reports])


def _report_lines(reports):
    lines = []
    for r in reports:
        params = ", ".join(f"{k}={format_value(v)}" for k, v in r.params.items())
        lines.append(
            f"{r.theorem} [{params}]: {r.outcome}; max_deviation={format_value(r.max_deviation)}"
            f" bound={format_value(r.bound)}"
            + (f" first_violation={r.first_violation}" if r.first_violation is not None else "")
            + (f" flags={','.join(r.hypothesis_flags)}" if r.hypothesis_flags else "")
        )
    return lines


def run_simulate(cfg):
    f = field_from_spec(cfg.field)
    traj = dynamics.iterate(f, _scale(cfg), cfg.get("n0", 0), cfg.x0, cfg.horizon)
    header, rows = traj.rows()
    lines = [f"steps: {len(traj) - 1}"]
    if traj.exited is not None:
        lines.append(f"hypothesis flag: domain exit at step {traj.exited}")
        return RunResult(HYPOTHESIS, header, rows, lines)
    lines.append(f"final: {' '.join(format_value(v) for v in traj.final.tolist())}")
    return RunResult(OK, header, rows, lines)


def run_snorm(cfg):
    f = field_from_spec(cfg.field)
    out = []
    for N in cfg.windows:
        s = norms.window_sum_norm(f, N, cfg.grid_spacing, cfg.probe_limit)
        a = norms.window_abs_norm(f, N, cfg.grid_spacing, cfg.probe_limit)
        row = dict(N=N, sum_norm=s.value, abs_norm=a.value, witness_n=s.witness_n)
        row.update({f"witness_x{i + 1}": v for i, v in enumerate(s.witness_x.tolist())})
        row.update(
            exact_in_n=s.exact_in_n,
            sum_upper_bound=s.upper_bound if s.upper_bound is not None else "",
            grid_spacing=s.grid_spacing,
            probe_limit=s.probe_limit,
        )
        out.append(row)
    header, rows = dict_rows(out)
    lines = [f"N={r['N']}: S={format_value(r['sum_norm'])} S_abs={format_value(r['abs_norm'])}" for r in out]
    return RunResult(OK, header, rows, lines)


def run_average(cfg):
    f = field_from_spec(cfg.field)
    tol = cfg.get("tol", 1e-9)
    N = cfg.get("window", f.period or 64)
    probes = cfg.get("probe_starts", list(range(f.period or 1)))
    avg = averaging.averaged_field(f, tol)
    out = []
    try:
        for x in cfg.points:
            est = averaging.cesaro_average(f, x, 0, N)
            row = {f"x{i + 1}": v for i, v in enumerate(x)}
            row.update({f"avg{i + 1}": v for i, v in enumerate(avg(x).tolist())})
            row.update(window=N, cauchy_gap=est.cauchy_gap, uniformity_gap=averaging.uniformity_gap(f, avg, x, N, probes))
            out.append(row)
    except AveragingDivergence as exc:
        header, rows = dict_rows(out)
        return RunResult(HYPOTHESIS, header, rows, [f"hypothesis flag: averaging divergence: {exc}"])
    header, rows = dict_rows(out)
    return RunResult(OK, header, rows, [f"points: {len(out)}", f"window: {N}", f"tol: {tol:g}"])


def run_stability(cfg):
    f = field_from_spec(cfg.field)
    prof = stability.estimate_uas(
        f,
        _scale(cfg),
        cfg.xi0,
        cfg.get("n0", 0),
        cfg.eps_list,
        probes=cfg.probes,
        samples_per_shell=cfg.get("samples_per_shell", 4),
        horizon=cfg.get("horizon", 512),
        var_subset=cfg.var_subset,
        seed=cfg.seed,
    )
    out = [dict(eps=e.eps, delta=e.delta, T=e.T, status="found") for e in prof.entries]
    out += [dict(eps=e, delta="", T="", status="failed") for e in prof.failed]
    header, rows = dict_rows(out)
    lines = [f"eps={format_value(e.eps)}: delta={format_value(e.delta)} T={e.T}" for e in prof.entries]
    lines += [f"eps={format_value(e)}: no (delta, T) found" for e in prof.failed]
    if prof.flags:
        lines.append(f"hypothesis flags: {','.join(prof.flags)}")
    return RunResult(HYPOTHESIS if prof.flags else OK, header, rows, lines)


def run_theorem1(cfg):
    X = field_from_spec(cfg.field)
    R = field_from_spec(cfg.perturbation)
    unit = dynamics.ScaleMode.unit()
    psi = stability.Reference(X, unit, cfg.xi0)
    probes = cfg.get("probes", [0])
    lines = []
    eta1 = cfg.eta1
    entry = None
    if eta1 is None or cfg.stage_blocks:
        prof = stability.estimate_uas(
            X, unit, cfg.xi0, probes[0], [cfg.eps], probes=probes,
            samples_per_shell=cfg.get("samples_per_shell", 4), horizon=cfg.horizon, seed=cfg.seed,
        )
        entry = prof.lookup(cfg.eps)
        if entry is None:
            return RunResult(HYPOTHESIS, [], [], [f"hypothesis flag: no UAS constants found for eps={cfg.eps}"])
        lines.append(f"uas: delta={format_value(entry.delta)} T={entry.T}")
        if eta1 is None:
            eta1 = entry.delta
    report = stability.total_stability_check(
        X, R, psi, cfg.eps, eta1, cfg.eta2, cfg.window,
        n0_probes=probes,
        ic_samples=cfg.get("ic_samples", 4),
        horizon=cfg.horizon,
        grid_spacing=cfg.grid_spacing,
        probe_limit=cfg.probe_limit,
        var_subset=cfg.var_subset,
        seed=cfg.seed,
    )
    header, rows = _report_rows([report])
    lines += _report_lines([report])
    outcomes = [report.outcome]
    if cfg.stage_blocks:
        st = stability.staging_check(X, R, psi, cfg.eps, entry.delta, entry.T, cfg.stage_blocks, probes[0], cfg.get("ic_samples", 4), cfg.seed)
        lines.append(
            f"staging: holds={st.holds} blocks={st.blocks} T={st.T} max_gap={format_value(st.max_gap)}"
            f" max_block_deviation={format_value(st.max_block_deviation)} max_end_deviation={format_value(st.max_end_deviation)}"
        )
        if not st.holds:
            outcomes.append(stability.VIOLATED)
    return RunResult(_status(outcomes), header, rows, lines)


def run_theorem2(cfg):
    f = field_from_spec(cfg.field)
    reports = stability.averaging_closeness_sweep(
        f, cfg.xi0, cfg.eps_list, cfg.alpha, cfg.beta,
        horizon_constant=cfg.get("horizon_constant", 10.0),
        n0=cfg.get("n0", 0),
        ic_samples=cfg.get("ic_samples", 0),
        var_subset=cfg.var_subset,
        tol=cfg.get("tol", 1e-9),
        seed=cfg.seed,
    )
    header, rows = _report_rows(reports)
    return RunResult(_status([r.outcome for r in reports]), header, rows, _report_lines(reports))


def run_theorem3(cfg):
    f = field_from_spec(cfg.field)
    reports = stability.vanishing_rhs_sweep(
        f, cfg.xi0, cfg.n0_list, cfg.alpha, cfg.beta, cfg.horizon,
        ic_samples=cfg.get("ic_samples", 0),
        var_subset=cfg.var_subset,
        tol=cfg.get("tol", 1e-9),
        seed=cfg.seed,
    )
    header, rows = _report_rows(reports)
    lines = _report_lines(reports) + ["smallness parameter interpreted as 1/n0"]
    return RunResult(_status([r.outcome for r in reports]), header, rows, lines)


def run_genetics(cfg):
    g = cfg.genetics
    params = genetics.SelectionParams(g["eps"], g["alpha"], g["beta"], g.get("form", "plus-bp"))
    res = genetics.selection_experiment(
        params, g["p0"], g["delta_target"], g["horizon"],
        entry_radius=g.get("entry_radius", 0.1),
        transient=g.get("transient"),
        keep_trajectories=True,
    )
    stride = g.get("stride", 1)
    header = ["n"] + [f"x{i + 1}" for i in range(len(g["p0"]))]
    rows = [[n, *res.trajectories[n].tolist()] for n in range(0, g["horizon"] + 1, stride)]
    orbit = res.orbit
    lines = [
        f"pbar: {format_value(genetics.selection_equilibrium(params))}",
        f"orbit period: {orbit.period}",
        f"orbit states: {' '.join(format_value(v) for v in orbit.states[:, 0].tolist())}",
        f"orbit residual: {format_value(orbit.residual)}",
        f"orbit multipliers: {' '.join(format_value(v) for v in orbit.multipliers)}",
        f"orbit stable: {res.stable}",
        f"orbit method: {orbit.method}" + (" (Newton fallback)" if res.fallback else ""),
    ]
    for r in res.rows:
        lines.append(
            f"p0={format_value(r['p0'])} entry={r['entry']} avg_deviation={format_value(r['avg_deviation'])}"
            f" orbit_deviation={format_value(r['orbit_deviation'])}"
        )
    lines += _report_lines([res.report])
    return RunResult(_status([res.report.outcome]), header, rows, lines)


RUNNERS = {
    "simulate": run_simulate,
    "snorm": run_snorm,
    "average": run_average,
    "stability": run_stability,
    "theorem1": run_theorem1,
    "theorem2": run_theorem2,
    "theorem3": run_theorem3,
    "genetics": run_genetics,
}


def execute(cfg: ScenarioConfig) -> RunResult:
    """Run a validated scenario in memory."""
    try:
        return RUNNERS[cfg.command](cfg)
    except (ParameterError, ValueError) as exc:
        return RunResult(HYPOTHESIS, [], [], [f"validation failure: {exc}"])


def run_scenario(cfg: ScenarioConfig, prefix) -> int:
    res = execute(cfg)
    summary = [f"command: {cfg.command}", f"seed: {cfg.seed}", f"status: {res.status}", *res.summary]
    prefix = Path(prefix)
    try:
        prefix.parent.mkdir(parents=True, exist_ok=True)
        with open(f"{prefix}.csv", "w", newline="", encoding="utf-8") as fh:
            fh.write(render_csv(res.header, res.rows) if res.header else "")
        with open(f"{prefix}.summary.txt", "w", encoding="utf-8") as fh:
            fh.write("\n".join(summary) + "\n")
    except OSError as exc:
        print(f"avgdiff: cannot write outputs: {exc}", file=sys.stderr)
        return IO_ERROR
    return res.status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="avgdiff", description="Difference-equation averaging and total-stability experiments.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="scenario file (YAML)")
    p.add_argument("--out", help="output path prefix (default: config 'out' or the config file stem)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--threads", type=int, default=1, help="accepted for compatibility; runs are sequential")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"avgdiff: cannot read config: {exc}", file=sys.stderr)
        return IO_ERROR
    try:
        cfg = parse_scenario(text, args.command)
    except ScenarioError as exc:
        print(f"avgdiff: invalid scenario {args.config}:\n{exc}", file=sys.stderr)
        return HYPOTHESIS
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            print("avgdiff: --seed must be a 64-bit unsigned integer", file=sys.stderr)
            return HYPOTHESIS
        cfg = dataclasses.replace(cfg, seed=args.seed)
    prefix = args.out or cfg.out or str(Path(args.config).with_suffix(""))
    status = run_scenario(cfg, prefix)
    print(Path(f"{prefix}.summary.txt").read_text() if status != IO_ERROR else "", end="")
    return status


if __name__ == "__main__":
    sys.exit(main())
