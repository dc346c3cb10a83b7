"""Scenario files: strict YAML key-value documents, one experiment each.

See README.md ("Scenario format") for the grammar.  Every key is validated
against the command it feeds; unknown keys are errors.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Optional

import yaml

from .errors import SpecError
from .fields import normalize_field_spec

COMMANDS = ("simulate", "snorm", "average", "stability", "theorem1", "theorem2", "theorem3", "genetics")


@dataclass(frozen=True)
class Diagnostic:
    line: Optional[int]
    key: str
    reason: str

    def __str__(self):
        where = f"line {self.line}" if self.line else "document"
        return f"{where}: {self.key}: {self.reason}"


class ScenarioError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


# -- value validators: return the normalized value or raise ValueError(reason) --


def _int(v, lo=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValueError(f"expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ValueError(f"must be >= {lo}, got {v}")
    return v


def _real(v, positive=False, nonneg=False):
    if isinstance(v, str):
        # YAML 1.1 reads exponent forms such as 1e-9 as strings
        try:
            v = float(v)
        except ValueError:
            raise ValueError(f"expected a number, got {v!r}") from None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"expected a number, got {v!r}")
    v = float(v)
    if positive and not v > 0:
        raise ValueError(f"must be positive, got {v}")
    if nonneg and not v >= 0:
        raise ValueError(f"must be nonnegative, got {v}")
    return v


def _list(v, item, nonempty=True):
    if not isinstance(v, list):
        raise ValueError(f"expected a list, got {v!r}")
    if nonempty and not v:
        raise ValueError("list must be nonempty")
    return [item(x) for x in v]


def pos_int(v):
    return _int(v, 1)


def nonneg_int(v):
    return _int(v, 0)


def pos_real(v):
    return _real(v, positive=True)


def nonneg_real(v):
    return _real(v, nonneg=True)


def vector(v):
    if not isinstance(v, list):
        v = [v]
    return _list(v, _real)


def seed(v):
    v = _int(v, 0)
    if v >= 2**64:
        raise ValueError("seed must fit in 64 bits")
    return v


def field_spec(v):
    try:
        return normalize_field_spec(v)
    except SpecError as exc:
        raise ValueError(str(exc)) from None


def scale(v):
    if not isinstance(v, dict):
        raise ValueError("scale must be a mapping with 'kind' (and 'eps' for epsilon)")
    bad = set(v) - {"kind", "eps"}
    if bad:
        raise ValueError(f"unknown scale keys {sorted(bad)}")
    kind = v.get("kind")
    if kind not in ("unit", "epsilon", "one_over_n"):
        raise ValueError(f"kind must be unit, epsilon or one_over_n, got {kind!r}")
    if kind == "epsilon":
        if "eps" not in v:
            raise ValueError("epsilon scale needs eps")
        return {"kind": kind, "eps": pos_real(v["eps"])}
    if "eps" in v:
        raise ValueError(f"scale kind {kind} takes no eps")
    return {"kind": kind}


def descending(v):
    out = _list(v, pos_real)
    if any(b >= a for a, b in zip(out, out[1:])):
        raise ValueError("must be strictly descending")
    return out


def ascending_pos_ints(v):
    out = _list(v, pos_int)
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ValueError("must be strictly ascending")
    return out


def int_list(v):
    return _list(v, nonneg_int)


def points(v):
    return _list(v, vector)


def string(v):
    if not isinstance(v, str) or not v:
        raise ValueError(f"expected a nonempty string, got {v!r}")
    return v


GENETICS_KEYS = {
    "eps": (pos_real, True),
    "period": (pos_int, True),
    "alpha": (lambda v: _list(v, _real), True),
    "beta": (lambda v: _list(v, _real), True),
    "p0": (lambda v: _list(v, _real), True),
    "horizon": (pos_int, True),
    "delta_target": (pos_real, True),
    "transient": (nonneg_int, False),
    "entry_radius": (pos_real, False),
    "form": (string, False),
    "stride": (pos_int, False),
}

VALIDATORS = {
    "command": string,
    "seed": seed,
    "out": string,
    "threads": pos_int,
    "field": field_spec,
    "perturbation": field_spec,
    "scale": scale,
    "n0": nonneg_int,
    "x0": vector,
    "xi0": vector,
    "horizon": pos_int,
    "window": pos_int,
    "windows": lambda v: _list(v, pos_int),
    "grid_spacing": pos_real,
    "probe_limit": nonneg_int,
    "points": points,
    "tol": pos_real,
    "probe_starts": int_list,
    "eps": pos_real,
    "eps_list": descending,
    "n0_list": ascending_pos_ints,
    "probes": int_list,
    "samples_per_shell": nonneg_int,
    "ic_samples": nonneg_int,
    "var_subset": int_list,
    "alpha": pos_real,
    "beta": nonneg_real,
    "eta1": pos_real,
    "eta2": pos_real,
    "horizon_constant": pos_real,
    "stage_blocks": pos_int,
    "genetics": None,  # nested block, validated separately
}

COMMON = {"command", "seed", "out", "threads"}
# command -> (required keys, optional keys)
SCHEMA = {
    "simulate": ({"field", "x0", "horizon"}, {"scale", "n0"}),
    "snorm": ({"field", "windows", "grid_spacing", "probe_limit"}, set()),
    "average": ({"field", "points"}, {"tol", "window", "probe_starts"}),
    "stability": ({"field", "scale", "xi0", "eps_list"}, {"n0", "probes", "samples_per_shell", "horizon", "var_subset"}),
    "theorem1": (
        {"field", "perturbation", "xi0", "eps", "eta2", "window", "horizon"},
        {"eta1", "probes", "ic_samples", "grid_spacing", "probe_limit", "stage_blocks", "samples_per_shell", "var_subset"},
    ),
    "theorem2": (
        {"field", "xi0", "eps_list", "alpha", "beta"},
        {"horizon_constant", "n0", "ic_samples", "var_subset", "tol"},
    ),
    "theorem3": ({"field", "xi0", "n0_list", "alpha", "beta", "horizon"}, {"ic_samples", "var_subset", "tol"}),
    "genetics": ({"genetics"}, set()),
}


@dataclass(frozen=True)
class ScenarioConfig:
    command: str
    seed: int = 0
    out: Optional[str] = None
    threads: Optional[int] = None
    field: Optional[dict] = None
    perturbation: Optional[dict] = None
    scale: Optional[dict] = None
    n0: Optional[int] = None
    x0: Optional[list] = None
    xi0: Optional[list] = None
    horizon: Optional[int] = None
    window: Optional[int] = None
    windows: Optional[list] = None
    grid_spacing: Optional[float] = None
    probe_limit: Optional[int] = None
    points: Optional[list] = None
    tol: Optional[float] = None
    probe_starts: Optional[list] = None
    eps: Optional[float] = None
    eps_list: Optional[list] = None
    n0_list: Optional[list] = None
    probes: Optional[list] = None
    samples_per_shell: Optional[int] = None
    ic_samples: Optional[int] = None
    var_subset: Optional[list] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    eta1: Optional[float] = None
    eta2: Optional[float] = None
    horizon_constant: Optional[float] = None
    stage_blocks: Optional[int] = None
    genetics: Optional[dict] = None

    def get(self, key: str, default: Any = None):
        v = getattr(self, key)
        return default if v is None else v


def _key_lines(node) -> tuple[dict, list]:
    """Line numbers of mapping keys (one level deep for nested mappings) and duplicate-key diagnostics."""
    lines, dups = {}, []
    if not isinstance(node, yaml.MappingNode):
        return lines, dups
    for k, v in node.value:
        key = k.value
        line = k.start_mark.line + 1
        if key in lines:
            dups.append(Diagnostic(line, key, "duplicate key"))
        lines[key] = line
        if isinstance(v, yaml.MappingNode):
            for k2, _ in v.value:
                lines[f"{key}.{k2.value}"] = k2.start_mark.line + 1
    return lines, dups


def parse_scenario(text: str, command: Optional[str] = None) -> ScenarioConfig:
    """Parse and validate a scenario document; raise ScenarioError listing every problem.

    ``command`` (e.g. from the command line) fills in or must match the
    document's own ``command`` key.
    """
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ScenarioError([Diagnostic(mark.line + 1 if mark else None, "<document>", f"malformed YAML: {exc}")])
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ScenarioError([Diagnostic(1, "<document>", "top level must be a mapping")])
    lines, diags = _key_lines(node)

    def diag(key, reason):
        diags.append(Diagnostic(lines.get(key), key, reason))

    doc_cmd = data.get("command")
    if command is not None and doc_cmd is not None and doc_cmd != command:
        diag("command", f"document is for {doc_cmd!r} but {command!r} was requested")
    cmd = command or doc_cmd
    if cmd not in COMMANDS:
        diag("command", f"unknown or missing command {cmd!r}; expected one of {', '.join(COMMANDS)}")
        raise ScenarioError(diags)

    required, optional = SCHEMA[cmd]
    allowed = required | optional | COMMON
    values = {"command": cmd}
    for key, raw in data.items():
        if key not in VALIDATORS:
            diag(key, "unknown key")
            continue
        if key not in allowed:
            diag(key, f"not accepted by the {cmd} command")
            continue
        if key == "command":
            continue
        if key == "genetics":
            block = _genetics_block(raw, lines, diags)
            if block is not None:
                values[key] = block
            continue
        try:
            values[key] = VALIDATORS[key](raw)
        except ValueError as exc:
            diag(key, str(exc))
    for key in sorted(required - set(data)):
        diags.append(Diagnostic(None, key, f"required by the {cmd} command"))
    if not diags:
        _cross_checks(values, diag)
    if diags:
        raise ScenarioError(diags)
    return ScenarioConfig(**values)


def _genetics_block(raw, lines, diags):
    if not isinstance(raw, dict):
        diags.append(Diagnostic(lines.get("genetics"), "genetics", "must be a mapping"))
        return None
    out = {}
    ok = True
    for key, v in raw.items():
        name = f"genetics.{key}"
        if key not in GENETICS_KEYS:
            diags.append(Diagnostic(lines.get(name), name, "unknown key"))
            ok = False
            continue
        try:
            out[key] = GENETICS_KEYS[key][0](v)
        except ValueError as exc:
            diags.append(Diagnostic(lines.get(name), name, str(exc)))
            ok = False
    for key, (_, req) in GENETICS_KEYS.items():
        if req and key not in raw:
            diags.append(Diagnostic(lines.get("genetics"), f"genetics.{key}", "required"))
            ok = False
    if ok:
        if len(out["alpha"]) != out["period"] or len(out["beta"]) != out["period"]:
            diags.append(Diagnostic(lines.get("genetics"), "genetics.period", "alpha and beta must list one period of values"))
            ok = False
        if any(not 0 < p < 1 for p in out["p0"]):
            diags.append(Diagnostic(lines.get("genetics.p0"), "genetics.p0", "initial frequencies must lie in (0, 1)"))
            ok = False
        if out.get("form", "plus-bp") not in ("plus-bp", "mean-fitness"):
            diags.append(Diagnostic(lines.get("genetics.form"), "genetics.form", "form must be plus-bp or mean-fitness"))
            ok = False
        if out.get("transient", 0) > out["horizon"]:
            diags.append(Diagnostic(lines.get("genetics.transient"), "genetics.transient", "must not exceed horizon"))
            ok = False
    return out if ok else None


def _cross_checks(v: dict, diag):
    """Checks spanning several keys (dimensions, scale preconditions)."""
    spec = v.get("field")
    dim = spec["dim"] if spec else None
    for key in ("x0", "xi0"):
        if key in v and dim is not None and len(v[key]) != dim:
            diag(key, f"has {len(v[key])} components, field has dim {dim}")
    if "points" in v and dim is not None:
        for p in v["points"]:
            if len(p) != dim:
                diag("points", f"point {p} does not have dim {dim}")
                break
    if "perturbation" in v and dim is not None:
        pdim, prad = v["perturbation"]["dim"], v["perturbation"]["radius"]
        if (pdim, prad) != (dim, spec["radius"]):
            diag("perturbation", "must share dim and radius with field")
    if "var_subset" in v and dim is not None and any(i >= dim for i in v["var_subset"]):
        diag("var_subset", f"indices must be < {dim}")
    sc = v.get("scale")
    if sc and sc["kind"] == "one_over_n" and v.get("n0", 0) < 1:
        diag("n0", "one_over_n scale needs n0 >= 1")
    if "grid_spacing" in v and spec and v["grid_spacing"] > spec["radius"]:
        diag("grid_spacing", "must not exceed the field radius")
    if "horizon" in v and v["command"] == "stability" and v["horizon"] < 8:
        diag("horizon", "stability needs horizon >= 8")


def to_dict(config: ScenarioConfig) -> dict:
    return {k: v for k, v in dataclasses.asdict(config).items() if v is not None}


def serialize_scenario(config: ScenarioConfig) -> str:
    return yaml.safe_dump(to_dict(config), sort_keys=False, default_flow_style=None)
