import hashlib
import textwrap
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avgdiff.cli import HYPOTHESIS, IO_ERROR, OK, VIOLATION, execute, main
from avgdiff.csvio import format_value, render_csv, write_csv
from avgdiff.scenario import ScenarioError, parse_scenario, serialize_scenario

ZERO = """\
command: simulate
field: {dim: 1, radius: 2, components: [[]]}
x0: [1.5]
horizon: 1
"""


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return p


def run(tmp_path, command, text, *extra):
    cfg = write(tmp_path, text)
    prefix = tmp_path / "out" / "run"
    code = main([command, "--config", str(cfg), "--out", str(prefix), *extra])
    return code, prefix


def test_exact_csv_bytes(tmp_path, capsys):
    code, prefix = run(tmp_path, "simulate", ZERO)
    assert code == OK
    assert prefix.with_suffix(".csv").read_bytes() == b"n,x1\n0,1.5\n1,1.5\n"
    summary = (tmp_path / "out" / "run.summary.txt").read_text()
    assert summary.startswith("command: simulate\nseed: 0\nstatus: 0\n")
    assert "status: 0" in capsys.readouterr().out


def test_single_row_bytes():
    assert render_csv(["n", "x1"], [[0, 1.5]]).encode() == b"n,x1\n0,1.5\n"


def test_float_formatting():
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(True) == "true"
    assert format_value(3) == "3"
    assert render_csv(["a", "b"], [[1, 0.5]]) == "a,b\n1,0.5\n"
    with pytest.raises(ValueError):
        render_csv(["a"], [[1, 2]])


def test_domain_exit_is_hypothesis_status(tmp_path):
    text = """\
    command: simulate
    field: {dim: 1, radius: 1, components: [[{coeff: 0.3, powers: [0]}]]}
    x0: [0.5]
    horizon: 10
    """
    code, prefix = run(tmp_path, "simulate", text)
    assert code == HYPOTHESIS
    assert prefix.with_suffix(".csv").read_text().splitlines()[-1].startswith("2,")


def test_violation_status(tmp_path):
    text = """\
    command: theorem1
    field: {dim: 1, radius: 1, components: [[{coeff: -0.5, powers: [1]}]]}
    perturbation: {dim: 1, radius: 1, components: [[{coeff: 0.1, powers: [0]}]]}
    xi0: [0.0]
    eps: 0.1
    eta1: 0.05
    eta2: 1.0
    window: 2
    horizon: 100
    grid_spacing: 0.5
    probe_limit: 2
    """
    code, prefix = run(tmp_path, "theorem1", text)
    assert code == VIOLATION
    assert "violated" in prefix.with_suffix(".csv").read_text()


def test_missing_config_is_io_error(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "nope.yaml")]) == IO_ERROR


def test_unwritable_output_is_io_error(tmp_path):
    cfg = write(tmp_path, ZERO)
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["simulate", "--config", str(cfg), "--out", str(blocker / "sub" / "run")]) == IO_ERROR


def test_invalid_config_lists_line_numbers(tmp_path, capsys):
    text = """\
    command: simulate
    field: {dim: 1, radius: 2, components: [[]]}
    x0: [1.5]
    horizon: -3
    bogus: 1
    """
    code, _ = run(tmp_path, "simulate", text)
    err = capsys.readouterr().err
    assert code == HYPOTHESIS
    assert "line 4: horizon" in err
    assert "line 5: bogus: unknown key" in err


def test_command_mismatch(tmp_path, capsys):
    code, _ = run(tmp_path, "snorm", ZERO)
    assert code == HYPOTHESIS
    assert "document is for 'simulate'" in capsys.readouterr().err


def test_seed_override_recorded(tmp_path):
    code, prefix = run(tmp_path, "simulate", ZERO, "--seed", "42")
    assert code == OK
    assert "seed: 42" in (tmp_path / "out" / "run.summary.txt").read_text()
    assert run(tmp_path, "simulate", ZERO, "--seed", "-1")[0] == HYPOTHESIS


def test_parse_errors():
    with pytest.raises(ScenarioError) as err:
        parse_scenario("command: simulate\nx0: [0.1]\nx0: [0.2]\n")
    reasons = {(d.key, d.reason) for d in err.value.diagnostics}
    assert ("x0", "duplicate key") in reasons
    assert any(k == "field" and "required" in r for k, r in reasons)
    with pytest.raises(ScenarioError):
        parse_scenario("[1, 2]")
    with pytest.raises(ScenarioError):
        parse_scenario("command: simulate\nfield: {dim: 1\n")


def test_stage_blocks_rejected_outside_theorem1():
    with pytest.raises(ScenarioError, match="not accepted"):
        parse_scenario(ZERO + "stage_blocks: 3\n")


def test_genetics_scenario_runs():
    text = """\
    command: genetics
    genetics:
      eps: 0.01
      period: 2
      alpha: [0.5, 1.5]
      beta: [3.5, 2.5]
      p0: [0.7, 0.8]
      horizon: 2000
      delta_target: 0.02
      stride: 500
    """
    res = execute(parse_scenario(textwrap.dedent(text)))
    assert res.status == OK
    assert [r[0] for r in res.rows] == [0, 500, 1000, 1500, 2000]
    assert res.header == ["n", "x1", "x2"]


def test_genetics_validation_failure_is_status_2():
    text = """\
    command: genetics
    genetics: {eps: 0.5, period: 1, alpha: [3], beta: [3], p0: [0.5], horizon: 10, delta_target: 0.1}
    """
    assert execute(parse_scenario(textwrap.dedent(text))).status == HYPOTHESIS


def test_output_is_deterministic(tmp_path):
    text = """\
    command: theorem2
    field: {dim: 1, radius: 2, components: [[{coeff: -1, powers: [1]}, {coeff: 1, powers: [0], time: alt}]]}
    xi0: [0.5]
    eps_list: [0.1, 0.05]
    alpha: 1.0
    beta: 0.05
    ic_samples: 3
    seed: 9
    """
    digests = []
    for i in range(2):
        code, prefix = run(tmp_path, "theorem2", text)
        assert code == OK
        digests.append(hashlib.sha256(prefix.with_suffix(".csv").read_bytes()).hexdigest())
    assert digests[0] == digests[1]


reals = st.floats(0.01, 10, allow_nan=False)


@settings(max_examples=40)
@given(
    st.lists(reals, min_size=1, max_size=4, unique=True),
    st.floats(0.01, 5),
    st.integers(0, 2**64 - 1),
    st.integers(1, 10**6),
)
def test_scenario_round_trip(eps, alpha, seed, horizon):
    cfg = parse_scenario(
        serialize_scenario(
            parse_scenario(
                "command: theorem2\n"
                "field: {dim: 1, radius: 1, components: [[{coeff: -1, powers: [1]}]]}\n"
                f"xi0: [0.1]\neps_list: {sorted(eps, reverse=True)!r}\nalpha: {alpha!r}\nbeta: 0\n"
                f"seed: {seed}\nhorizon_constant: {horizon}\n"
            )
        )
    )
    again = parse_scenario(serialize_scenario(cfg))
    assert again == cfg
    assert cfg.seed == seed


# -- bundled scenarios and reference cases -------------------------------------------

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
EXPECTED = {
    "simulate_zero": OK,
    "simulate_harmonic": OK,
    "snorm_alternating": OK,
    "average_cosine": OK,
    "stability_contraction": OK,
    "theorem1_staging": OK,
    "theorem1_huge_r": HYPOTHESIS,
    "theorem2_stock": OK,
    "theorem3_stock": OK,
    "genetics_selection": OK,
}


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_bundled_scenario_status(name, tmp_path):
    cfg = SCENARIOS / f"{name}.yaml"
    command = parse_scenario(cfg.read_text()).command
    prefix = tmp_path / name
    assert main([command, "--config", str(cfg), "--out", str(prefix)]) == EXPECTED[name]
    assert prefix.with_suffix(".csv").exists()


def test_every_command_has_a_bundled_scenario():
    from avgdiff.scenario import COMMANDS

    seen = {parse_scenario((SCENARIOS / f"{n}.yaml").read_text()).command for n in EXPECTED}
    assert seen == set(COMMANDS)


def test_zero_field_rows_are_constant(tmp_path):
    code, prefix = run(tmp_path, "simulate", (SCENARIOS / "simulate_zero.yaml").read_text())
    assert code == OK
    rows = prefix.with_suffix(".csv").read_text().splitlines()[1:]
    assert {r.split(",")[1] for r in rows} == {"0.25"}


def test_theorem2_rows_decrease(tmp_path):
    res = execute(parse_scenario((SCENARIOS / "theorem2_stock.yaml").read_text()))
    col = res.header.index("max_deviation")
    devs = [r[col] for r in res.rows]
    assert len(devs) == 3 and devs[0] > devs[1] > devs[2]


def test_minimal_and_invalid_configs():
    cfg = parse_scenario("command: simulate\nfield: {dim: 1, radius: 10, components: [[{coeff: 1, powers: [0]}]]}\nx0: [0]\nhorizon: 5\n")
    assert cfg.horizon == 5
    with pytest.raises(ScenarioError, match="eps"):
        parse_scenario(
            "command: theorem2\nfield: {dim: 1, radius: 1, components: [[]]}\nxi0: [0]\n"
            "eps_list: [-0.1]\nalpha: 1\nbeta: 0\n"
        )


def test_genetics_config_round_trips():
    text = (SCENARIOS / "genetics_selection.yaml").read_text()
    cfg = parse_scenario(text)
    assert parse_scenario(serialize_scenario(cfg)) == cfg
    assert cfg.genetics["alpha"] == [0.5, 1.5]


def test_write_csv_header_only_and_repeatable(tmp_path):
    write_csv([], tmp_path / "empty.csv", header=["n", "x1"])
    assert (tmp_path / "empty.csv").read_bytes() == b"n,x1\n"
    from avgdiff import stock
    from avgdiff.dynamics import ScaleMode, iterate

    header, rows = iterate(stock.alternating_forced_decay(), ScaleMode.epsilon(0.01), 0, [0.3], 999).rows()
    for name in ("a.csv", "b.csv"):
        write_csv(rows, tmp_path / name, header=header)
    a, b = (tmp_path / "a.csv").read_bytes(), (tmp_path / "b.csv").read_bytes()
    assert hashlib.sha256(a).digest() == hashlib.sha256(b).digest()
    assert len(a.splitlines()) == 1001
