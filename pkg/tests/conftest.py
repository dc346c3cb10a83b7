import math

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(number, title, passed, detail)."""

    def record(number, title, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


TIMES = ["const", "alt", "cos:3", "sin:4", "cos:8"]


@st.composite
def field_specs(draw, max_dim=2):
    dim = draw(st.integers(1, max_dim))
    radius = draw(st.sampled_from([0.5, 1.0, 2.0]))
    comps = []
    for _ in range(dim):
        terms = []
        for _ in range(draw(st.integers(0, 4))):
            powers = [0] * dim
            for _ in range(draw(st.integers(0, 3))):
                powers[draw(st.integers(0, dim - 1))] += 1
            coeff = draw(st.floats(-2, 2, allow_nan=False).filter(lambda c: not math.isclose(c, 0.0, abs_tol=1e-12)))
            terms.append({"coeff": coeff, "powers": powers, "time": draw(st.sampled_from(TIMES))})
        comps.append(terms)
    return {"dim": dim, "radius": radius, "components": comps}
