import pytest
from hypothesis import strategies as st

from qpferqkd.rates import PauliRates

ACCEPTANCE_LINES = []


@st.composite
def pauli_rates(draw, min_identity=0.0):
    w = [draw(st.floats(0.0, 1.0)) for _ in range(4)]
    if sum(w) < 1e-6:
        w[0] = 1.0
    w[0] += min_identity * sum(w) / max(1e-12, 1.0 - min_identity)
    total = sum(w)
    p_x, p_y, p_z = (v / total for v in w[1:])
    return PauliRates(max(0.0, 1.0 - p_x - p_y - p_z), p_x, p_y, p_z)


@pytest.fixture
def record_criterion():
    def record(number, name, passed, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {name} {detail}".rstrip())

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
