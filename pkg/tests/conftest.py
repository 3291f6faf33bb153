import pytest

from adiabatic_diophantine import ProblemConfig, decide, parse

# Instances exercised end to end: (label, equation, per-mode cutoff).
SHIPPED = [
    ("linear-zero", "x1 - 2", 16),
    ("no-zero", "x1 + 1", 16),
    ("pell-shift", "(x1+1)^2 - 2*(x2+1)^2", 10),
]

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def shipped_verdicts():
    out = {}
    for label, source, cutoff in SHIPPED:
        p = parse(source)
        out[label] = (p, decide(p, ProblemConfig(cutoff=cutoff)))
    return out


@pytest.fixture
def report():
    """Record a one-line acceptance outcome, shown in the terminal summary."""

    def record(number, ok, detail):
        _ACCEPTANCE[number] = (bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
