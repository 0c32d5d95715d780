import os
import shutil
import sys

import pytest

HERE = os.path.dirname(__file__)
FAKE_SOLVER = os.path.join(HERE, "fake_solver.py")

_acceptance_lines: list[str] = []


def _solver_command(env_name):
    words = os.environ.get(env_name, "").split()
    if words:
        return words
    path = shutil.which("z3")
    return [path, "-in", "-smt2"] if path else None


NIA_SOLVER = _solver_command("INTBLAST_NIA_SOLVER")
BV_SOLVER = _solver_command("INTBLAST_BV_SOLVER")


@pytest.fixture
def nia_solver():
    if NIA_SOLVER is None:
        pytest.skip("no QF_UFNIA solver (install z3-solver or set INTBLAST_NIA_SOLVER)")
    return NIA_SOLVER


@pytest.fixture
def bv_solver():
    if BV_SOLVER is None:
        pytest.skip("no QF_BV solver (install z3-solver or set INTBLAST_BV_SOLVER)")
    return BV_SOLVER


def fake_solver(mode):
    return [sys.executable, FAKE_SOLVER, mode]


@pytest.fixture
def report():
    """Record one acceptance line; printed in the terminal summary."""
    def record(number, title, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        _acceptance_lines.append(f"[{status}] criterion {number:>2}: {title}"
                                 + (f" ({detail})" if detail else ""))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
