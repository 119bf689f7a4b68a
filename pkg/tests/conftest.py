import numpy as np
import pytest

from latred.linalg import qr_factorize
from latred.reduction import ReductionState

ACCEPTANCE_LINES = []


def random_problem(n, seed, m=None):
    """Gaussian m x n matrix A, its thin Q factor and a fresh reduction state."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m or n, n))
    Q1, R = qr_factorize(A)
    return A, Q1, ReductionState.from_upper(R)


@pytest.fixture
def acceptance_report():
    def record(criterion, passed, detail=""):
        ACCEPTANCE_LINES.append((criterion, bool(passed), detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {criterion:>2}: {detail}")
