import numpy as np
import pytest

from cochord.dual_solver import SolveConfig

# quick settings for bulk checks; accurate to well under 1e-3 on the catalog
FAST = SolveConfig(N=256, N0=64, restarts=4, max_iters=200, keep=1)

ACCEPTANCE_LINES = []


@pytest.fixture
def fast():
    return FAST


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
