import numpy as np
import pytest

from illreg import core, problems


@pytest.fixture(scope="session")
def heat100():
    return problems.gen_heat(100)


@pytest.fixture(scope="session")
def heat100_svd(heat100):
    return core.compute_svd(heat100.A)


@pytest.fixture(scope="session")
def diag_toy():
    """2x2 diagonal toy with spectrum {0.25, 0.01}, already inside (0, e^-1]."""
    A = np.diag([0.5, 0.1])
    x = np.array([1.0, 1.0])
    return core.Problem(name="diag", A=A, x_true=x, y_exact=A @ x, scale=1.0)


@pytest.fixture(scope="session")
def diag_svd(diag_toy):
    return core.compute_svd(diag_toy.A)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_criterion_lines", None)
    if not lines:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
