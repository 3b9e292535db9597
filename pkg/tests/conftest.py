import numpy as np
import pytest

from regsubset.dataset import Instance

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def p1():
    """b = [1, 2, 4] against x1 = [1, 2, 3]."""
    return Instance(np.array([[1.0], [2.0], [3.0]]), np.array([1.0, 2.0, 4.0]), ["x1"])


def random_instance(rng, n, m, scale=1.0):
    a = rng.normal(size=(n, m))
    b = a @ rng.normal(size=m) * 0.5 + rng.normal(scale=scale, size=n)
    return Instance(a, b)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
