import numpy as np
import pytest

from fpcqaoa.ising import IsingProblem

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def edge():
    """Single MaxCut edge: H = 0.5 Z0 Z1 - 0.5."""
    return IsingProblem(2, {}, {(0, 1): 0.5}, -0.5)


@pytest.fixture
def ring3():
    return IsingProblem(3, {}, {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0})


def random_problem(rng: np.random.Generator, n: int, density: float = 0.6) -> IsingProblem:
    linear = {j: float(rng.uniform(-1, 1)) for j in range(n) if rng.random() < 0.8}
    quad = {
        (j, k): float(rng.uniform(-1, 1))
        for j in range(n)
        for k in range(j + 1, n)
        if rng.random() < density
    }
    return IsingProblem(n, linear, quad, float(rng.uniform(-2, 2)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
