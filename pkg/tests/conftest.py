from pathlib import Path

import numpy as np
import pytest

from rrkrylov.sparse import from_dense

DATA = Path(__file__).parent / "data"


def random_dense(gen, m, n, density=0.4):
    """Random sparse-ish dense array with every column nonzero."""
    A = np.where(gen.random((m, n)) < density, gen.standard_normal((m, n)), 0.0)
    for j in range(n):
        if not A[:, j].any():
            A[gen.integers(m), j] = 1.0 + gen.random()
    return A


def random_csr(gen, m, n, density=0.4):
    return from_dense(random_dense(gen, m, n, density))


@pytest.fixture
def gen():
    return np.random.Generator(np.random.PCG64(12345))


@pytest.fixture
def data_dir():
    return DATA


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
