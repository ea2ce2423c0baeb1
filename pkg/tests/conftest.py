import math

import numpy as np
import pytest

from sparse_jl.core import basis_vector, hard_vector, make_unit_vector


def closed_form_second_moment(m, x):
    """(2/m)(1 - sum x_i^4), the exact E[R^2]."""
    return 2.0 / m * (1.0 - math.fsum(np.asarray(x.values) ** 4))


def grid_vectors(n):
    """e1, the N=2 hard vector and a fixed random unit vector in dimension n."""
    rng = np.random.default_rng(1000 + n)
    return {
        "e1": basis_vector(n),
        "hard2": hard_vector(1 / math.sqrt(2), n),
        "random": make_unit_vector(rng.standard_normal(n)),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
