import itertools
import math

import numpy as np
import pytest

from conftest import closed_form_second_moment, grid_vectors
from sparse_jl.core import Flavor, Method, SjlParams, basis_vector, hard_vector, make_unit_vector
from sparse_jl.exact import (BudgetExceededError, EnumerationBudget, column_configurations,
                             error_distribution, exact_moment, exact_raw_moment,
                             exact_row_moment, exact_tail)


def brute_force_errors(params, x):
    """Every equally likely matrix restricted to supp(x), as a flat list of R values."""
    m, s = params.m, params.s
    if params.flavor is Flavor.BLOCK:
        w = m // s
        supports = list(itertools.product(*(range(k * w, (k + 1) * w) for k in range(s))))
    else:
        supports = list(itertools.combinations(range(m), s))
    columns = []
    for sup in supports:
        for signs in itertools.product((1, -1), repeat=s):
            col = np.zeros(m)
            col[list(sup)] = signs
            columns.append(col / math.sqrt(s))
    nz = np.flatnonzero(x.values)
    out = []
    for choice in itertools.product(columns, repeat=nz.size):
        y = sum(c * x.values[i] for c, i in zip(choice, nz))
        out.append(float(y @ y) - 1.0)
    return np.array(out)


def brute_force_row(params, x, indicator_two=False):
    """(values, probabilities) of Z_1 from full column enumeration."""
    m, s = params.m, params.s
    cols = []
    for sup in itertools.combinations(range(m), s):
        for sign in (1, -1):
            cols.append((0 in sup, sign))
    nz = np.flatnonzero(x.values)
    vals = []
    for choice in itertools.product(cols, repeat=nz.size):
        hit = [(x.values[i] * sg) for (on, sg), i in zip(choice, nz) if on]
        if indicator_two and len(hit) != 2:
            vals.append(0.0)
            continue
        vals.append(sum(hit) ** 2 - sum(h * h for h in hit))
    return np.array(vals)


SMALL = [
    (SjlParams(2, 4, 1), "hard2"),
    (SjlParams(3, 4, 2), "random"),
    (SjlParams(3, 3, 2), "random"),
    (SjlParams(2, 6, 2), "random"),
    (SjlParams(3, 4, 2, "block"), "random"),
    (SjlParams(3, 6, 3, "block"), "hard2"),
]


@pytest.mark.parametrize("params,kind", SMALL)
def test_distribution_matches_brute_force(params, kind):
    x = grid_vectors(params.n)[kind]
    brute = brute_force_errors(params, x)
    dist = error_distribution(params, x)
    assert dist.total == brute.size
    for q in (1, 2, 3, 4, 6):
        expect = math.fsum(np.abs(brute) ** q) / brute.size
        assert dist.abs_moment(q) == pytest.approx(expect, abs=1e-13)
    for eps in (0.1, 0.3, 0.5, 1.0):
        assert dist.tail(eps) == pytest.approx(np.mean(np.abs(brute) > eps + 1e-12), abs=1e-15)


def test_second_moment_closed_form_examples():
    x = hard_vector(1 / math.sqrt(2), 2)
    est = exact_moment(SjlParams(2, 4, 1), x, 2)
    assert est.method is Method.EXACT and est.std_error == 0
    assert est.value**2 == pytest.approx(0.25, abs=1e-15)
    assert error_distribution(SjlParams(2, 4, 1), x).total == 64


@pytest.mark.parametrize("m", [2, 4, 6])
@pytest.mark.parametrize("s", [1, 2])
@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("kind", ["e1", "hard2", "random"])
def test_second_moment_grid(m, s, n, kind):
    params = SjlParams(n, m, s)
    x = grid_vectors(n)[kind]
    assert exact_moment(params, x, 2).value ** 2 == pytest.approx(
        closed_form_second_moment(m, x), abs=1e-12)
    assert abs(exact_raw_moment(params, x, 1)) < 1e-14


def test_block_second_moment_closed_form():
    # block columns also have E[eta_ri eta_rj] = (s/m)^2 across columns
    for m, s in [(4, 2), (6, 3), (6, 2)]:
        x = make_unit_vector([3, 1, 2])
        est = exact_moment(SjlParams(3, m, s, "block"), x, 2)
        assert est.value**2 == pytest.approx(closed_form_second_moment(m, x), abs=1e-12)


def test_odd_moments_vanish_on_two_point_support():
    x = make_unit_vector([0.3, 0.0, -0.8])
    for q in (1, 3, 5):
        assert abs(exact_raw_moment(SjlParams(3, 4, 2), x, q)) < 1e-14


def test_third_moment_nonzero_for_three_coordinates():
    # sigma -> -sigma on one column does not negate the triangle term
    # x1 x2 * x2 x3 * x3 x1, so E[R^3] need not vanish once |supp x| >= 3
    x = make_unit_vector([1, 1, 1])
    params = SjlParams(3, 2, 1)
    brute = brute_force_errors(params, x)
    assert math.fsum(brute**3) / brute.size == pytest.approx(exact_raw_moment(params, x, 3))
    assert exact_raw_moment(params, x, 3) > 0.1


def test_tail_examples():
    x = make_unit_vector([1, 1])
    params = SjlParams(2, 2, 1)
    assert exact_tail(params, x, 0.5) == pytest.approx(0.5)
    assert exact_tail(params, basis_vector(2), 1e-9) == 0.0
    assert exact_tail(params, x, 1.0) == 0.0  # strict: |R| = 1 is not > 1


def test_tail_monotone_and_norms_monotone():
    x = grid_vectors(3)["random"]
    params = SjlParams(3, 4, 2)
    dist = error_distribution(params, x)
    tails = [dist.tail(e) for e in np.linspace(0, 2, 41)]
    assert all(a >= b for a, b in zip(tails, tails[1:]))
    norms = [dist.abs_moment(q) ** (1 / q) for q in (1, 2, 3, 4, 6, 8)]
    assert all(a <= b * (1 + 1e-12) for a, b in zip(norms, norms[1:]))


def test_budget():
    params = SjlParams(6, 8, 2)
    assert column_configurations(8, 2) == 112
    assert column_configurations(8, 2, "block") == 64
    with pytest.raises(BudgetExceededError, match="budget"):
        exact_moment(params, make_unit_vector(np.arange(1, 7)), 2, EnumerationBudget(10**6))
    # zero coordinates are not enumerated
    x = make_unit_vector([1, 1, 0, 0, 0, 0])
    assert exact_moment(params, x, 2, 10**6).value > 0


def test_moment_independent_of_coordinate_order():
    params = SjlParams(3, 4, 2)
    a = exact_moment(params, make_unit_vector([1, 2, 3]), 4).value
    b = exact_moment(params, make_unit_vector([3, -1, 2]), 4).value
    assert a == pytest.approx(b, abs=1e-15)


def row_identity(m, s, x):
    sq = x.values**2
    return 2 * (s / m) ** 2 * (sq.sum() ** 2 - (sq**2).sum())


@pytest.mark.parametrize("m", [2, 4, 6])
@pytest.mark.parametrize("s", [1, 2])
@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("kind", ["e1", "hard2", "random"])
def test_row_second_moment_identity(m, s, n, kind):
    x = grid_vectors(n)[kind]
    got = exact_row_moment(SjlParams(n, m, s), x, 2).value ** 2
    assert got == pytest.approx(row_identity(m, s, x), abs=1e-12)


def test_row_example():
    x = hard_vector(1 / math.sqrt(2), 2)
    assert exact_row_moment(SjlParams(2, 4, 1), x, 2).value ** 2 == pytest.approx(1 / 16)
    assert exact_row_moment(SjlParams(5, 4, 1), basis_vector(5), 7).value == 0.0


@pytest.mark.parametrize("indicator_two", [False, True])
@pytest.mark.parametrize("params,x", [
    (SjlParams(3, 4, 2), make_unit_vector([1, 2, 3])),
    (SjlParams(4, 4, 1), hard_vector(0.5, 4)),
    (SjlParams(4, 6, 2), make_unit_vector([1, -1, 2, 0.5])),
])
def test_row_moments_match_brute_force(params, x, indicator_two):
    z = brute_force_row(params, x, indicator_two)
    for T in (2, 3, 4, 6):
        expect = (math.fsum(np.abs(z) ** T) / z.size) ** (1 / T)
        got = exact_row_moment(params, x, T, indicator_two).value
        assert got == pytest.approx(expect, abs=1e-13)


def test_row_budget():
    x = make_unit_vector(np.arange(1, 13))
    with pytest.raises(BudgetExceededError):
        exact_row_moment(SjlParams(12, 8, 1), x, 4, budget=1000)
