import math

import numpy as np
import pytest

from sparse_jl.core import (ConfigurationError, DimensionError, Method, MomentEstimate, SjlParams,
                            basis_vector, hard_vector, make_unit_vector)
from sparse_jl.exact import error_distribution, exact_moment, exact_tail
from sparse_jl.montecarlo import (TailEstimate, compare_gaussian, empirical_threshold,
                                  gaussian_vs_rademacher, markov_bound, mc_moment, mc_tail,
                                  paley_zygmund_bound, snap_even, wilson_interval)
from sparse_jl.sampler import Seed


def wilson_by_hand(k, n, z=1.959963984540054):
    p = k / n
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return centre - half, centre + half


@pytest.mark.parametrize("k,n", [(0, 1000), (5, 1000), (500, 1000), (1000, 1000), (37, 20000)])
def test_wilson_interval_matches_formula(k, n):
    lo, hi = wilson_interval(k, n)
    elo, ehi = wilson_by_hand(k, n)
    assert lo == pytest.approx(max(elo, 0.0), abs=1e-12)
    assert hi == pytest.approx(min(ehi, 1.0), abs=1e-12)


def test_tail_estimate_invariants():
    with pytest.raises(ValueError):
        TailEstimate(0.5, 10, (0.6, 0.7))
    with pytest.raises(ValueError):
        TailEstimate(0.0, 0, (0.0, 0.0))


def test_basis_vector_estimates_are_zero():
    p = SjlParams(4, 8, 2)
    for q in (1, 2, 5):
        est = mc_moment(p, basis_vector(4), q, 1000, Seed(1))
        assert est.value == 0.0 and est.method is Method.MONTE_CARLO
    t = mc_tail(p, basis_vector(4), 0.1, 1000, Seed(1))
    assert t.failure_rate == 0.0
    assert t.wilson_ci_95[0] == 0.0 and 0 < t.wilson_ci_95[1] <= 4 / 1000


def test_mc_moment_against_closed_form():
    x = hard_vector(0.25, 16)
    est = mc_moment(SjlParams(16, 32, 2), x, 2, 100_000, Seed(3))
    exact = math.sqrt(2 / 32 * (1 - 1 / 16))
    assert abs(est.value - exact) < 3 * est.std_error
    assert est.trials == 100_000


def test_mc_moment_against_enumeration():
    x = make_unit_vector([1, 2, 3])
    params = SjlParams(3, 4, 2)
    for q in (2, 4):
        est = mc_moment(params, x, q, 100_000, Seed(q))
        assert abs(est.value - exact_moment(params, x, q).value) < 3 * est.std_error


def test_mc_tail_collision_case():
    t = mc_tail(SjlParams(2, 2, 1), make_unit_vector([1, 1]), 0.5, 100_000, Seed(8))
    assert t.failure_rate == pytest.approx(0.5, abs=0.005)
    assert t.wilson_ci_95[0] <= 0.5 <= t.wilson_ci_95[1]


def test_mc_tail_jl_regime():
    eps, delta = 0.5, 0.05
    m = math.ceil(8 * eps**-2 * math.log(1 / delta))
    s = math.ceil(math.log(1 / delta) / eps / 4)
    x = make_unit_vector(np.random.default_rng(0).standard_normal(200))
    t = mc_tail(SjlParams(200, m, s), x, eps, 10_000, Seed(0))
    assert t.failure_rate <= delta


def test_std_error_is_calibrated():
    # spread of independent estimates matches the reported delta-method error
    x = make_unit_vector([1, 2, 3, 4])
    params = SjlParams(4, 6, 2)
    ests = [mc_moment(params, x, 4, 4000, Seed(100 + k)) for k in range(40)]
    spread = np.std([e.value for e in ests], ddof=1)
    reported = np.mean([e.std_error for e in ests])
    assert 0.6 < spread / reported < 1.5


def test_trial_and_order_limits():
    p = SjlParams(4, 8, 2)
    with pytest.raises(ConfigurationError):
        mc_moment(p, basis_vector(4), 2, 999, Seed(0))
    with pytest.raises(ConfigurationError):
        mc_tail(p, basis_vector(4), 0.1, 10, Seed(0))
    with pytest.raises(ConfigurationError):
        mc_moment(p, basis_vector(4), 32, 1000, Seed(0))


@pytest.mark.parametrize("workers", [1, 2, 4])
def test_estimates_independent_of_workers(workers):
    p = SjlParams(8, 16, 2)
    x = hard_vector(0.5, 8)
    ref = mc_moment(p, x, 4, 10_000, Seed(6))
    got = mc_moment(p, x, 4, 10_000, Seed(6), workers=workers)
    assert ref == got
    assert mc_tail(p, x, 0.3, 10_000, Seed(6)) == mc_tail(p, x, 0.3, 10_000, Seed(6), workers=workers)


@pytest.mark.parametrize("v,n_expected", [(1.0, 1), (0.5, 4), (0.6, 2), (0.55, 4), (0.2, 26),
                                          (1 / math.sqrt(3), 4), (1 / math.sqrt(5), 6)])
def test_snap_even(v, n_expected):
    assert snap_even(v) == n_expected


def test_threshold_everything_passes_with_loose_criterion():
    grid = [1.0, 0.5, 0.25]
    curve = empirical_threshold(100_000, 0.1, 0.5, 1, 16, grid, 1000, Seed(0))
    assert curve.v_hat == 1.0
    big = empirical_threshold(4, 15.0, 0.1, 1, 16, grid, 1000, Seed(0))
    assert big.v_hat == 1.0
    assert [p.v_effective for p in big.grid] == sorted(p.v_effective for p in big.grid)


def test_threshold_curve_contents():
    curve = empirical_threshold(8, 0.5, 0.1, 1, 16, [0.25, 1.0, 0.5], 1000, Seed(2))
    assert [p.N for p in curve.grid] == [16, 4, 1]
    assert curve.grid[-1].estimate.failure_rate == 0.0
    assert curve.v_hat in {p.v_effective for p in curve.grid} | {0.0}
    # each support size gets its own stream, independent of the grid it sits in
    alone = empirical_threshold(8, 0.5, 0.1, 1, 16, [0.5], 1000, Seed(2))
    assert alone.grid[0].estimate == curve.grid[1].estimate


def test_threshold_preconditions():
    with pytest.raises(ConfigurationError, match="too few"):
        empirical_threshold(8, 0.5, 0.01, 1, 16, [1.0], 1000, Seed(0))
    with pytest.raises(DimensionError, match="infeasible"):
        empirical_threshold(8, 0.5, 0.1, 1, 4, [0.25, 0.1], 1000, Seed(0))
    with pytest.raises(ConfigurationError):
        empirical_threshold(8, 0.5, 0.1, 1, 4, [1.5], 1000, Seed(0))


def test_markov_bound():
    assert markov_bound(MomentEstimate(2, 0.0, "exact"), 0.3) == 0.0
    m, eps = 64, 0.5
    bound = markov_bound(MomentEstimate(2, math.sqrt(2) / math.sqrt(m), "exact"), eps)
    assert bound == pytest.approx(2 / (m * eps**2))


def test_markov_dominates_exact_tail():
    x = make_unit_vector([1, 2, 2])
    params = SjlParams(3, 4, 2)
    dist = error_distribution(params, x)
    for q in (1, 2, 4, 6):
        est = MomentEstimate(q, dist.abs_moment(q) ** (1 / q), "exact")
        for eps in (0.05, 0.2, 0.5, 1.0):
            assert markov_bound(est, eps) >= dist.tail(eps)


def test_paley_zygmund():
    assert paley_zygmund_bound(1.0, 1.0, 2, 0.5) == pytest.approx(0.25)
    assert paley_zygmund_bound(0.5, 0.8, 2, 0.3) is None
    with pytest.raises(ValueError):
        paley_zygmund_bound(1.0, 0.5, 2, 0.1)


def test_paley_zygmund_below_exact_tail():
    x = make_unit_vector([1, 1, 1, 1])
    params = SjlParams(4, 2, 1)
    dist = error_distribution(params, x)
    applied = 0
    for q in (1, 2, 4):
        nq = dist.abs_moment(q) ** (1 / q)
        n2q = dist.abs_moment(2 * q) ** (1 / (2 * q))
        for K in (0.05, 0.1, 0.2, 0.4):
            b = paley_zygmund_bound(nq, n2q, q, K)
            if b is not None:
                applied += 1
                assert b <= dist.tail(K)
    assert applied > 0


def test_gaussian_vs_rademacher():
    p = SjlParams(4, 8, 2)
    r, g = gaussian_vs_rademacher(p, basis_vector(4), 2, 1000, Seed(0))
    assert r.value == 0.0 and g.value == 0.0
    cmp = compare_gaussian(p, make_unit_vector([1, 2, 3, 4]), 2, 50_000, Seed(1))
    assert cmp.ratio >= 1 - 3 * cmp.ratio_std_error
    assert cmp.gaussian.value >= cmp.rademacher.value - 3 * math.hypot(
        cmp.gaussian.std_error, cmp.rademacher.std_error)


def test_gaussian_second_moment_matches_rademacher_exactly_in_expectation():
    # E[R~^2] = E[R^2]: both equal (2/m)(1 - sum x^4) since E[g^2] = E[sigma^2]
    x = make_unit_vector([1, 2, 3])
    p = SjlParams(3, 4, 1)
    cmp = compare_gaussian(p, x, 2, 200_000, Seed(7))
    exact = exact_moment(p, x, 2).value
    assert abs(cmp.gaussian.value - exact) < 3 * cmp.gaussian.std_error


def test_threshold_stops_at_first_failure():
    # N=8 collides often at m=800 (|R| = 1/4 > eps) while N=1 and N=64 pass
    curve = empirical_threshold(800, 0.2, 0.01, 1, 64, [1.0, 1 / math.sqrt(8), 0.125], 5000,
                                Seed(0))
    passed = {p.N: p.estimate.wilson_ci_95[1] <= 0.01 for p in curve.grid}
    assert passed == {64: True, 8: False, 1: True}
    assert curve.v_hat == pytest.approx(0.125)


@pytest.mark.slow
def test_threshold_tracks_feature_hashing_shape():
    eps, delta = 0.2, 0.01
    p = math.log(1 / delta)
    grid = [1 / math.sqrt(N) for N in (1, 2, 4, 6, 8, 10, 12, 16, 20, 24, 32, 48, 64, 96, 128)]
    for m in (400, 800, 1600):
        f = math.sqrt(eps) * min(math.log(m * eps / p) / p,
                                 math.sqrt(math.log(m * eps**2 / p) / p))
        v_hat = empirical_threshold(m, eps, delta, 1, 128, grid, 10_000, Seed(1)).v_hat
        assert f / 4 <= v_hat <= 4 * f
