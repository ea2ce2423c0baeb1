"""Monte Carlo moments, tail rates and empirical l_inf thresholds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binomtest

from .core import (ConfigurationError, DimensionError, Flavor, Method, MomentEstimate,
                   SjlParams, hard_vector)
from .exact import TIE_TOL
from .sampler import Seed, as_seed, error_samples

MIN_TRIALS = 1000
MAX_MC_Q = 16


@dataclass(frozen=True)
class TailEstimate:
    failure_rate: float
    trials: int
    wilson_ci_95: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.wilson_ci_95
        if self.trials < 1 or not lo <= self.failure_rate <= hi:
            raise ValueError("inconsistent tail estimate")

    @property
    def std_error(self) -> float:
        p = self.failure_rate
        return math.sqrt(p * (1 - p) / self.trials)


def wilson_interval(hits: int, trials: int) -> tuple[float, float]:
    ci = binomtest(int(hits), int(trials)).proportion_ci(confidence_level=0.95, method="wilson")
    rate = hits / trials
    # clamp float noise so lo <= rate <= hi holds at the endpoints
    return min(float(ci.low), rate), max(float(ci.high), rate)


def _mean_and_var(values: np.ndarray) -> tuple[float, float]:
    mean = math.fsum(values.tolist()) / values.size
    centred = values - mean
    var = math.fsum((centred * centred).tolist()) / max(values.size - 1, 1)
    return mean, var


def _check_trials(trials: int) -> None:
    if trials < MIN_TRIALS:
        raise ConfigurationError(f"need at least {MIN_TRIALS} trials, got {trials}")


def moment_from_samples(r: np.ndarray, q: float) -> MomentEstimate:
    """``(mean |R|^q)^(1/q)`` with a delta-method standard error."""
    powered = np.abs(r) ** q
    mean, var = _mean_and_var(powered)
    value = mean ** (1.0 / q)
    se = 0.0
    if mean > 0:
        se = value / (q * mean) * math.sqrt(var / r.size)
    return MomentEstimate(q=q, value=value, method=Method.MONTE_CARLO, std_error=se,
                          trials=int(r.size))


def mc_moment(params: SjlParams, x, q, trials: int, seed, workers: int = 1) -> MomentEstimate:
    _check_trials(trials)
    if not 1 <= q <= MAX_MC_Q:
        raise ConfigurationError(f"Monte Carlo q must lie in [1, {MAX_MC_Q}]; use the exact oracle")
    r, _ = error_samples(params, x, trials, seed, workers=workers)
    return moment_from_samples(r, q)


def tail_from_samples(r: np.ndarray, eps: float) -> TailEstimate:
    hits = int(np.count_nonzero(np.abs(r) > eps + TIE_TOL))
    return TailEstimate(hits / r.size, int(r.size), wilson_interval(hits, r.size))


def mc_tail(params: SjlParams, x, eps: float, trials: int, seed, workers: int = 1) -> TailEstimate:
    """Fraction of trials with ``|R| > eps`` and its 95% Wilson interval."""
    _check_trials(trials)
    r, _ = error_samples(params, x, trials, seed, workers=workers)
    return tail_from_samples(r, eps)


# thresholds ---------------------------------------------------------------

def snap_even(v: float) -> int:
    """Support size for a hard vector near ratio v: N = 1 or the nearest even N."""
    if not 0.0 < v <= 1.0:
        raise ConfigurationError(f"grid values must lie in (0, 1], got {v}")
    target = 1.0 / (v * v)
    big_n = max(1, int(round(target)))
    if big_n == 1 or big_n % 2 == 0:
        return big_n
    lower, upper = big_n - 1, big_n + 1
    # ties (target exactly odd, up to float noise) go up
    return lower if target - lower < upper - target - 1e-9 else upper


@dataclass(frozen=True)
class ThresholdPoint:
    v_nominal: float
    v_effective: float
    N: int
    estimate: TailEstimate
    seed: Seed


@dataclass(frozen=True)
class ThresholdCurve:
    """Failure rate against v for hard vectors, and the empirical threshold.

    ``v_hat`` is the largest grid v such that every grid point with
    ``v_effective <= v`` passes, mirroring the nested sets S_v. It only
    witnesses the hard-vector family, so it is an upper bound on the true
    threshold rather than an estimate of it.
    """

    grid: tuple[ThresholdPoint, ...]
    v_hat: float
    delta: float


def empirical_threshold(m: int, eps: float, delta: float, s: int, n: int, v_grid,
                        trials: int, seed, flavor: Flavor = Flavor.UNIFORM,
                        workers: int = 1) -> ThresholdCurve:
    """Sweep hard vectors over ``v_grid`` and locate the empirical threshold.

    A grid point passes when the upper 95% Wilson bound on its failure rate
    is at most delta. Since S_v grows with v, a failure at v rules out every
    larger v: ``v_hat`` is the largest v_effective below the first failing
    point (0 if the smallest v already fails). The basis vector (v = 1) never
    fails, so the literal "largest passing v" would always be 1.

    No monotonicity in v is assumed: every grid point is evaluated and
    returned. Each support size N gets its own seed stream, so curves at
    different s (or different grids) are evaluated on matched seeds.
    """
    if delta * trials < 50:
        raise ConfigurationError(f"delta * trials = {delta * trials:g} < 50: too few trials")
    seed = as_seed(seed)
    params = SjlParams(n, m, s, flavor)
    points = []
    for v in v_grid:
        big_n = snap_even(float(v))
        if big_n > n:
            continue
        x = hard_vector(1.0 / math.sqrt(big_n), n)
        point_seed = seed.child(big_n)
        est = mc_tail(params, x, eps, trials, point_seed, workers=workers)
        points.append(ThresholdPoint(float(v), x.linf_ratio, big_n, est, point_seed))
    if not points:
        raise DimensionError(f"infeasible grid: every support size exceeds n={n}")
    points.sort(key=lambda p: (p.v_effective, p.v_nominal))
    v_hat = 0.0
    for p in points:
        if p.estimate.wilson_ci_95[1] > delta:
            break
        v_hat = p.v_effective
    return ThresholdCurve(tuple(points), v_hat, delta)


# tail inequalities --------------------------------------------------------

def markov_bound(moment: MomentEstimate, eps: float) -> float:
    """``(||R||_q / eps)^q``, bounding ``P[|R| >= eps]`` when the moment is exact."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return (moment.value / eps) ** moment.q


def paley_zygmund_bound(norm_q: float, norm_2q: float, q, K: float) -> float | None:
    """Lower bound ``0.25 (||Z||_q / ||Z||_2q)^(2q)`` on ``P[Z > K]``.

    Returns None when the bound does not apply (``||Z||_q < 2K``).
    """
    if K <= 0:
        raise ValueError("K must be positive")
    if norm_q <= 0 or norm_q < 2 * K:
        return None
    if norm_2q < norm_q * (1 - 1e-12):
        raise ValueError("need ||Z||_2q >= ||Z||_q")
    return 0.25 * min(1.0, norm_q / norm_2q) ** (2 * q)


# Gaussian comparison -------------------------------------------------------

@dataclass(frozen=True)
class GaussianComparison:
    rademacher: MomentEstimate
    gaussian: MomentEstimate
    ratio: float
    ratio_std_error: float


def compare_gaussian(params: SjlParams, x, p, trials: int, seed,
                     workers: int = 1) -> GaussianComparison:
    """Paired estimates of ``||R||_p`` and its Gaussian-coefficient analogue.

    Both errors are evaluated on the same supports each trial; the ratio's
    standard error uses the paired covariance.
    """
    _check_trials(trials)
    if not 1 <= p <= MAX_MC_Q:
        raise ConfigurationError(f"Monte Carlo p must lie in [1, {MAX_MC_Q}]")
    r, rg = error_samples(params, x, trials, seed, workers=workers, gaussian=True)
    est_r = moment_from_samples(r, p)
    est_g = moment_from_samples(rg, p)
    if est_r.value == 0.0:
        return GaussianComparison(est_r, est_g, math.nan, math.nan)
    a, b = np.abs(rg) ** p, np.abs(r) ** p
    mean_a, mean_b = a.mean(), b.mean()
    cov = np.cov(np.vstack([a / mean_a, b / mean_b]))
    log_var = (cov[0, 0] + cov[1, 1] - 2 * cov[0, 1]) / trials
    ratio = est_g.value / est_r.value
    return GaussianComparison(est_r, est_g, ratio, ratio * math.sqrt(max(log_var, 0.0)) / p)


def gaussian_vs_rademacher(params: SjlParams, x, p, trials: int, seed,
                           workers: int = 1) -> tuple[MomentEstimate, MomentEstimate]:
    cmp = compare_gaussian(params, x, p, trials, seed, workers=workers)
    return cmp.rademacher, cmp.gaussian
