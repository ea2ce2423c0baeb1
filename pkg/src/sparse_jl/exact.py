"""Exact moments and tail probabilities by full enumeration on tiny instances.

Every column configuration (support choice and sign pattern) is equally
likely, so the law of R(x) is a finite list of values with integer counts.
Enumeration walks the columns one at a time and merges states that are
equivalent for the rest of the walk: for the uniform flavor the image vector
can be sorted and negated without changing its future, which keeps the state
space tiny for vectors with repeated entries.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import Flavor, Method, MomentEstimate, SjlParams, UnitVector

# |R| within this distance of eps counts as a tie, not an exceedance
TIE_TOL = 1e-12


class BudgetExceededError(RuntimeError):
    pass


@dataclass(frozen=True)
class EnumerationBudget:
    max_configs: int = 10**8

    def check(self, count: int, what: str) -> None:
        if count > self.max_configs:
            raise BudgetExceededError(
                f"{what} needs {count:.3g} configurations, budget is {self.max_configs:.3g}")


def _budget(budget) -> EnumerationBudget:
    if budget is None:
        return EnumerationBudget()
    if isinstance(budget, EnumerationBudget):
        return budget
    return EnumerationBudget(int(budget))


def column_configurations(m: int, s: int, flavor: Flavor = Flavor.UNIFORM) -> int:
    if Flavor(flavor) is Flavor.BLOCK:
        return (m // s) ** s * 2**s
    return math.comb(m, s) * 2**s


@lru_cache(maxsize=64)
def _column_patterns(m: int, s: int, flavor: Flavor) -> np.ndarray:
    """All equally likely columns as a (K, m) array of 0/+-1 entries."""
    if flavor is Flavor.BLOCK:
        width = m // s
        supports = itertools.product(*(range(k * width, (k + 1) * width) for k in range(s)))
    else:
        supports = itertools.combinations(range(m), s)
    out = []
    for support in supports:
        for signs in itertools.product((1, -1), repeat=s):
            col = np.zeros(m)
            col[list(support)] = signs
            out.append(col)
    arr = np.array(out)
    arr.setflags(write=False)
    return arr


def _canonical(states: np.ndarray, permute: bool) -> np.ndarray:
    if permute:
        states = np.sort(states, axis=1)
        flipped = -states[:, ::-1]
    else:
        flipped = -states
    diff = states - flipped
    nonzero = diff != 0
    first = np.argmax(nonzero, axis=1)
    lead = diff[np.arange(states.shape[0]), first]
    return np.where((lead > 0)[:, None], flipped, states)


@dataclass(frozen=True)
class ErrorDistribution:
    """The exact law of R(x): distinct values with integer configuration counts."""

    values: np.ndarray
    counts: np.ndarray
    total: int

    def expect(self, func) -> float:
        terms = self.counts * func(self.values)
        return math.fsum(terms.tolist()) / self.total

    def abs_moment(self, q: float) -> float:
        return self.expect(lambda r: np.abs(r) ** q)

    def raw_moment(self, q: int) -> float:
        return self.expect(lambda r: r**q)

    def tail(self, eps: float) -> float:
        hits = self.counts[np.abs(self.values) > eps + TIE_TOL]
        return math.fsum(hits.tolist()) / self.total


def error_distribution(params: SjlParams, x: UnitVector, budget=None) -> ErrorDistribution:
    """Enumerate the law of R(x) for A drawn from ``params``' distribution."""
    values = x.values
    if values.shape != (params.n,):
        raise ValueError(f"vector has shape {values.shape}, params expect ({params.n},)")
    nz = values[np.flatnonzero(values)]
    per_col = column_configurations(params.m, params.s, params.flavor)
    # zero coordinates never touch R, so only the support is enumerated
    total = per_col ** nz.size
    _budget(budget).check(total, "exact enumeration")
    patterns = _column_patterns(params.m, params.s, params.flavor)
    permute = params.flavor is Flavor.UNIFORM

    states = np.zeros((1, params.m))
    counts = np.ones(1)
    for xi in nz:
        nxt = (states[:, None, :] + xi * patterns[None, :, :]).reshape(-1, params.m)
        nxt = _canonical(nxt, permute)
        weights = np.repeat(counts, patterns.shape[0])
        states, inverse = np.unique(nxt, axis=0, return_inverse=True)
        counts = np.bincount(inverse.ravel(), weights=weights)
    r = (states * states).sum(axis=1) / params.s - 1.0
    if nz.size <= 1:
        r = np.zeros_like(r)
    return ErrorDistribution(r, counts, total)


def exact_moment(params: SjlParams, x: UnitVector, q, budget=None) -> MomentEstimate:
    """Exact ``||R(x)||_q = (E|R|^q)^(1/q)``."""
    if q < 1:
        raise ValueError("q must be >= 1")
    dist = error_distribution(params, x, budget)
    return MomentEstimate(q=q, value=dist.abs_moment(q) ** (1.0 / q), method=Method.EXACT)


def exact_raw_moment(params: SjlParams, x: UnitVector, q: int, budget=None) -> float:
    """Signed moment ``E[R^q]``."""
    return error_distribution(params, x, budget).raw_moment(q)


def exact_tail(params: SjlParams, x: UnitVector, eps: float, budget=None) -> float:
    """Exact ``P[|R(x)| > eps]`` (strict)."""
    return error_distribution(params, x, budget).tail(eps)


# single-row marginal -----------------------------------------------------

def _row_terms_equal(params: SjlParams, magnitude: float, big_n: int, indicator_two: bool):
    """Law of Z_1 when the support entries share one magnitude.

    k of the big_n support coordinates land in row 1 (Binomial(big_n, s/m));
    with j plus signs among them, Z_1 = magnitude^2 ((2j - k)^2 - k).
    """
    prob = params.s / params.m
    values, weights = [], []
    for k in range(big_n + 1):
        pk = math.comb(big_n, k) * prob**k * (1 - prob) ** (big_n - k)
        if pk == 0.0 or (indicator_two and k != 2):
            continue
        for j in range(k + 1):
            values.append(magnitude**2 * ((2 * j - k) ** 2 - k))
            weights.append(pk * math.comb(k, j) / 2**k)
    return np.array(values), np.array(weights)


def _row_terms_general(params: SjlParams, xv: np.ndarray, indicator_two: bool):
    prob = params.s / params.m
    n = xv.size
    values, weights = [], []
    for mask in range(1 << n):
        members = [i for i in range(n) if mask >> i & 1]
        k = len(members)
        pk = prob**k * (1 - prob) ** (n - k)
        if indicator_two and k != 2:
            continue
        if k < 2:
            values.append(0.0)
            weights.append(pk)
            continue
        sub = xv[members]
        diag = float(np.dot(sub, sub))
        # Z is even in the signs, so fix the first one
        for rest in itertools.product((1.0, -1.0), repeat=k - 1):
            lin = sub[0] + float(np.dot(sub[1:], rest))
            values.append(lin * lin - diag)
            weights.append(pk / 2 ** (k - 1))
    return np.array(values), np.array(weights)


def exact_row_moment(params: SjlParams, x: UnitVector, T, indicator_two: bool = False,
                     budget=None) -> MomentEstimate:
    """Exact ``||Z_1(x)||_T`` for the first row of the uniform flavor.

    One row of a uniform sparse JL matrix has independent Bernoulli(s/m)
    entries across columns, so the row law is enumerated directly. With
    ``indicator_two`` the variable is multiplied by the indicator that exactly
    two support coordinates of x land in the row.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    values = x.values
    if values.shape != (params.n,):
        raise ValueError(f"vector has shape {values.shape}, params expect ({params.n},)")
    xv = values[np.flatnonzero(values)]
    mags = np.abs(xv)
    if xv.size and np.all(mags == mags[0]):
        z, w = _row_terms_equal(params, float(mags[0]), xv.size, indicator_two)
    else:
        _budget(budget).check(4 ** xv.size, "row enumeration")
        z, w = _row_terms_general(params, xv, indicator_two)
    moment = math.fsum((w * np.abs(z) ** T).tolist()) if z.size else 0.0
    return MomentEstimate(q=T, value=moment ** (1.0 / T), method=Method.EXACT)
