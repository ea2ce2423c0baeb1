"""Closed-form threshold, moment and dimension bounds with explicit constants.

All logarithms are natural. Branch guards are evaluated in the order the
formulas list them and the first guard that holds wins; any later guard that
also holds is recorded as an ``overlap:<branch>`` flag. Logarithms of
arguments below 1 inside square roots (or as divisors) give a flagged,
not-applicable report instead of NaN.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

from .core import BoundConstants, ConfigurationError, RegimeReport

log = logging.getLogger(__name__)


class Direction(str, enum.Enum):
    UPPER = "upper"
    LOWER = "lower"


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _ln(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def even_ceiling(p: float) -> int:
    """p rounded up to the nearest even integer (at least 2)."""
    k = math.ceil(p - 1e-9)
    return max(2, k + (k % 2))


@dataclass(frozen=True)
class ThresholdQuery:
    m: float
    eps: float
    delta: float
    s: int
    constants: BoundConstants = field(default_factory=BoundConstants)

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ConfigurationError(f"eps must lie in (0, 1), got {self.eps}")
        if not 0 < self.delta < 1:
            raise ConfigurationError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.m > 0:
            raise ConfigurationError(f"m must be positive, got {self.m}")
        if int(self.s) != self.s or self.s < 1:
            raise ConfigurationError(f"s must be a positive integer, got {self.s}")

    @property
    def p(self) -> float:
        return math.log(1.0 / self.delta)

    @property
    def p_even(self) -> int:
        return even_ceiling(self.p)

    def echo(self) -> dict:
        return {"m": self.m, "eps": self.eps, "delta": self.delta, "s": self.s,
                "p": self.p, "p_even": self.p_even}


def _report(branch, value, inputs, *, applicable=True, flags=(), raw=None, branches=()):
    return RegimeReport(branch_id=branch, value=float(value), inputs=inputs,
                        applicable=applicable, flags=tuple(flags),
                        raw_value=None if raw is None else float(raw),
                        branches=tuple(branches))


def _overlaps(guards, chosen):
    hit = False
    out = []
    for name, holds in guards:
        if name == chosen:
            hit = True
        elif hit and holds:
            out.append(f"overlap:{name}")
    if out:
        log.debug("branch %s chosen; later guards also hold: %s", chosen, out)
    return out


def _middle_terms(m, eps, p):
    """(ln(m eps / p) / p, sqrt(ln(m eps^2 / p)) / sqrt(p)), or None when a log is negative."""
    l1 = _ln(m * eps / p)
    l2 = _ln(m * eps * eps / p)
    if l1 < 0 or l2 < 0:
        return None
    return l1 / p, math.sqrt(l2) / math.sqrt(p)


def _hypothesis_flags(q: ThresholdQuery) -> list[str]:
    c = q.constants
    flags = []
    if q.eps >= c.C_eps:
        flags.append("hypothesis:eps>=C_eps")
    if q.delta >= c.C_delta:
        flags.append("hypothesis:delta>=C_delta")
    if q.s > c.C_S * q.p / q.eps:
        flags.append("hypothesis:s>C_S*p/eps")
    return flags


def eval_g(q: ThresholdQuery) -> RegimeReport:
    """Lower threshold: the l_inf/l_2 ratio below which distortion eps holds
    with probability 1 - delta. The reported value is ``min(1, g)``."""
    c, m, eps, p, s = q.constants, q.m, q.eps, q.p, q.s
    inputs = {**q.echo(), "constants": c.as_dict()}
    flags = _hypothesis_flags(q)
    floor = c.C_M * p / eps**2
    if m < floor:
        return _report("below_domain", 0.0, inputs, applicable=False,
                       flags=flags + ["below-domain"])
    full = min(2 * _exp(p) / eps**2, p * _exp(c.C_U * p / (eps * s)) / eps**2)
    sparse_edge = s * _exp(c.C_S * p / (eps * s))
    guards = [("full_space", m >= full),
              ("sqrt_log", m >= max(sparse_edge, floor)),
              ("min_form", floor <= m < sparse_edge)]
    chosen = next(name for name, holds in guards if holds)
    flags += _overlaps(guards, chosen)
    if chosen == "full_space":
        return _report(chosen, 1.0, inputs, flags=flags, raw=1.0)
    terms = _middle_terms(m, eps, p)
    if terms is None:
        return _report(chosen, 0.0, inputs, applicable=False, flags=flags + ["log-argument<1"])
    scale = c.C_v * math.sqrt(eps * s)
    raw = scale * (terms[1] if chosen == "sqrt_log" else min(terms))
    return _report(chosen, min(1.0, raw), inputs, flags=flags, raw=raw)


def eval_h(q: ThresholdQuery) -> RegimeReport:
    """Upper threshold. Certified only while ``h <= 0.5`` and
    ``m <= eps^-2 e^(C_E2 p)``; violations are flagged, not extrapolated."""
    c, m, eps, p, s = q.constants, q.m, q.eps, q.p, q.s
    inputs = {**q.echo(), "constants": c.as_dict()}
    flags = _hypothesis_flags(q)
    if m > _exp(c.C_E2 * p) / eps**2:
        flags.append("hypothesis:m>eps^-2*e^(C_E2*p)")
    zero_edge = c.C_M1 * p / eps**2
    middle_edge = c.C_M2 * p / eps**2
    sparse_edge = s * _exp(c.C_E1 * p / (eps * s))
    guards = [("zero", m <= zero_edge),
              ("sqrt_log", m >= max(sparse_edge, middle_edge)),
              ("min_form", middle_edge <= m < sparse_edge)]
    chosen = next((name for name, holds in guards if holds), None)
    if chosen is None:
        return _report("indeterminate_gap", 0.0, inputs, applicable=False,
                       flags=flags + ["indeterminate:C_M1<m*eps^2/p<C_M2"])
    flags += _overlaps(guards, chosen)
    if chosen == "zero":
        return _report(chosen, 0.0, inputs, flags=flags, raw=0.0)
    terms = _middle_terms(m, eps, p)
    if terms is None:
        return _report(chosen, 0.0, inputs, applicable=False, flags=flags + ["log-argument<1"])
    raw = c.C_v * math.sqrt(eps * s) * (terms[1] if chosen == "sqrt_log" else min(terms))
    if raw > 0.5:
        flags.append("gate:h>0.5")
    return _report(chosen, raw, inputs, flags=flags, raw=raw)


def eval_f_fkl(m: float, eps: float, delta: float,
               constants: BoundConstants | None = None) -> RegimeReport:
    """The s = 1 feature-hashing threshold, up to its leading constant."""
    q = ThresholdQuery(m, eps, delta, 1, constants or BoundConstants())
    c, p = q.constants, q.p
    inputs = {**q.echo(), "constants": c.as_dict()}
    guards = [("full_space", m >= 2 * _exp(p) / eps**2),
              ("zero", m <= c.C_M1 * p / eps**2),
              ("min_form", c.C_M2 * p / eps**2 <= m < 2 * _exp(p) / eps**2)]
    chosen = next((name for name, holds in guards if holds), None)
    if chosen is None:
        return _report("indeterminate_gap", 0.0, inputs, applicable=False,
                       flags=["indeterminate:C_M1<m*eps^2/p<C_M2"])
    flags = _overlaps(guards, chosen)
    if chosen == "full_space":
        return _report(chosen, 1.0, inputs, flags=flags, raw=1.0)
    if chosen == "zero":
        return _report(chosen, 0.0, inputs, flags=flags, raw=0.0)
    terms = _middle_terms(m, eps, p)
    if terms is None:
        return _report(chosen, 0.0, inputs, applicable=False, flags=flags + ["log-argument<1"])
    raw = c.lead_f * math.sqrt(eps) * min(terms)
    return _report(chosen, raw, inputs, flags=flags, raw=raw)


# moment bounds ---------------------------------------------------------------

def _is_power_of_two(q) -> bool:
    return int(q) == q and q >= 1 and (int(q) & (int(q) - 1)) == 0


def _is_even_int(q) -> bool:
    return int(q) == q and int(q) % 2 == 0


def eval_moment_upper(m: int, s: int, v: float, q: int,
                      constants: BoundConstants | None = None) -> RegimeReport:
    """Upper bound on ``||R(x)||_q`` over unit x with ``||x||_inf <= v``."""
    c = constants or BoundConstants()
    if not _is_even_int(q) or not 2 <= q <= m:
        raise ConfigurationError(f"q must be an even integer in [2, m], got q={q}, m={m}")
    if not 0 < v <= 1:
        raise ConfigurationError(f"v must lie in (0, 1], got {v}")
    inputs = {"m": m, "s": s, "v": v, "q": q}
    base = math.sqrt(q) / math.sqrt(m)
    if q == 2:
        return _report("q2", math.sqrt(2) / math.sqrt(m), inputs)
    if s * math.e / (m * v * v) >= q:
        return _report("small_v", c.lead_moment_upper * base, inputs)
    if c.C_2 * q**3 * m * v**4 < s * s:
        return _report("not_applicable", 0.0, inputs, applicable=False,
                       flags=["C_2*q^3*m*v^4<s^2"])
    l4 = _ln(q * m * v**4 / s**2)
    l2 = _ln(q * m * v**2 / s)  # > 1 here since q m v^2 / s > e
    sq_term = c.C_2 ** (1 / 3) * q * q * v * v / (s * l2 * l2)
    log_ms = _ln(m / s)
    flat_term = q / (s * log_ms) if log_ms > 0 else math.inf
    if l4 <= 2 and l2 <= q:
        branch, value = "case1", max(base, sq_term)
    elif l4 <= 2:
        branch, value = "case2", base
    elif l2 <= q:
        branch, value = "case3", max(base, q * v * v / (s * l4), min(sq_term, flat_term))
    else:
        branch, value = "case4", max(base, q * v * v / (s * l4))
    return _report(branch, c.lead_moment_upper * value, inputs)


def eval_moment_lower(m: int, s: int, v: float, q: int,
                      constants: BoundConstants | None = None) -> RegimeReport:
    """Lower bounds on ``||R||_q`` for the hard vector with ratio v (uniform flavor).

    Lists every branch whose side conditions hold and reports the largest.
    """
    c = constants or BoundConstants()
    inputs = {"m": m, "s": s, "v": v, "q": q}
    flags = []
    if not _is_power_of_two(q) or not 2 <= q <= m:
        flags.append("conditions-violated:q must be a power of 2 in [2, m]")
    if not 0 < v <= 0.5:
        flags.append("conditions-violated:v must lie in (0, 0.5]")
    inv = 1.0 / (v * v) if v > 0 else math.inf
    if not (abs(inv - round(inv)) <= 1e-9 * inv and round(inv) % 2 == 0):
        flags.append("conditions-violated:1/v^2 must be an even integer")
    if flags:
        return _report("none", 0.0, inputs, applicable=False, flags=flags)

    branches = []
    if q * v * v <= s:
        branches.append(("sqrt_q", math.sqrt(q) / math.sqrt(m)))
    l4 = _ln(q * m * v**4 / s**2)
    if m >= q and 2 <= l4 <= q and 2 * q * v * v <= 0.5 * s * l4 and s <= m / 2:
        branches.append(("log4", q * v * v / (s * l4)))
    l2 = _ln(q * m * v * v / s)
    if (s <= m / 2 and 1 <= l2 <= q
            and v <= math.sqrt(max(_ln(m / s), 0.0)) / math.sqrt(q)):
        branches.append(("log2_sq", q * q * v * v / (s * l2 * l2)))
    if not branches:
        return _report("none", 0.0, inputs, applicable=False, flags=["no-branch"])
    branches = [(name, c.lead_moment_lower * val) for name, val in branches]
    best = max(branches, key=lambda b: b[1])
    return _report(best[0], best[1], inputs, branches=branches)


def eval_row_bounds(m: int, s: int, v: float, T: int, direction,
                    constants: BoundConstants | None = None,
                    indicator_two: bool = False) -> RegimeReport:
    """Bounds on the single-row moment ``||Z_1||_T``.

    Upper holds for any x with ``||x||_inf <= v``. Lower is for the hard
    vector with ``1/v^2`` even under the uniform flavor; ``indicator_two``
    selects the bound for ``Z_1`` restricted to rows hit by exactly two
    support coordinates.
    """
    c = constants or BoundConstants()
    direction = Direction(direction)
    if int(T) != T or T < 2:
        raise ConfigurationError(f"T must be an integer >= 2, got {T}")
    if not 0 < v <= 1:
        raise ConfigurationError(f"v must lie in (0, 1], got {v}")
    inputs = {"m": m, "s": s, "v": v, "T": T, "direction": direction.value,
              "indicator_two": indicator_two}
    knee = s * math.e / (m * v * v)
    log_t = _ln(m * T * v * v / s)

    if direction is Direction.UPPER:
        lead = c.lead_row_upper
        if T == 2 or 3 <= T <= knee:
            return _report("linear", lead * T * s / m, inputs)
        if log_t <= T:
            log_ms = _ln(m / s)
            flat = T / log_ms if log_ms > 0 else math.inf
            return _report("log_sq", lead * min(T * T * v * v / log_t**2, flat), inputs)
        return _report("power", lead * v * v * (s / (m * T * v * v)) ** (2 / T), inputs)

    lead = c.lead_row_lower
    inv = 1.0 / (v * v)
    if not (abs(inv - round(inv)) <= 1e-9 * inv and round(inv) % 2 == 0):
        return _report("not_applicable", 0.0, inputs, applicable=False,
                       flags=["hypothesis:1/v^2 must be an even integer"])
    power = v * v * (s / (m * T * v * v)) ** (2 / T)
    tail_ok = T % 2 == 0 and T >= knee and s <= m / 2
    if indicator_two:
        if not tail_ok:
            return _report("not_applicable", 0.0, inputs, applicable=False,
                           flags=["hypothesis:even T >= s e/(m v^2), s <= m/2"])
        return _report("indicator_two", lead * power, inputs)
    if T == 2:
        return _report("T2", lead * s / m, inputs)
    if not tail_ok:
        return _report("not_applicable", 0.0, inputs, applicable=False,
                       flags=["hypothesis:even T >= s e/(m v^2), s <= m/2"])
    if 1 <= log_t <= T and v <= math.sqrt(max(_ln(m / s), 0.0) / T):
        return _report("log_sq", lead * T * T * v * v / log_t**2, inputs)
    if log_t > T:
        return _report("power", lead * power, inputs)
    return _report("not_applicable", 0.0, inputs, applicable=False, flags=["no-branch"])


# dimension tradeoffs -----------------------------------------------------------

def _sparsity_flags(eps, delta, s, low, c):
    p = math.log(1 / delta)
    if not low <= s <= c.C_S * p / eps:
        return [f"s-out-of-range:[{low:g}, {c.C_S * p / eps:g}]"]
    return []


def kn_dimension(eps: float, delta: float, s: int,
                 constants: BoundConstants | None = None) -> RegimeReport:
    """Target dimension sufficient for distortion eps on all of R^n."""
    c = constants or BoundConstants()
    q = ThresholdQuery(1, eps, delta, s, c)
    p = q.p
    arms = [("chebyshev", 2 / (eps**2 * delta)),
            ("sparse", c.C_M * p * _exp(c.C_S * p / (eps * s)) / eps**2)]
    name, value = min(arms, key=lambda a: a[1])
    flags = _sparsity_flags(eps, delta, s, 1, c)
    inputs = {"eps": eps, "delta": delta, "s": s, "p": p}
    return _report(name, value, inputs, applicable=not flags, flags=flags, branches=arms)


def dimension_lower(eps: float, delta: float, s: int,
                    constants: BoundConstants | None = None) -> RegimeReport:
    """Dimension at or below which the threshold stays at most 1/2."""
    c = constants or BoundConstants()
    q = ThresholdQuery(1, eps, delta, s, c)
    p = q.p
    arms = [("delta_power", _exp(c.C_T * p) / eps**2),
            ("sparse", p * _exp(c.C_L * p / (eps * s)) / eps**2)]
    name, value = min(arms, key=lambda a: a[1])
    flags = _sparsity_flags(eps, delta, s, c.C_floor, c)
    inputs = {"eps": eps, "delta": delta, "s": s, "p": p}
    return _report(name, value, inputs, applicable=not flags, flags=flags, branches=arms)
