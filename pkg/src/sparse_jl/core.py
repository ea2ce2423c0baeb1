"""Shared domain types: projection parameters, matrices, unit vectors, estimates."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Mapping

import numpy as np


class ConfigurationError(ValueError):
    """Invalid parameters or settings."""


class DimensionError(ValueError):
    """Vector dimension does not fit the requested construction."""


class Flavor(str, enum.Enum):
    UNIFORM = "uniform"
    BLOCK = "block"


class Method(str, enum.Enum):
    EXACT = "exact"
    MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class SjlParams:
    n: int
    m: int
    s: int
    flavor: Flavor = Flavor.UNIFORM

    def __post_init__(self):
        object.__setattr__(self, "flavor", Flavor(self.flavor))
        for name in ("n", "m", "s"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ConfigurationError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.s > self.m:
            raise ConfigurationError(f"s exceeds m (s={self.s}, m={self.m})")
        if self.flavor is Flavor.BLOCK and self.m % self.s:
            raise ConfigurationError(
                f"block flavor needs s to divide m (s={self.s}, m={self.m})")

    @property
    def block_size(self) -> int:
        return self.m // self.s


@dataclass(frozen=True, eq=False)
class SjlMatrix:
    """A sampled projection stored column-wise.

    ``rows[i]`` holds the s distinct (sorted) row indices of column i and
    ``signs[i]`` the matching +-1 signs. The 1/sqrt(s) scale is applied at
    projection time, never stored.
    """

    params: SjlParams
    rows: np.ndarray
    signs: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        signs = np.asarray(self.signs, dtype=np.int8)
        p = self.params
        if rows.shape != (p.n, p.s) or signs.shape != rows.shape:
            raise ConfigurationError(
                f"expected column arrays of shape {(p.n, p.s)}, got {rows.shape} and {signs.shape}")
        if rows.size and (rows.min() < 0 or rows.max() >= p.m):
            raise ConfigurationError("row index out of range")
        if not np.all(np.abs(signs) == 1):
            raise ConfigurationError("signs must be +1 or -1")
        if p.s > 1 and np.any(np.diff(np.sort(rows, axis=1), axis=1) == 0):
            raise ConfigurationError("column support has repeated rows")
        rows.setflags(write=False)
        signs.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "signs", signs)

    def columns(self):
        """Yield each column as a list of (row, sign) pairs."""
        for r, g in zip(self.rows, self.signs):
            yield [(int(a), int(b)) for a, b in zip(r, g)]

    def to_dense(self) -> np.ndarray:
        p = self.params
        out = np.zeros((p.m, p.n))
        cols = np.repeat(np.arange(p.n), p.s)
        out[self.rows.ravel(), cols] = self.signs.ravel() / math.sqrt(p.s)
        return out

    def to_sparse(self):
        from scipy import sparse

        p = self.params
        cols = np.repeat(np.arange(p.n), p.s)
        data = self.signs.ravel().astype(float) / math.sqrt(p.s)
        return sparse.csc_matrix((data, (self.rows.ravel(), cols)), shape=(p.m, p.n))

    def __eq__(self, other):
        if not isinstance(other, SjlMatrix):
            return NotImplemented
        return (self.params == other.params and np.array_equal(self.rows, other.rows)
                and np.array_equal(self.signs, other.signs))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class UnitVector:
    values: np.ndarray
    linf_ratio: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        norm = math.sqrt(math.fsum(values * values))
        if abs(norm - 1.0) >= 1e-12:
            raise ConfigurationError(f"vector is not unit norm (norm={norm!r})")
        if not 0.0 < self.linf_ratio <= 1.0:
            raise ConfigurationError(f"linf_ratio must lie in (0, 1], got {self.linf_ratio}")
        if np.max(np.abs(values)) > self.linf_ratio * (1 + 1e-15):
            raise ConfigurationError("max |x_i| exceeds the recorded linf_ratio")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values)

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.values))


def make_unit_vector(raw) -> UnitVector:
    """Scale ``raw`` to unit l2 norm and record its l_inf / l_2 ratio."""
    arr = np.asarray(raw, dtype=float).ravel()
    if arr.size == 0 or not np.all(np.isfinite(arr)):
        raise ConfigurationError("vector must be non-empty with finite entries")
    norm = math.sqrt(math.fsum(arr * arr))
    if norm == 0.0:
        raise ConfigurationError("cannot normalise the zero vector")
    values = arr / norm
    return UnitVector(values, float(np.max(np.abs(values))))


def hard_vector_size(v: float) -> int:
    if not 0.0 < v <= 1.0:
        raise ConfigurationError(f"v must lie in (0, 1], got {v}")
    return max(1, int(round(1.0 / (v * v))))


def hard_vector(v: float, n: int) -> UnitVector:
    """``[1/sqrt(N), ..., 1/sqrt(N), 0, ...]`` with ``N = round(1/v**2)``.

    The recorded ``linf_ratio`` is the effective ratio ``1/sqrt(N)``.
    """
    big_n = hard_vector_size(v)
    if big_n > n:
        raise DimensionError(f"dimension too small: need N={big_n} leading entries, n={n}")
    values = np.zeros(n)
    values[:big_n] = 1.0 / math.sqrt(big_n)
    return UnitVector(values, float(values[0]))


def basis_vector(n: int, i: int = 0) -> UnitVector:
    values = np.zeros(n)
    values[i] = 1.0
    return UnitVector(values, 1.0)


@dataclass(frozen=True)
class MomentEstimate:
    """An estimate of the q-norm ``(E|R|^q)^(1/q)``."""

    q: float
    value: float
    method: Method
    std_error: float = 0.0
    trials: int = 0

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.q >= 1:
            raise ConfigurationError(f"q must be >= 1, got {self.q}")
        if not self.value >= 0 or not self.std_error >= 0:
            raise ConfigurationError("value and std_error must be nonnegative")
        if self.method is Method.EXACT and (self.std_error != 0 or self.trials != 0):
            raise ConfigurationError("exact estimates carry no std_error or trials")
        if self.method is Method.MONTE_CARLO and self.trials < 1:
            raise ConfigurationError("Monte Carlo estimates need trials >= 1")


def _constant(default: float = 1.0, doc: str = ""):
    return field(default=default, metadata={"doc": doc})


@dataclass(frozen=True)
class BoundConstants:
    """Universal constants of the threshold and moment formulas (all default 1)."""

    C_eps: float = _constant(doc="distortion ceiling: formulas assume eps < C_eps")
    C_delta: float = _constant(doc="failure-probability ceiling: delta < C_delta")
    C_M: float = _constant(doc="dimension floor of g, m >= C_M eps^-2 p")
    C_v: float = _constant(doc="leading factor of the g and h threshold values")
    C_S: float = _constant(doc="sparsity exponent in g's second branch and the sparsity ceiling")
    C_U: float = _constant(doc="exponent in g's full-space branch")
    C_M1: float = _constant(doc="h/f zero-branch dimension factor")
    C_M2: float = _constant(doc="h/f middle-branch dimension factor")
    C_E1: float = _constant(doc="exponent in h's second branch")
    C_E2: float = _constant(doc="h validity ceiling, m <= eps^-2 e^(C_E2 p)")
    C_L: float = _constant(doc="exponent of the sparsity arm of the dimension lower bound")
    C_T: float = _constant(doc="exponent of the first arm of the dimension lower bound")
    C_2: float = _constant(doc="applicability constant of the aggregate moment upper bound")
    C_floor: float = _constant(doc="smallest sparsity covered by the dimension lower bound")
    lead_f: float = _constant(doc="leading constant of the s=1 threshold f")
    lead_moment_upper: float = _constant(doc="leading constant of the aggregate moment upper bound")
    lead_moment_lower: float = _constant(doc="leading constant of the aggregate moment lower bound")
    lead_row_upper: float = _constant(doc="leading constant of the row moment upper bound")
    lead_row_lower: float = _constant(doc="leading constant of the row moment lower bound")

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigurationError(f"constant {f.name} must be a positive finite real, got {value!r}")
            object.__setattr__(self, f.name, float(value))

    @classmethod
    def names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in self.names()}

    def with_overrides(self, overrides: Mapping[str, float]) -> "BoundConstants":
        unknown = sorted(set(overrides) - set(self.names()))
        if unknown:
            raise ConfigurationError(
                f"unknown constant(s) {', '.join(unknown)}; valid names: {', '.join(self.names())}")
        return replace(self, **{k: float(v) for k, v in overrides.items()})


@dataclass(frozen=True)
class RegimeReport:
    """Which branch of a piecewise formula applies, and its value.

    ``applicable`` is False for flagged results (below-domain, not applicable,
    indeterminate gap); ``value`` is then 0 or the best available figure and
    ``flags`` says why. ``branches`` lists every (branch, value) whose guard
    held, for formulas that report more than one.
    """

    branch_id: str
    value: float
    inputs: Mapping[str, Any]
    applicable: bool = True
    flags: tuple[str, ...] = ()
    raw_value: float | None = None
    branches: tuple[tuple[str, float], ...] = ()

    def as_dict(self) -> dict[str, Any]:
        return {
            "branch_id": self.branch_id,
            "value": self.value,
            "raw_value": self.raw_value,
            "applicable": self.applicable,
            "flags": list(self.flags),
            "branches": [list(b) for b in self.branches],
            "inputs": dict(self.inputs),
        }
