"""Sampling sparse JL matrices and evaluating the distortion error.

Randomness is drawn from fixed-size trial blocks, each with its own
generator derived from ``(root, stream, block index)``. A block's draws do
not depend on which worker runs it, so any degree of parallelism reproduces
the same samples.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import DimensionError, Flavor, SjlMatrix, SjlParams, UnitVector

BLOCK_TRIALS = 2048
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Seed:
    root: int
    stream: int = 0

    def __post_init__(self):
        for name in ("root", "stream"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or not 0 <= value <= _MASK64:
                raise ValueError(f"seed {name} must be an unsigned 64-bit integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    def child(self, stream: int) -> "Seed":
        """A seed for an independent sub-experiment (e.g. one grid point)."""
        return Seed(self.root, (self.stream * 1_000_003 + stream + 1) & _MASK64)

    def generator(self, block: int = 0) -> np.random.Generator:
        seq = np.random.SeedSequence(self.root, spawn_key=(self.stream, block))
        return np.random.Generator(np.random.PCG64(seq))

    def hex(self) -> str:
        return f"{self.root:#x}" if not self.stream else f"{self.root:#x}/{self.stream:#x}"


def as_seed(seed) -> Seed:
    if isinstance(seed, Seed):
        return seed
    return Seed(int(seed))


def sample_supports(rng: np.random.Generator, count: int, m: int, s: int,
                    flavor: Flavor = Flavor.UNIFORM) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``count`` independent columns: rows (count, s) and signs (count, s).

    Uniform: Floyd's subset sampler (exactly uniform s-subsets of [m], O(s^2)
    work per column, no O(m) scratch). Block: one row per contiguous m/s block.
    Signs are i.i.d. Rademacher, drawn after and independent of the supports.
    """
    flavor = Flavor(flavor)
    rows = np.empty((count, s), dtype=np.int64)
    if flavor is Flavor.BLOCK:
        width = m // s
        rows[:] = rng.integers(0, width, size=(count, s)) + width * np.arange(s)
    else:
        for j, top in enumerate(range(m - s, m)):
            pick = rng.integers(0, top + 1, size=count)
            if j:
                taken = (rows[:, :j] == pick[:, None]).any(axis=1)
                pick = np.where(taken, top, pick)
            rows[:, j] = pick
        rows.sort(axis=1)
    signs = (rng.integers(0, 2, size=(count, s), dtype=np.int8) * 2 - 1).astype(np.int8)
    return rows, signs


def sample_matrix(params: SjlParams, seed) -> SjlMatrix:
    rows, signs = sample_supports(as_seed(seed).generator(), params.n, params.m, params.s,
                                  params.flavor)
    return SjlMatrix(params, rows, signs)


def _check_dims(A: SjlMatrix, x) -> np.ndarray:
    values = x.values if isinstance(x, UnitVector) else np.asarray(x, dtype=float)
    if values.shape != (A.params.n,):
        raise DimensionError(f"vector has shape {values.shape}, matrix expects ({A.params.n},)")
    return values


def _unscaled_image(A: SjlMatrix, values: np.ndarray) -> np.ndarray:
    # sum over the nonzero coordinates only: O(s * nnz(x))
    nz = np.flatnonzero(values)
    weights = A.signs[nz] * values[nz, None]
    return np.bincount(A.rows[nz].ravel(), weights=weights.ravel(), minlength=A.params.m)


def project(A: SjlMatrix, x) -> np.ndarray:
    """Return ``Ax`` with nonzero entries sign/sqrt(s)."""
    values = _check_dims(A, x)
    return _unscaled_image(A, values) / math.sqrt(A.params.s)


def error_sample(A: SjlMatrix, x) -> float:
    """``R(x) = ||Ax||^2 - 1``.

    The squared norm is formed from the unscaled image and divided by s once,
    so basis vectors give exactly 0.
    """
    values = _check_dims(A, x)
    y = _unscaled_image(A, values)
    return float(np.dot(y, y) / A.params.s - 1.0)


def error_sample_explicit(A: SjlMatrix, x) -> float:
    """The double-sum form ``(1/s) sum_{i != j} sum_r eta eta sigma sigma x_i x_j``."""
    values = _check_dims(A, x)
    total = 0.0
    cols = [dict(zip(map(int, r), map(int, g))) for r, g in zip(A.rows, A.signs)]
    for i in range(A.params.n):
        for j in range(A.params.n):
            if i == j:
                continue
            shared = cols[i].keys() & cols[j].keys()
            total += sum(cols[i][r] * cols[j][r] for r in shared) * values[i] * values[j]
    return total / A.params.s


def _gaussian_error(rows, gauss, xv, m, s):
    # rows/gauss: (B, N, s); R~ = (||y||^2 - diagonal) / s with y = sum eta g x
    batch = rows.shape[0]
    w = gauss * xv[None, :, None]
    idx = rows + m * np.arange(batch)[:, None, None]
    y = np.bincount(idx.ravel(), weights=w.ravel(), minlength=batch * m).reshape(batch, m)
    diag = (w * w).sum(axis=(1, 2))
    return ((y * y).sum(axis=1) - diag) / s


def error_sample_gaussian(A_support: SjlMatrix, x, seed) -> float:
    """Gaussian-coefficient error: the supports of ``A_support`` with fresh N(0,1) entries."""
    values = _check_dims(A_support, x)
    nz = np.flatnonzero(values)
    if nz.size < 2:
        return 0.0
    p = A_support.params
    g = as_seed(seed).generator().standard_normal(size=(1, nz.size, p.s))
    return float(_gaussian_error(A_support.rows[None, nz], g, values[nz], p.m, p.s)[0])


def _block_errors(seed: Seed, block: int, size: int, xv: np.ndarray, m: int, s: int,
                  flavor: Flavor, gaussian: bool):
    rng = seed.generator(block)
    count = size * xv.size
    rows, signs = sample_supports(rng, count, m, s, flavor)
    rows = rows.reshape(size, xv.size, s)
    signs = signs.reshape(size, xv.size, s)
    idx = rows + m * np.arange(size)[:, None, None]
    w = signs * xv[None, :, None]
    y = np.bincount(idx.ravel(), weights=w.ravel(), minlength=size * m).reshape(size, m)
    r = (y * y).sum(axis=1) / s - 1.0
    if not gaussian:
        return r, None
    g = rng.standard_normal(size=rows.shape)
    return r, _gaussian_error(rows, g, xv, m, s)


def error_samples(params: SjlParams, x, trials: int, seed, workers: int = 1,
                  gaussian: bool = False):
    """Draw ``trials`` i.i.d. copies of R(x), one fresh matrix per trial.

    With ``gaussian=True`` also returns the paired Gaussian-coefficient error on
    the same supports; otherwise the second element is None.
    """
    seed = as_seed(seed)
    values = x.values if isinstance(x, UnitVector) else np.asarray(x, dtype=float)
    if values.shape != (params.n,):
        raise DimensionError(f"vector has shape {values.shape}, params expect ({params.n},)")
    xv = values[np.flatnonzero(values)]
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if xv.size <= 1:
        # a single coordinate has no cross terms
        zeros = np.zeros(trials)
        return zeros, (zeros.copy() if gaussian else None)

    sizes = [min(BLOCK_TRIALS, trials - start) for start in range(0, trials, BLOCK_TRIALS)]

    def run(block):
        return _block_errors(seed, block, sizes[block], xv, params.m, params.s,
                             params.flavor, gaussian)

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(b) for b in range(len(sizes))]
    r = np.concatenate([p[0] for p in parts])
    if not gaussian:
        return r, None
    return r, np.concatenate([p[1] for p in parts])
