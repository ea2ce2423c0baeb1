"""scikit-learn transformer front end for sparse JL projections."""

from __future__ import annotations

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, validate_data

from .core import ConfigurationError, Flavor, SjlParams
from .sampler import Seed, error_sample, sample_matrix


class SparseJLProjection(TransformerMixin, BaseEstimator):
    """Project rows of X from n features to ``n_components`` with a sparse JL matrix.

    Every column of the projection has exactly ``n_nonzero`` entries equal to
    +-1/sqrt(n_nonzero). ``flavor="uniform"`` picks each column's support as a
    uniformly random subset; ``flavor="block"`` picks one row from each of
    ``n_nonzero`` contiguous blocks.

    Parameters
    ----------
    n_components : int
        Target dimension m.
    n_nonzero : int, default=1
        Nonzeros per column s. ``n_nonzero=1`` is plain feature hashing.
    flavor : {"uniform", "block"}, default="uniform"
    random_state : int, default=0
        Root of the 64-bit seed; fitting twice with the same value gives the
        same matrix.
    stream : int, default=0
        Seed stream tag, for drawing independent matrices from one root.

    Attributes
    ----------
    matrix_ : SjlMatrix
    components_ : scipy.sparse.csr_matrix of shape (n_components, n_features_in_)
    n_features_in_ : int
    """

    def __init__(self, n_components=8, n_nonzero=1, flavor="uniform", random_state=0, stream=0):
        self.n_components = n_components
        self.n_nonzero = n_nonzero
        self.flavor = flavor
        self.random_state = random_state
        self.stream = stream

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.input_tags.sparse = True
        return tags

    def fit(self, X, y=None):
        X = validate_data(self, X, accept_sparse=("csr", "csc"), reset=True)
        try:
            params = SjlParams(X.shape[1], self.n_components, self.n_nonzero, Flavor(self.flavor))
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc
        self.matrix_ = sample_matrix(params, Seed(self.random_state, self.stream))
        self.components_ = self.matrix_.to_sparse().tocsr()
        return self

    def transform(self, X):
        check_is_fitted(self, "matrix_")
        X = validate_data(self, X, accept_sparse=("csr", "csc"), reset=False)
        out = X @ self.components_.T
        if sparse.issparse(out):
            return out.tocsr()
        return np.asarray(out)

    def distortion(self, X) -> np.ndarray:
        """Per-row ``||A x||^2 / ||x||^2 - 1`` for the nonzero rows of X."""
        check_is_fitted(self, "matrix_")
        X = check_array(X)
        norms = np.linalg.norm(X, axis=1)
        if np.any(norms == 0):
            raise ValueError("rows of X must be nonzero")
        return np.array([error_sample(self.matrix_, row / nrm) for row, nrm in zip(X, norms)])
