"""Sparse Johnson-Lindenstrauss transforms: sampling, exact and Monte Carlo
error analysis, and closed-form threshold bounds."""

from .bounds import (Direction, ThresholdQuery, dimension_lower, eval_f_fkl, eval_g, eval_h,
                     eval_moment_lower, eval_moment_upper, eval_row_bounds, kn_dimension)
from .core import (BoundConstants, ConfigurationError, DimensionError, Flavor, Method,
                   MomentEstimate, RegimeReport, SjlMatrix, SjlParams, UnitVector, basis_vector,
                   hard_vector, make_unit_vector)
from .estimator import SparseJLProjection
from .exact import (BudgetExceededError, EnumerationBudget, exact_moment, exact_row_moment,
                    exact_tail)
from .matrix_io import format_matrix, parse_matrix, read_matrix, write_matrix
from .montecarlo import (TailEstimate, ThresholdCurve, compare_gaussian, empirical_threshold,
                         gaussian_vs_rademacher, markov_bound, mc_moment, mc_tail,
                         paley_zygmund_bound)
from .sampler import Seed, error_sample, error_samples, project, sample_matrix

__all__ = [
    "BoundConstants", "BudgetExceededError", "ConfigurationError", "DimensionError",
    "Direction", "EnumerationBudget", "Flavor", "Method", "MomentEstimate", "RegimeReport",
    "Seed", "SjlMatrix", "SjlParams", "SparseJLProjection", "TailEstimate", "ThresholdCurve",
    "ThresholdQuery", "UnitVector", "basis_vector", "compare_gaussian", "dimension_lower",
    "empirical_threshold", "error_sample", "error_samples", "eval_f_fkl", "eval_g", "eval_h",
    "eval_moment_lower", "eval_moment_upper", "eval_row_bounds", "exact_moment",
    "exact_row_moment", "exact_tail", "format_matrix", "gaussian_vs_rademacher",
    "hard_vector", "kn_dimension", "make_unit_vector", "markov_bound", "mc_moment", "mc_tail",
    "paley_zygmund_bound", "parse_matrix", "project", "read_matrix", "sample_matrix",
    "write_matrix",
]
