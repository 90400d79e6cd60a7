"""Hybrid Kronecker product approximation (hKoPA) of real matrices.

A matrix is approximated by ``sum_k lam_k * kron(A_k, B_k)`` where each term
may use a different factor shape.  See :mod:`hkopa.kopa_fit` for the
estimators.
"""

__version__ = "0.1.0"

from .configspace import (AmbientShape, Configuration, enumerate_configurations, is_nested,
                          parameter_count)
from .exceptions import FormatError, HKopaError, NumericalError, ShapeError
from .kopa_fit import (FitOptions, FitReport, ICSpec, Stopping, backfit, fit_single_given_config,
                       fit_single_select_config, greedy_fit, ic_value, stopping_threshold)
from .matrix import NoiseSpec, add_noise, frobenius_norm, kron, trace_product
from .orthogonalize import check_assumption2, gram_schmidt, projection_coefficients
from .rearrange import rearrange, unrearrange, unvec, vec
from .terms import HKopaModel, KroneckerTerm, evaluate, normalize_term, residual
from .baseline import compare, rse, svd_approximation

__all__ = [
    "AmbientShape", "Configuration", "enumerate_configurations", "is_nested", "parameter_count",
    "FormatError", "HKopaError", "NumericalError", "ShapeError",
    "FitOptions", "FitReport", "ICSpec", "Stopping", "backfit", "fit_single_given_config",
    "fit_single_select_config", "greedy_fit", "ic_value", "stopping_threshold",
    "NoiseSpec", "add_noise", "frobenius_norm", "kron", "trace_product",
    "check_assumption2", "gram_schmidt", "projection_coefficients",
    "rearrange", "unrearrange", "unvec", "vec",
    "HKopaModel", "KroneckerTerm", "evaluate", "normalize_term", "residual",
    "compare", "rse", "svd_approximation",
]
