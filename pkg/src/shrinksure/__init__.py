"""Shrinkage regression in the SVD basis with SURE-based tuning and risk evaluation."""
from .cch import CchParams, cch_moment, h_function, horseshoe_moments, phi1
from .core_orthogonal import (
    DesignDecomposition,
    OrthoCoefficients,
    RegressionData,
    decompose,
    ols_ortho,
    predict,
    reconstruct_beta,
)
from .errors import ShrinkSureError
from .estimators import FitResult, ShrinkageSpec, fit_orthogonal, lasso_fit
from .risk import SearchControl, SureBreakdown, minimize_sure_K, minimize_sure_tau, sure_components

__version__ = "0.1.0"

__all__ = [
    "CchParams",
    "cch_moment",
    "h_function",
    "horseshoe_moments",
    "phi1",
    "DesignDecomposition",
    "OrthoCoefficients",
    "RegressionData",
    "decompose",
    "ols_ortho",
    "predict",
    "reconstruct_beta",
    "ShrinkSureError",
    "FitResult",
    "ShrinkageSpec",
    "fit_orthogonal",
    "lasso_fit",
    "SearchControl",
    "SureBreakdown",
    "minimize_sure_K",
    "minimize_sure_tau",
    "sure_components",
]
