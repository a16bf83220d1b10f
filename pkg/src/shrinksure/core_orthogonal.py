"""Orthogonalized regression: thin SVD of the design, OLS in the rotated basis.

With ``X = U diag(d) W^T`` and ``Z = U diag(d)``, the model ``y = X beta + eps``
becomes ``y = Z alpha + eps`` with ``alpha = W^T beta``. Every shrinkage rule in
this package acts on the rotated OLS estimates ``alpha_hat = diag(1/d) U^T y``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDesignError, InputError

__all__ = [
    "RegressionData",
    "DesignDecomposition",
    "OrthoCoefficients",
    "default_rank_tol",
    "decompose",
    "ols_ortho",
    "reconstruct_beta",
    "predict",
]


@dataclass(frozen=True)
class RegressionData:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2:
            raise InputError(f"X must be 2-D, got shape {X.shape}")
        if y.ndim != 1:
            raise InputError(f"y must be 1-D, got shape {y.shape}")
        n, p = X.shape
        if n < 2 or p < 1:
            raise InputError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
        if y.shape[0] != n:
            raise InputError(f"len(y)={y.shape[0]} does not match n={n}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise InputError("X and y must contain only finite values")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class DesignDecomposition:
    """Thin SVD factors with numerically null directions removed."""

    U: np.ndarray  # n x m
    d: np.ndarray  # m, descending, > 0
    W: np.ndarray  # p x m

    @property
    def m(self) -> int:
        return self.d.shape[0]

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def p(self) -> int:
        return self.W.shape[0]

    @property
    def Z(self) -> np.ndarray:
        return self.U * self.d


@dataclass(frozen=True)
class OrthoCoefficients:
    alpha_hat: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha_hat, dtype=float)
        d = np.asarray(self.d, dtype=float)
        if a.shape != d.shape or a.ndim != 1:
            raise InputError("alpha_hat and d must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(d))):
            raise InputError("alpha_hat and d must be finite")
        object.__setattr__(self, "alpha_hat", a)
        object.__setattr__(self, "d", d)

    @property
    def m(self) -> int:
        return self.d.shape[0]

    def signal(self, sigma: float) -> np.ndarray:
        """s_i = alpha_hat_i^2 d_i^2 / (2 sigma^2)."""
        return (self.alpha_hat * self.d) ** 2 / (2.0 * sigma**2)

    def theta(self, tau: float) -> np.ndarray:
        """theta_i = 1 / (tau^2 d_i^2)."""
        return 1.0 / (tau * self.d) ** 2


def default_rank_tol(n: int, p: int) -> float:
    return 1e-12 * max(n, p)


def _fix_signs(U, W):
    # first entry of each u_i with non-negligible magnitude made nonnegative
    scale = np.max(np.abs(U), axis=0)
    mask = np.abs(U) > 1e-12 * scale
    first = np.argmax(mask, axis=0)
    signs = np.sign(U[first, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs, W * signs


def decompose(data: RegressionData | np.ndarray, rank_tol: float | None = None) -> DesignDecomposition:
    """Thin SVD of the design with relative truncation ``d_i < rank_tol * d_1``.

    Accepts either a :class:`RegressionData` or a bare design matrix.
    """
    X = data.X if isinstance(data, RegressionData) else np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise InputError(f"design must be 2-D, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InputError("design contains non-finite entries")
    n, p = X.shape
    if rank_tol is None:
        rank_tol = default_rank_tol(n, p)
    if rank_tol < 0:
        raise InputError("rank_tol must be >= 0")

    U, d, Vt = np.linalg.svd(X, full_matrices=False)
    if d.size == 0 or d[0] <= 0.0:
        raise DegenerateDesignError("design matrix is numerically zero")
    keep = d >= rank_tol * d[0]
    keep &= d > 0.0
    m = int(np.count_nonzero(keep))
    if m == 0:
        raise DegenerateDesignError("no singular value above the rank threshold")
    U = U[:, :m]
    W = Vt[:m].T
    U, W = _fix_signs(U, W)
    return DesignDecomposition(U=np.ascontiguousarray(U), d=d[:m].copy(), W=np.ascontiguousarray(W))


def ols_ortho(decomp: DesignDecomposition, y) -> OrthoCoefficients:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.shape[0] != decomp.n:
        raise InputError(f"y has shape {y.shape}, expected ({decomp.n},)")
    alpha_hat = (decomp.U.T @ y) / decomp.d
    return OrthoCoefficients(alpha_hat=alpha_hat, d=decomp.d.copy())


def reconstruct_beta(alpha_tilde, decomp: DesignDecomposition) -> np.ndarray:
    alpha_tilde = np.asarray(alpha_tilde, dtype=float)
    if alpha_tilde.shape != (decomp.m,):
        raise InputError(f"alpha_tilde has shape {alpha_tilde.shape}, expected ({decomp.m},)")
    return decomp.W @ alpha_tilde


def predict(X_new, beta) -> np.ndarray:
    X_new = np.asarray(X_new, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if X_new.ndim != 2 or beta.ndim != 1 or X_new.shape[1] != beta.shape[0]:
        raise InputError(f"cannot predict with X_new {X_new.shape} and beta {beta.shape}")
    return X_new @ beta
