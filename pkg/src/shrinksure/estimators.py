"""Posterior-mean shrinkage estimators in the orthogonalized basis, plus a lasso baseline.

Global families (ridge, PCR, g-prior) scale each ``alpha_hat_i`` by a fixed
factor ``f_i``. The horseshoe scales by ``1 - E(Z_i)`` where ``Z_i`` is the
data-dependent shrinkage weight.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .cch import QuadControl, horseshoe_moments
from .core_orthogonal import DesignDecomposition, OrthoCoefficients, RegressionData, reconstruct_beta
from .errors import DegenerateDesignError, InputError, IterationBudgetError

__all__ = [
    "FAMILIES",
    "GLOBAL_FAMILIES",
    "ShrinkageSpec",
    "FitResult",
    "lambda_profile",
    "global_posterior_mean",
    "horseshoe_posterior_mean",
    "fit_orthogonal",
    "optimal_ridge_orthogonal",
    "LassoControl",
    "lasso_fit",
    "lasso_path",
    "lambda_max",
]

FAMILIES = ("ridge", "pcr", "gprior", "horseshoe")
GLOBAL_FAMILIES = ("ridge", "pcr", "gprior")


@dataclass(frozen=True)
class ShrinkageSpec:
    family: str
    sigma: float
    tau: float | None = None
    K: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise InputError(f"sigma must be finite and > 0, got {self.sigma}")
        if self.family == "pcr":
            if self.K is None or self.tau is not None:
                raise InputError("pcr takes K and no tau")
            if int(self.K) != self.K or self.K < 0:
                raise InputError(f"K must be a nonnegative integer, got {self.K}")
            object.__setattr__(self, "K", int(self.K))
        else:
            if self.tau is None or self.K is not None:
                raise InputError(f"{self.family} takes tau and no K")
            if not (math.isfinite(self.tau) and self.tau > 0):
                raise InputError(f"tau must be finite and > 0, got {self.tau}")
            object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "sigma", float(self.sigma))

    def with_tau(self, tau: float) -> "ShrinkageSpec":
        return replace(self, tau=float(tau))


@dataclass
class FitResult:
    alpha_tilde: np.ndarray
    beta_tilde: np.ndarray
    spec: ShrinkageSpec
    sure_total: float | None = None
    meta: dict = field(default_factory=dict)


def _check_d(d):
    d = np.asarray(d, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise InputError("d must be a non-empty 1-D array")
    if np.any(~np.isfinite(d)) or np.any(d <= 0):
        raise InputError("singular values must be finite and positive")
    if np.any(np.diff(d) > 0):
        raise InputError("singular values must be sorted descending")
    return d


def lambda_profile(spec: ShrinkageSpec, d) -> np.ndarray:
    """Shrinkage factors f_i = alpha_tilde_i / alpha_hat_i for a global family."""
    d = _check_d(d)
    fam = spec.family
    if fam == "pcr":
        if spec.K > d.size:
            raise InputError(f"K={spec.K} exceeds the number of components {d.size}")
        f = np.zeros_like(d)
        f[: spec.K] = 1.0
        return f
    if fam == "ridge":
        t = (spec.tau * d) ** 2
        return t / (1.0 + t)
    if fam == "gprior":
        t2 = spec.tau**2
        return np.full_like(d, t2 / (1.0 + t2))
    raise InputError("the horseshoe has no fixed shrinkage profile")


def global_posterior_mean(coeffs: OrthoCoefficients, spec: ShrinkageSpec,
                          decomp: DesignDecomposition | None = None) -> FitResult:
    """``alpha_tilde = f * alpha_hat``; beta is filled when ``decomp`` is given."""
    if spec.family not in GLOBAL_FAMILIES:
        raise InputError(f"{spec.family} is not a global shrinkage family")
    alpha = lambda_profile(spec, coeffs.d) * coeffs.alpha_hat
    beta = reconstruct_beta(alpha, decomp) if decomp is not None else np.full(0, np.nan)
    return FitResult(alpha_tilde=alpha, beta_tilde=beta, spec=spec)


def horseshoe_posterior_mean(coeffs: OrthoCoefficients, spec: ShrinkageSpec,
                             decomp: DesignDecomposition | None = None,
                             quad: QuadControl | None = None) -> FitResult:
    if spec.family != "horseshoe":
        raise InputError("horseshoe_posterior_mean needs family='horseshoe'")
    s = coeffs.signal(spec.sigma)
    theta = coeffs.theta(spec.tau)
    ez, _ = horseshoe_moments(s, theta, quad)
    alpha = coeffs.alpha_hat * (1.0 - ez)
    beta = reconstruct_beta(alpha, decomp) if decomp is not None else np.full(0, np.nan)
    return FitResult(alpha_tilde=alpha, beta_tilde=beta, spec=spec, meta={"E_Z": ez})


def fit_orthogonal(coeffs: OrthoCoefficients, spec: ShrinkageSpec,
                   decomp: DesignDecomposition | None = None) -> FitResult:
    if spec.family == "horseshoe":
        return horseshoe_posterior_mean(coeffs, spec, decomp)
    return global_posterior_mean(coeffs, spec, decomp)


def optimal_ridge_orthogonal(coeffs: OrthoCoefficients, sigma: float, n: int | None = None) -> np.ndarray:
    """Closed-form C_L-optimal ridge for an orthogonal design.

    The factor ``1 - n sigma^2 / sum(alpha_hat^2)`` is applied as is, so it
    can be negative. ``n`` defaults to the number of components.
    """
    a = coeffs.alpha_hat
    n = a.size if n is None else int(n)
    ss = float(np.dot(a, a))
    if ss == 0.0:
        raise DegenerateDesignError("sum of squared alpha_hat is zero")
    return (1.0 - n * sigma**2 / ss) * a


# ---------------------------------------------------------------------------
# lasso


@dataclass(frozen=True)
class LassoControl:
    tol: float = 1e-7
    max_iter: int = 100_000


@njit(cache=True)
def _cd_sweep(X, r, lam, beta, col_sq, idx):
    delta = 0.0
    n = X.shape[0]
    for j in idx:
        if col_sq[j] == 0.0:
            continue
        bj = beta[j]
        rho = np.dot(X[:, j], r) + col_sq[j] * bj
        if rho > lam:
            new = (rho - lam) / col_sq[j]
        elif rho < -lam:
            new = (rho + lam) / col_sq[j]
        else:
            new = 0.0
        if new != bj:
            diff = new - bj
            for i in range(n):
                r[i] -= diff * X[i, j]
            beta[j] = new
            if abs(diff) > delta:
                delta = abs(diff)
    return delta


@njit(cache=True)
def _cd(X, y, lam, beta, tol, max_iter):
    # full sweeps alternate with sweeps restricted to the nonzero set; the
    # solve ends only when a full sweep moves no coefficient by tol or more.
    # The budget counts full-sweep equivalents: a restricted sweep costs |A|/p.
    p = X.shape[1]
    col_sq = np.empty(p)
    for j in range(p):
        col_sq[j] = np.dot(X[:, j], X[:, j])
    r = y - X @ beta
    everything = np.arange(p)
    work = 0.0
    while work < max_iter:
        delta = _cd_sweep(X, r, lam, beta, col_sq, everything)
        work += 1.0
        if delta < tol:
            return work, True
        active = np.flatnonzero(beta)
        cost = active.size / p
        while work < max_iter:
            delta = _cd_sweep(X, r, lam, beta, col_sq, active)
            work += cost
            if delta < tol:
                break
    return work, False


def lambda_max(data: RegressionData) -> float:
    """Smallest penalty at which the lasso solution is identically zero."""
    return float(np.max(np.abs(data.X.T @ data.y)))


_POLISH_EVERY = 50


def _polish(X, y, lam, beta) -> bool:
    # CD finds the support and signs long before the coefficients settle on
    # collinear designs. Given them, the solution solves a linear system; keep
    # it only if signs and the inactive KKT conditions check out.
    A = np.flatnonzero(beta)
    if A.size == 0 or A.size > X.shape[0]:
        return False
    sgn = np.sign(beta[A])
    XA = X[:, A]
    G = XA.T @ XA
    if np.linalg.cond(G) > 1e12:
        return False
    b = np.linalg.solve(G, XA.T @ y - lam * sgn)
    if np.any(np.sign(b) != sgn):
        return False
    r = y - XA @ b
    if np.max(np.abs(X.T @ r)) > lam * (1.0 + 1e-9) + 1e-12:
        return False
    beta[:] = 0.0
    beta[A] = b
    return True


def lasso_fit(data: RegressionData, lambda_reg: float, tol: float = 1e-7, max_iter: int = 100_000,
              beta0=None) -> tuple[np.ndarray, int]:
    """Cyclic coordinate descent for ``0.5 ||y - X b||^2 + lambda_reg ||b||_1``.

    Stops when the largest coefficient change in a full sweep is below
    ``tol``; between full sweeps only the nonzero coefficients are cycled.
    Every 50 sweeps the current support and signs are tried as an exact
    active-set solve, which ends the loop when it satisfies the KKT conditions.
    ``max_iter`` bounds the work in full-sweep equivalents.
    Returns ``(beta, df)`` with df the number of nonzero coefficients.
    """
    if not (math.isfinite(lambda_reg) and lambda_reg >= 0):
        raise InputError(f"lambda_reg must be finite and >= 0, got {lambda_reg}")
    X = np.ascontiguousarray(data.X)
    beta = np.zeros(data.p) if beta0 is None else np.array(beta0, dtype=float)
    if beta.shape != (data.p,):
        raise InputError(f"beta0 has shape {beta.shape}, expected ({data.p},)")
    Xf = np.asfortranarray(X)
    work, ok = 0.0, False
    while not ok and work < max_iter:
        used, ok = _cd(Xf, data.y, float(lambda_reg), beta, float(tol), min(_POLISH_EVERY, max_iter - work))
        work += used
        if not ok:
            ok = _polish(Xf, data.y, float(lambda_reg), beta)
    if not ok:
        raise IterationBudgetError(
            f"lasso coordinate descent did not reach tol={tol} in {max_iter} sweeps", last_iterate=beta
        )
    return beta, int(np.count_nonzero(beta))


def lasso_path(data: RegressionData, lambdas, tol: float = 1e-7, max_iter: int = 100_000,
               stop_on_budget: bool = False):
    """Warm-started fits along ``lambdas`` (sorted to decreasing order).

    Returns ``(lambdas, betas, dfs)`` with betas of shape (len, p). With
    ``stop_on_budget`` the path ends at the first penalty whose solve runs out
    of sweeps instead of raising; the arrays are then shorter than the input.
    """
    lambdas = np.sort(np.asarray(lambdas, dtype=float))[::-1]
    betas = np.empty((lambdas.size, data.p))
    dfs = np.empty(lambdas.size, dtype=int)
    beta = np.zeros(data.p)
    for i, lam in enumerate(lambdas):
        try:
            beta, df = lasso_fit(data, lam, tol, max_iter, beta0=beta)
        except IterationBudgetError:
            if not stop_on_budget or i == 0:
                raise
            return lambdas[:i], betas[:i], dfs[:i]
        betas[i] = beta
        dfs[i] = df
    return lambdas, betas, dfs
