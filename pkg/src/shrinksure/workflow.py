"""Data-level fitting used by the command line: standardization, SURE or CV tuning, splits.

All randomness (CV folds, train/test splits) comes from :func:`shrinksure.sim.stream`
with the ``splits`` stream, so results are a pure function of the seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core_orthogonal import RegressionData, decompose, ols_ortho, reconstruct_beta
from .errors import InputError
from .estimators import ShrinkageSpec, fit_orthogonal, lambda_max, lasso_fit, lasso_path
from .risk import (
    SearchControl,
    minimize_sure_K,
    minimize_sure_lasso,
    minimize_sure_tau,
    sure_components,
    sure_lasso,
)
from .sim import stream

__all__ = [
    "DATA_METHODS",
    "Standardizer",
    "TunedFit",
    "SplitPlan",
    "fit_fixed",
    "fit_sure",
    "fit_cv",
    "kfold",
    "plug_in_sigma",
    "evaluate_splits",
]

DATA_METHODS = ("ridge", "gprior", "pcr", "horseshoe", "lasso")


@dataclass(frozen=True)
class Standardizer:
    """Centering/scaling fitted on training rows; ``mode`` is none, response or both."""

    mode: str
    x_mean: np.ndarray
    x_scale: np.ndarray
    y_mean: float
    y_scale: float

    @classmethod
    def fit(cls, X, y, mode: str = "none") -> "Standardizer":
        if mode not in ("none", "response", "both"):
            raise InputError(f"unknown standardize mode {mode!r}")
        p = X.shape[1]
        xm, xs = np.zeros(p), np.ones(p)
        ym, ys = 0.0, 1.0
        if mode in ("response", "both"):
            ym = float(np.mean(y))
            ys = float(np.std(y, ddof=1))
            if not ys > 0:
                raise InputError("response is constant; cannot standardize")
        if mode == "both":
            xm = X.mean(axis=0)
            xs = X.std(axis=0, ddof=1)
            xs = np.where(xs > 0, xs, 1.0)
        return cls(mode, xm, xs, ym, ys)

    def X(self, X):
        return (X - self.x_mean) / self.x_scale

    def y(self, y):
        return (y - self.y_mean) / self.y_scale

    def y_inverse(self, yz):
        return yz * self.y_scale + self.y_mean


@dataclass
class TunedFit:
    method: str
    param_name: str  # tau, K or lambda
    param: float
    beta: np.ndarray
    alpha_tilde: np.ndarray | None = None
    alpha_hat: np.ndarray | None = None
    d: np.ndarray | None = None
    sure_per_component: np.ndarray | None = None
    sure_total: float | None = None
    sigma: float | None = None
    curve: list = field(default_factory=list)  # (param, objective) pairs

    def predict(self, X) -> np.ndarray:
        return X @ self.beta


def _param_name(method):
    return {"pcr": "K", "lasso": "lambda"}.get(method, "tau")


def _check_method(method):
    if method not in DATA_METHODS:
        raise InputError(f"unknown method {method!r}; expected one of {DATA_METHODS}")


def fit_fixed(data: RegressionData, method: str, param: float, sigma: float | None = None) -> TunedFit:
    """Fit at a given tau / K / lambda. SURE is attached when sigma is given."""
    _check_method(method)
    if method == "lasso":
        beta, df = lasso_fit(data, float(param))
        sure = sure_lasso(data, beta, df, sigma) if sigma else None
        return TunedFit(method, "lambda", float(param), beta, sure_total=sure, sigma=sigma)
    if method == "horseshoe" and sigma is None:
        raise InputError("the horseshoe posterior mean needs sigma")
    decomp = decompose(data)
    coeffs = ols_ortho(decomp, data.y)
    s = sigma if sigma is not None else 1.0
    if method == "pcr":
        K = int(param)
        spec = ShrinkageSpec("pcr", s, K=K)
    else:
        spec = ShrinkageSpec(method, s, tau=float(param))
    fit = fit_orthogonal(coeffs, spec, decomp)
    out = TunedFit(method, _param_name(method), float(param), fit.beta_tilde, alpha_tilde=fit.alpha_tilde,
                   alpha_hat=coeffs.alpha_hat, d=decomp.d, sigma=sigma)
    if sigma is not None:
        br = sure_components(coeffs, spec)
        out.sure_per_component = br.per_component
        out.sure_total = br.total
    return out


def fit_sure(data: RegressionData, method: str, sigma: float, search: SearchControl | None = None,
             keep_curve: bool = False) -> TunedFit:
    """Tune by minimizing SURE and return the fit at the optimum."""
    _check_method(method)
    if not (sigma and sigma > 0):
        raise InputError("SURE tuning needs sigma > 0")
    if method == "lasso":
        lam, beta, _df, sure = minimize_sure_lasso(data, sigma)
        return TunedFit("lasso", "lambda", lam, beta, sure_total=sure, sigma=sigma)
    decomp = decompose(data)
    coeffs = ols_ortho(decomp, data.y)
    curve = []
    if method == "pcr":
        K, br = minimize_sure_K(coeffs, sigma)
        spec = ShrinkageSpec("pcr", sigma, K=K)
        param = float(K)
        if keep_curve:
            a2d2 = (coeffs.alpha_hat * coeffs.d) ** 2
            tail = np.concatenate([np.cumsum(a2d2[::-1])[::-1], [0.0]])
            tot = 2.0 * sigma**2 * np.arange(coeffs.m + 1) + tail
            curve = [(float(k), float(t)) for k, t in enumerate(tot)]
    else:
        search = search or SearchControl()
        tau, br = minimize_sure_tau(coeffs, method, sigma, search)
        spec = ShrinkageSpec(method, sigma, tau=tau)
        param = tau
        if keep_curve:
            for lt in search.grid():
                t = float(10.0**lt)
                curve.append((t, sure_components(coeffs, spec.with_tau(t)).total))
    fit = fit_orthogonal(coeffs, spec, decomp)
    return TunedFit(method, _param_name(method), param, fit.beta_tilde, alpha_tilde=fit.alpha_tilde,
                    alpha_hat=coeffs.alpha_hat, d=decomp.d, sure_per_component=br.per_component,
                    sure_total=br.total, sigma=sigma, curve=curve)


def kfold(n: int, folds: int, rng: np.random.Generator) -> list[np.ndarray]:
    if folds < 2 or folds > n:
        raise InputError(f"need 2 <= folds <= n, got folds={folds}, n={n}")
    perm = rng.permutation(n)
    return [np.sort(f) for f in np.array_split(perm, folds)]


def plug_in_sigma(data: RegressionData) -> float:
    """OLS residual scale when at least 10 residual degrees of freedom remain, else sd(y)."""
    decomp = decompose(data)
    dof = data.n - decomp.m
    if dof >= 10:
        coeffs = ols_ortho(decomp, data.y)
        r = data.y - decomp.Z @ coeffs.alpha_hat
        return float(np.sqrt(r @ r / dof))
    return float(np.std(data.y, ddof=1))


def _cv_candidates(data, method, search):
    if method == "pcr":
        return None  # depends on fold rank
    if method == "lasso":
        lmax = lambda_max(data)
        return lmax * np.logspace(0.0, -3.0, 100)
    return 10.0 ** search.grid()


def fit_cv(data: RegressionData, method: str, folds: int = 5, seed: int = 0, sigma: float | None = None,
           search: SearchControl | None = None, stream_index: tuple = (1, 0)) -> TunedFit:
    """K-fold CV over the tuning grid (tau grid, K = 0..m, or a lasso penalty path).

    The horseshoe needs a noise scale; without ``sigma`` it uses
    :func:`plug_in_sigma`.
    Ties go to the smaller tau / K and the larger penalty.
    """
    _check_method(method)
    search = search or SearchControl()
    plug_in = method == "horseshoe" and sigma is None
    if plug_in:
        sigma = plug_in_sigma(data)
        if not sigma > 0:
            raise InputError("constant response; cannot set a horseshoe noise scale")
    parts = kfold(data.n, folds, stream(seed, "splits", *stream_index))
    cands = _cv_candidates(data, method, search)
    if method == "pcr":
        m_min = min(min(data.n - f.size, data.p) for f in parts)
        cands = np.arange(m_min + 1, dtype=float)
    err = np.zeros(cands.size)
    for f in parts:
        train = np.setdiff1d(np.arange(data.n), f)
        tr = RegressionData(data.X[train], data.y[train])
        Xte, yte = data.X[f], data.y[f]
        err += _fold_errors(tr, Xte, yte, method, cands, sigma)
    mse = err / data.n
    i = int(np.argmin(mse))  # candidates ordered so the first minimum is the preferred tie
    best = float(cands[i])
    out = fit_fixed(data, method, best, sigma)
    if plug_in:
        # a plug-in noise scale does not license a SURE report
        out.sure_per_component = None
        out.sure_total = None
    out.curve = [(float(c), float(e)) for c, e in zip(cands, mse)]
    return out


def _fold_errors(tr, Xte, yte, method, cands, sigma):
    if method == "lasso":
        lams, betas, _ = lasso_path(tr, cands, stop_on_budget=True)
        errs = np.full(cands.size, math.inf)
        for j in range(lams.size):
            r = yte - Xte @ betas[j]
            errs[j] = r @ r
        return errs
    decomp = decompose(tr)
    coeffs = ols_ortho(decomp, tr.y)
    s = sigma if sigma is not None else 1.0
    errs = np.empty(cands.size)
    for j, c in enumerate(cands):
        if method == "pcr":
            spec = ShrinkageSpec("pcr", s, K=int(c))
        else:
            spec = ShrinkageSpec(method, s, tau=float(c))
        beta = reconstruct_beta(fit_orthogonal(coeffs, spec).alpha_tilde, decomp)
        r = yte - Xte @ beta
        errs[j] = r @ r
    return errs


@dataclass(frozen=True)
class SplitPlan:
    train_fraction: float = 0.75
    n_repeats: int = 20
    cv_folds: int = 5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise InputError("train_fraction must lie in (0, 1)")
        if self.cv_folds < 2:
            raise InputError("cv_folds must be >= 2")
        if self.n_repeats < 1:
            raise InputError("n_repeats must be >= 1")


def evaluate_splits(X, y, methods, plan: SplitPlan, tuning: str = "cv", sigma: float | None = None,
                    standardize: str = "none"):
    """Test MSE per (repeat, method) over random train/test splits.

    Standardization is fitted on the training rows of each split and MSE is
    reported on the standardized response scale. Returns an array of shape
    (n_repeats, len(methods)).
    """
    n = X.shape[0]
    n_train = int(round(plan.train_fraction * n))
    if n_train < 2 or n_train >= n:
        raise InputError(f"train fraction {plan.train_fraction} leaves no usable split for n={n}")
    out = np.empty((plan.n_repeats, len(methods)))
    for r in range(plan.n_repeats):
        perm = stream(plan.seed, "splits", 0, r).permutation(n)
        tr, te = np.sort(perm[:n_train]), np.sort(perm[n_train:])
        st = Standardizer.fit(X[tr], y[tr], standardize)
        data = RegressionData(st.X(X[tr]), st.y(y[tr]))
        Xte, yte = st.X(X[te]), st.y(y[te])
        for j, m in enumerate(methods):
            if tuning == "sure":
                fit = fit_sure(data, m, sigma)
            else:
                fit = fit_cv(data, m, plan.cv_folds, plan.seed, sigma, stream_index=(1, r))
            e = yte - fit.predict(Xte)
            out[r, j] = float(e @ e) / te.size
    return out
