"""Stein's unbiased risk estimate for prediction, tuning by SURE, bounds and Monte Carlo risk.

Throughout, the risk of a fit is the expected squared error of predicting a
fresh response at the training design, so OLS has risk ``2 sigma^2`` per
component. SURE_i is the component-wise unbiased estimate of that risk.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cch import DEFAULT_QUAD, QuadControl, horseshoe_moments, log_h_function, shrinkage_z_params
from .core_orthogonal import OrthoCoefficients, RegressionData
from .errors import DomainError, InputError, IntegrationError, SearchFailure
from .estimators import (
    GLOBAL_FAMILIES,
    ShrinkageSpec,
    lambda_max,
    lasso_path,
)

__all__ = [
    "SureBreakdown",
    "BoundEnvelope",
    "SearchControl",
    "C1",
    "C2",
    "C1_TILDE",
    "C2_TILDE",
    "sure_global",
    "sure_horseshoe",
    "sure_components",
    "sure_lasso",
    "minimize_sure_tau",
    "minimize_sure_K",
    "minimize_sure_lasso",
    "bounds_large_s",
    "bounds_small_s",
    "Scenario",
    "RiskEstimator",
    "mc_risk",
]

C1 = (1.0 - 5.0 / (2.0 * math.e)) ** -0.5
C2 = 16.0 / 15.0
C1_TILDE = 1.0 - 2.0 / math.e
C2_TILDE = 4.0 / 3.0


@dataclass(frozen=True)
class SureBreakdown:
    per_component: np.ndarray
    total: float
    tau: float | None
    sigma: float
    family: str
    K: int | None = None


@dataclass(frozen=True)
class BoundEnvelope:
    lower: float
    upper: float
    regime: str

    def __post_init__(self):
        if self.regime not in ("large_s", "s_zero", "s_one"):
            raise InputError(f"unknown regime {self.regime!r}")
        if not self.lower <= self.upper:
            raise InputError("lower bound exceeds upper bound")

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack


def _total(v: np.ndarray) -> float:
    # numpy's add.reduce is pairwise for contiguous float arrays
    return float(np.sum(np.ascontiguousarray(v)))


def _breakdown(v, spec: ShrinkageSpec) -> SureBreakdown:
    return SureBreakdown(per_component=v, total=_total(v), tau=spec.tau, sigma=spec.sigma,
                         family=spec.family, K=spec.K)


# ---------------------------------------------------------------------------
# SURE


def _sure_global_vec(a2d2, d, tau, sigma, family, K=None):
    if family == "pcr":
        out = a2d2.copy()
        out[:K] = 2.0 * sigma**2
        return out
    if family == "ridge":
        t = (tau * d) ** 2
    elif family == "gprior":
        t = np.full_like(d, tau**2)
    else:
        raise InputError(f"{family} is not a global family")
    return a2d2 / (1.0 + t) ** 2 + 2.0 * sigma**2 * t / (1.0 + t)


def sure_global(coeffs: OrthoCoefficients, spec: ShrinkageSpec) -> SureBreakdown:
    """SURE_i = a^2 d^2 / (1 + t_i)^2 + 2 sigma^2 t_i / (1 + t_i) with t_i = tau^2 lambda_i^2 d_i^2.

    PCR keeps 2 sigma^2 for the first K terms and a^2 d^2 for the rest.
    """
    if spec.family not in GLOBAL_FAMILIES:
        raise InputError(f"sure_global does not handle {spec.family}")
    if spec.family == "pcr" and spec.K > coeffs.m:
        raise InputError(f"K={spec.K} exceeds the number of components {coeffs.m}")
    a2d2 = (coeffs.alpha_hat * coeffs.d) ** 2
    v = _sure_global_vec(a2d2, coeffs.d, spec.tau, spec.sigma, spec.family, spec.K)
    return _breakdown(v, spec)


def _hs_from_moments(s, ez, ez2, sigma):
    return 2.0 * sigma**2 * (1.0 - ez + 2.0 * s * ez2 - s * ez**2)


def _hs_tweedie(alpha_hat, d, tau, sigma, quad):
    """SURE_i through m'/m and m''/m written as ratios of H at p = 1, 2, 3."""
    out = np.empty(alpha_hat.size)
    s = (alpha_hat * d) ** 2 / (2.0 * sigma**2)
    theta = 1.0 / (tau * d) ** 2
    for i in range(alpha_hat.size):
        prm = shrinkage_z_params(s[i], theta[i])
        lh1 = log_h_function(prm, quad=quad)
        r2 = math.exp(log_h_function(prm.replace(p=2.0), quad=quad) - lh1)
        r3 = math.exp(log_h_function(prm.replace(p=3.0), quad=quad) - lh1)
        a, di2 = alpha_hat[i], d[i] ** 2
        m1 = -(2.0 / 3.0) * r2 * a * di2 / sigma**2
        m2 = -(2.0 / 3.0) * r2 * di2 / sigma**2 + (8.0 / 15.0) * r3 * a**2 * di2**2 / sigma**4
        out[i] = 2.0 * sigma**2 - sigma**4 / di2 * m1**2 + 2.0 * sigma**4 / di2 * m2
    return out


def sure_horseshoe(coeffs: OrthoCoefficients, spec: ShrinkageSpec, form: str = "moments",
                   quad: QuadControl | None = None) -> SureBreakdown:
    """Horseshoe SURE_i = 2 sigma^2 [1 - E Z + 2 s E Z^2 - s (E Z)^2].

    ``form="tweedie"`` evaluates the same quantity from the marginal's
    derivatives expressed as H-function ratios (slower; used as a cross-check).
    """
    if spec.family != "horseshoe":
        raise InputError("sure_horseshoe needs family='horseshoe'")
    quad = quad or DEFAULT_QUAD
    if form == "moments":
        s = coeffs.signal(spec.sigma)
        ez, ez2 = horseshoe_moments(s, coeffs.theta(spec.tau), quad)
        v = _hs_from_moments(s, ez, ez2, spec.sigma)
    elif form == "tweedie":
        v = _hs_tweedie(coeffs.alpha_hat, coeffs.d, spec.tau, spec.sigma, quad)
    else:
        raise InputError(f"unknown form {form!r}")
    return _breakdown(v, spec)


def sure_components(coeffs: OrthoCoefficients, spec: ShrinkageSpec) -> SureBreakdown:
    if spec.family == "horseshoe":
        return sure_horseshoe(coeffs, spec)
    return sure_global(coeffs, spec)


def sure_lasso(data: RegressionData, beta, df: int, sigma: float) -> float:
    """||y - X beta||^2 + 2 sigma^2 df."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (data.p,):
        raise InputError(f"beta has shape {beta.shape}, expected ({data.p},)")
    r = data.y - data.X @ beta
    return float(r @ r) + 2.0 * sigma**2 * int(df)


# ---------------------------------------------------------------------------
# tuning


@dataclass(frozen=True)
class SearchControl:
    log10_lo: float = -8.0
    log10_hi: float = 4.0
    n_grid: int = 121
    rel_width: float = 1e-6

    def __post_init__(self):
        if not self.log10_lo < self.log10_hi:
            raise InputError("need log10_lo < log10_hi")
        if self.n_grid < 2:
            raise InputError("need at least two grid points")
        if not self.rel_width > 0:
            raise InputError("rel_width must be > 0")

    def grid(self) -> np.ndarray:
        return np.linspace(self.log10_lo, self.log10_hi, self.n_grid)


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden(f, a, b, tol):
    """Golden-section minimum of f on [a, b] (log10 tau); returns (x, f(x))."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def minimize_sure_tau(coeffs: OrthoCoefficients, family: str, sigma: float,
                      search: SearchControl | None = None) -> tuple[float, SureBreakdown]:
    """Grid over log10 tau, then golden-section refinement inside the best bracket.

    Ties on the grid go to the smaller tau. The refined point is only kept if
    it does not raise the objective above the best grid value.
    """
    if family not in ("ridge", "gprior", "horseshoe"):
        raise InputError(f"tau search does not apply to {family!r}")
    search = search or SearchControl()
    base = ShrinkageSpec(family=family, sigma=sigma, tau=1.0)

    def total(lt):
        try:
            t = sure_components(coeffs, base.with_tau(10.0**lt)).total
        except IntegrationError:
            return math.inf
        return t if math.isfinite(t) else math.inf

    grid = search.grid()
    vals = np.array([total(lt) for lt in grid])
    if not np.any(np.isfinite(vals)):
        raise SearchFailure(f"SURE is non-finite at every grid point for {family}")
    i = int(np.argmin(vals))  # first minimum, i.e. the smaller tau
    best_lt, best_val = grid[i], vals[i]
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    tol = search.rel_width / math.log(10.0)
    lt, val = _golden(total, lo, hi, tol)
    if val < best_val:
        best_lt = lt
    tau = float(10.0**best_lt)
    return tau, sure_components(coeffs, base.with_tau(tau))


def minimize_sure_K(coeffs: OrthoCoefficients, sigma: float) -> tuple[int, SureBreakdown]:
    """Exhaustive scan over K = 0..m; ties go to the smaller K."""
    a2d2 = (coeffs.alpha_hat * coeffs.d) ** 2
    # total(K) = 2 sigma^2 K + sum_{i > K} a2d2_i
    tail = np.concatenate([np.cumsum(a2d2[::-1])[::-1], [0.0]])
    totals = 2.0 * sigma**2 * np.arange(coeffs.m + 1) + tail
    K = int(np.argmin(totals))
    spec = ShrinkageSpec(family="pcr", sigma=sigma, K=K)
    return K, sure_global(coeffs, spec)


def minimize_sure_lasso(data: RegressionData, sigma: float, n_lambda: int = 100, min_ratio: float = 1e-3,
                        tol: float = 1e-7, max_iter: int = 100_000):
    """Pick the lasso penalty on a log-spaced warm-started path by SURE.

    Returns ``(lambda, beta, df, sure)``; ties go to the larger penalty.
    The path stops early at the first penalty whose solve exceeds ``max_iter``
    sweeps (strongly collinear designs at tiny penalties).
    """
    lmax = lambda_max(data)
    if lmax == 0.0:
        return 0.0, np.zeros(data.p), 0, sure_lasso(data, np.zeros(data.p), 0, sigma)
    lams = lmax * np.logspace(0.0, math.log10(min_ratio), n_lambda)
    lams, betas, dfs = lasso_path(data, lams, tol, max_iter, stop_on_budget=True)
    sures = np.array([sure_lasso(data, b, df, sigma) for b, df in zip(betas, dfs)])
    i = int(np.argmin(sures))
    return float(lams[i]), betas[i].copy(), int(dfs[i]), float(sures[i])


# ---------------------------------------------------------------------------
# bounds


def bounds_large_s(s: float, theta: float, sigma: float = 1.0) -> BoundEnvelope:
    """Non-asymptotic envelope on horseshoe SURE_i valid for s >= 1, theta >= 1.

    The lower expression is clamped at zero where it is vacuous.
    """
    if not (s >= 1.0 and theta >= 1.0 and math.isfinite(s) and math.isfinite(theta)):
        raise DomainError(f"need s >= 1 and theta >= 1, got s={s}, theta={theta}")
    ct = C1_TILDE + C2_TILDE
    low = 1.0 - theta * ct * (1.0 + s) / s**2 - theta**2 * ct**2 * (1.0 + s) ** 2 / s**3
    up = 1.0 + 2.0 * theta * (1.0 + s) * (C1 / s**2 + C2 / s**1.5)
    two = 2.0 * sigma**2
    return BoundEnvelope(lower=two * max(0.0, low), upper=two * up, regime="large_s")


def bounds_small_s(s: float, theta: float, sigma: float = 1.0) -> BoundEnvelope:
    """Envelopes at s = 0 and s = 1 that hold when tau^2 d^2 <= 1 (theta >= 1)."""
    if not theta >= 1.0:
        raise DomainError(f"need theta >= 1, got {theta}")
    if s == 0.0:
        return BoundEnvelope(0.0, 2.0 * sigma**2 / 3.0, "s_zero")
    if s == 1.0:
        return BoundEnvelope(0.0, 1.93 * sigma**2, "s_one")
    raise DomainError("small-s envelopes exist only at s = 0 and s = 1")


# ---------------------------------------------------------------------------
# Monte Carlo risk


@dataclass(frozen=True)
class Scenario:
    """Truth for a component-wise risk study: alpha_hat_i ~ N(alpha_i, sigma^2 / d_i^2)."""

    alpha_true: np.ndarray
    d: np.ndarray
    sigma: float = 1.0

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.alpha_true, dtype=float))
        d = np.atleast_1d(np.asarray(self.d, dtype=float))
        if d.size == 1 and a.size > 1:
            d = np.full_like(a, d[0])
        if a.shape != d.shape or a.ndim != 1:
            raise InputError("alpha_true and d must be 1-D and of equal length")
        if np.any(~np.isfinite(a)) or np.any(~np.isfinite(d)) or np.any(d <= 0):
            raise InputError("scenario needs finite alpha_true and positive d")
        if not self.sigma > 0:
            raise InputError("sigma must be > 0")
        object.__setattr__(self, "alpha_true", a)
        object.__setattr__(self, "d", d)

    @property
    def m(self) -> int:
        return self.d.size


@dataclass(frozen=True)
class RiskEstimator:
    """``family`` is one of ols, ridge, gprior, pcr, horseshoe, optimal_ridge."""

    family: str
    tau: float | None = None
    K: int | None = None

    def __post_init__(self):
        if self.family not in ("ols", "ridge", "gprior", "pcr", "horseshoe", "optimal_ridge"):
            raise InputError(f"unknown estimator {self.family!r}")
        if self.family in ("ridge", "gprior", "horseshoe") and not (self.tau and self.tau > 0):
            raise InputError(f"{self.family} needs tau > 0")
        if self.family == "pcr" and self.K is None:
            raise InputError("pcr needs K")


_BLOCK = 4096


def _block_rng(seed: int, b: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), 0x5EED, b])))


def _fit_and_sure(ah, sc: Scenario, est: RiskEstimator, quad):
    """Fitted alpha and SURE per (rep, component) for a block of draws ``ah``."""
    d, sigma = sc.d, sc.sigma
    s2 = sigma**2
    if est.family == "ols":
        return ah, np.full_like(ah, 2.0 * s2)
    if est.family in ("ridge", "gprior", "pcr"):
        spec = ShrinkageSpec(est.family, sigma, tau=est.tau, K=est.K)
        if est.family == "pcr":
            f = np.zeros(sc.m)
            f[: est.K] = 1.0
        elif est.family == "ridge":
            t = (est.tau * d) ** 2
            f = t / (1.0 + t)
        else:
            f = np.full(sc.m, est.tau**2 / (1.0 + est.tau**2))
        sure = np.vstack([_sure_global_vec((row * d) ** 2, d, spec.tau, sigma, spec.family, spec.K) for row in ah])
        return ah * f, sure
    if est.family == "horseshoe":
        s = (ah * d) ** 2 / (2.0 * s2)
        theta = np.broadcast_to(1.0 / (est.tau * d) ** 2, ah.shape)
        ez, ez2 = horseshoe_moments(s, theta, quad)
        return ah * (1.0 - ez), _hs_from_moments(s, ez, ez2, sigma)
    # optimal ridge: alpha* = (1 - c/|x|^2) x with c = m sigma^2 on the D = I scale
    if not np.allclose(d, 1.0):
        raise InputError("optimal_ridge risk is defined for orthogonal designs (d = 1)")
    m = sc.m
    ss = np.sum(ah**2, axis=1, keepdims=True)
    shrink = 1.0 - m * s2 / ss
    fit = shrink * ah
    # divergence of (1 - c/|x|^2) x is m - c (m - 2) / |x|^2
    div = m - m * s2 * (m - 2) / ss[:, 0]
    rss = np.sum((fit - ah) ** 2, axis=1)
    per_rep = rss + 2.0 * s2 * div
    return fit, np.repeat((per_rep / m)[:, None], m, axis=1)


def mc_risk(scenario: Scenario, estimator: RiskEstimator, reps: int, seed: int,
            mode: str = "sure", loss: str = "prediction", quad: QuadControl | None = None):
    """Monte Carlo risk per component, averaged over components.

    ``mode="sure"`` averages SURE (unbiased for the risk); ``mode="loss"``
    averages the conditional prediction loss ``sigma^2 + d^2 (alpha_tilde - alpha)^2``.
    ``loss="estimation"`` drops the irreducible ``sigma^2`` term. Draws come in
    fixed blocks, each with its own generator derived from ``(seed, block)``.
    Returns ``(mean, standard_error)``.
    """
    if reps < 2:
        raise InputError("reps must be >= 2")
    if mode not in ("sure", "loss"):
        raise InputError(f"unknown mode {mode!r}")
    if loss not in ("prediction", "estimation"):
        raise InputError(f"unknown loss {loss!r}")
    if estimator.family == "pcr" and estimator.K > scenario.m:
        raise InputError("K exceeds the number of components")
    sc = scenario
    s2 = sc.sigma**2
    per_rep = np.empty(reps)
    for b, start in enumerate(range(0, reps, _BLOCK)):
        n = min(_BLOCK, reps - start)
        z = _block_rng(seed, b).standard_normal((n, sc.m))
        ah = sc.alpha_true + sc.sigma / sc.d * z
        fit, sure = _fit_and_sure(ah, sc, estimator, quad)
        if mode == "sure":
            val = sure.mean(axis=1)
            if loss == "estimation":
                val = val - s2
        else:
            val = np.mean((sc.d * (fit - sc.alpha_true)) ** 2, axis=1)
            if loss == "prediction":
                val = val + s2
        per_rep[start:start + n] = val
    mean = float(np.mean(per_rep))
    se = float(np.std(per_rep, ddof=1) / math.sqrt(reps))
    return mean, se
