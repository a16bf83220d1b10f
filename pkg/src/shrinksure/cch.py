"""Compound confluent hypergeometric (CCH) distribution.

Density on ``0 < x < 1/nu``::

    x^(p-1) (1 - nu x)^(q-1) {theta + (1 - theta) nu x}^(-r) exp(-s x) / (B(p, q) H)

The normaliser ``H(p, q, r, s, nu, theta) = nu^-p exp(-s/nu) Phi1(q, r, p+q, s/nu, 1-theta)``
is evaluated by adaptive quadrature; the Phi1 double series is an alternative
path inside its convergence region. For the horseshoe, the shrinkage weight
``Z = 1/(1 + tau^2 lambda^2 d^2)`` given the data is CCH(1, 1/2, 1, s, 1, theta).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, gammaln

from . import _kronrod
from .errors import (
    BudgetExceededError,
    ConvergenceRegionError,
    DomainError,
    IntegrationError,
)

__all__ = [
    "CchParams",
    "SeriesControl",
    "QuadControl",
    "log_pochhammer",
    "phi1",
    "h_function",
    "log_h_function",
    "cch_moment",
    "cch_raw_moments",
    "cch_central_moment",
    "cch_pdf",
    "cch_cov_zw",
    "shrinkage_z_params",
    "horseshoe_moments",
]


@dataclass(frozen=True)
class CchParams:
    p: float
    q: float
    r: float
    s: float
    nu: float
    theta: float

    def __post_init__(self):
        vals = (self.p, self.q, self.r, self.s, self.nu, self.theta)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError(f"CCH parameters must be finite: {vals}")
        if self.p <= 0 or self.q <= 0:
            raise DomainError(f"need p > 0 and q > 0, got p={self.p}, q={self.q}")
        if not 0.0 <= self.nu <= 1.0:
            raise DomainError(f"need 0 <= nu <= 1, got nu={self.nu}")
        if self.theta <= 0:
            raise DomainError(f"need theta > 0, got theta={self.theta}")
        if self.nu == 0.0 and self.s <= 0:
            raise DomainError("nu = 0 gives an unbounded support; need s > 0")

    def replace(self, **kw) -> "CchParams":
        d = dict(p=self.p, q=self.q, r=self.r, s=self.s, nu=self.nu, theta=self.theta)
        d.update(kw)
        return CchParams(**d)

    @property
    def upper(self) -> float:
        return math.inf if self.nu == 0.0 else 1.0 / self.nu


@dataclass(frozen=True)
class SeriesControl:
    rel_tol: float = 1e-12
    max_terms: int = 10**6

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be > 0")
        if self.max_terms < 1:
            raise DomainError("max_terms must be >= 1")


@dataclass(frozen=True)
class QuadControl:
    epsrel: float = 1e-10
    epsabs: float = 1e-12  # relative to the L1 mass of the integrand
    limit: int = 2000


DEFAULT_SERIES = SeriesControl()
DEFAULT_QUAD = QuadControl()
_SERIES_MAX_X1 = 700.0


def log_pochhammer(a: float, k: int) -> tuple[float, float]:
    """Return ``(sign, log|(a)_k|)`` of the rising factorial.

    Products are formed directly for k <= 20 and as a running log-sum beyond.
    """
    if k < 0:
        raise DomainError("k must be >= 0")
    if k <= 20:
        prod = 1.0
        for i in range(k):
            prod *= a + i
        if prod == 0.0:
            return 0.0, -math.inf
        return math.copysign(1.0, prod), math.log(abs(prod))
    sign, acc = 1.0, 0.0
    for i in range(k):
        t = a + i
        if t == 0.0:
            return 0.0, -math.inf
        if t < 0:
            sign = -sign
        acc += math.log(abs(t))
    return sign, acc


# ---------------------------------------------------------------------------
# Phi1 double series


def phi1(a: float, b: float, g: float, x1: float, x2: float, ctrl: SeriesControl | None = None) -> float:
    """Humbert's confluent series for |x2| < 1::

        Phi1 = sum_{m,n} (a)_{m+n} (b)_n / ((g)_{m+n} m! n!) x1^m x2^n

    ``x1`` is the confluent (exponential) argument and ``x2`` the
    hypergeometric one, so that ``B(p,q) H = nu^-p e^(-s/nu) B(p,q) Phi1(q, r, p+q, s/nu, 1-theta)``.
    Summed along anti-diagonals m + n = N; stops once three consecutive
    anti-diagonal sums are each below ``rel_tol`` times the running total.
    """
    ctrl = ctrl or DEFAULT_SERIES
    if not g > 0:
        raise DomainError(f"need g > 0, got {g}")
    if not abs(x2) < 1.0:
        raise ConvergenceRegionError(f"Phi1 series diverges for |x2| = {abs(x2)} >= 1")
    diag = np.array([1.0])
    total = 1.0
    terms = 1
    quiet = 0
    N = 0
    while True:
        N += 1
        n = np.arange(N - 1, -1, -1, dtype=float)  # n index for m = 0..N-1
        new = np.empty(N + 1)
        ratio = (a + N - 1) / (g + N - 1)
        new[:N] = diag * ratio * (b + n) / (n + 1.0) * x2
        new[N] = diag[N - 1] * ratio * x1 / N
        step = float(new.sum())
        total += step
        terms += N + 1
        if not math.isfinite(total):
            raise BudgetExceededError(f"Phi1 series overflowed at anti-diagonal {N}")
        if abs(step) < ctrl.rel_tol * abs(total):
            quiet += 1
            if quiet >= 3:
                return total
        else:
            quiet = 0
        if terms >= ctrl.max_terms:
            raise BudgetExceededError(f"Phi1 series used {terms} terms without converging")
        diag = new


# ---------------------------------------------------------------------------
# quadrature path


def _integrals(P, Q, R, theta, sig, c, js, quad: QuadControl):
    js = np.asarray(js, dtype=np.int64)
    vals, errs, ier = _kronrod.integrate_family(
        float(P), float(Q), float(R), float(theta), float(sig), float(c), js,
        quad.epsrel, quad.epsabs, quad.limit,
    )
    if ier:
        achieved = float(np.max(np.abs(errs) / np.maximum(np.abs(vals), 1e-300)))
        raise IntegrationError(
            f"CCH quadrature did not converge (P={P}, Q={Q}, R={R}, theta={theta}, sig={sig}); "
            f"achieved relative error {achieved:.3g}",
            achieved=achieved,
        )
    return vals, _kronrod.log_offset(float(R), float(theta), float(sig))


def _log_beta_h_quad(params: CchParams, quad: QuadControl) -> float:
    """log of B(p,q) H = log int_0^(1/nu) kernel dx (nu > 0)."""
    vals, off = _integrals(params.p, params.q, params.r, params.theta, params.s / params.nu, 0.0, [0], quad)
    return math.log(vals[0]) + off - params.p * math.log(params.nu)


def _log_beta_h_gamma(params: CchParams) -> float:
    # nu = 0: int_0^inf x^(p-1) theta^-r exp(-s x) dx
    return -params.r * math.log(params.theta) + gammaln(params.p) - params.p * math.log(params.s)


def log_h_function(params: CchParams, ctrl: SeriesControl | None = None,
                   method: str = "quadrature", quad: QuadControl | None = None) -> float:
    """Natural log of H; see :func:`h_function`."""
    quad = quad or DEFAULT_QUAD
    if params.nu == 0.0:
        return _log_beta_h_gamma(params) - betaln(params.p, params.q)
    if method not in ("quadrature", "series"):
        raise ValueError(f"unknown method {method!r}")
    x1 = params.s / params.nu
    x2 = 1.0 - params.theta
    if method == "series" and abs(x2) < 1.0 and abs(x1) <= _SERIES_MAX_X1:
        val = phi1(params.q, params.r, params.p + params.q, x1, x2, ctrl)
        if val > 0:
            return -params.p * math.log(params.nu) - x1 + math.log(val)
    return _log_beta_h_quad(params, quad) - betaln(params.p, params.q)


def h_function(params: CchParams, ctrl: SeriesControl | None = None,
               method: str = "quadrature", quad: QuadControl | None = None) -> float:
    """Normaliser H with ``B(p,q) H = int_0^(1/nu) x^(p-1)(1-nu x)^(q-1){theta+(1-theta) nu x}^-r e^(-s x) dx``.

    ``method="series"`` uses ``nu^-p e^(-s/nu) Phi1(q, r, p+q, s/nu, 1-theta)``
    when ``|1 - theta| < 1`` and ``s/nu`` is moderate, and quadrature otherwise.
    """
    return math.exp(log_h_function(params, ctrl, method, quad))


# ---------------------------------------------------------------------------
# moments


def cch_moment(params: CchParams, k: int, ctrl: SeriesControl | None = None,
               quad: QuadControl | None = None) -> float:
    """E(X^k) = (p)_k / (p+q)_k * H(p+k, ...) / H(p, ...)."""
    if int(k) != k or k < 1:
        raise DomainError("k must be a positive integer")
    k = int(k)
    _, lp = log_pochhammer(params.p, k)
    _, lpq = log_pochhammer(params.p + params.q, k)
    lh_k = log_h_function(params.replace(p=params.p + k), ctrl, quad=quad)
    lh_0 = log_h_function(params, ctrl, quad=quad)
    return math.exp(lp - lpq + lh_k - lh_0)


def cch_raw_moments(params: CchParams, ks, quad: QuadControl | None = None) -> np.ndarray:
    """E(X^k) for each k in ``ks`` from one shared quadrature pass."""
    quad = quad or DEFAULT_QUAD
    ks = [int(k) for k in ks]
    if params.nu == 0.0:
        return np.array([math.exp(gammaln(params.p + k) - gammaln(params.p) - k * math.log(params.s)) for k in ks])
    vals, _ = _integrals(params.p, params.q, params.r, params.theta, params.s / params.nu, 0.0, [0] + ks, quad)
    return vals[1:] / vals[0] / params.nu ** np.array(ks, dtype=float)


def _gamma_central(p, s, k):
    if k == 2:
        return p / s**2
    if k == 3:
        return 2.0 * p / s**3
    return 3.0 * p * (p + 2.0) / s**4


def cch_central_moment(params: CchParams, k: int, ctrl: SeriesControl | None = None,
                       quad: QuadControl | None = None) -> float:
    """E(X - mu)^k for k in {2, 3, 4}, by quadrature of the centred integrand."""
    if k not in (2, 3, 4):
        raise DomainError("central moments are provided for k in {2, 3, 4}")
    quad = quad or DEFAULT_QUAD
    if params.nu == 0.0:
        return _gamma_central(params.p, params.s, k)
    nu = params.nu
    sig = params.s / nu
    vals, _ = _integrals(params.p, params.q, params.r, params.theta, sig, 0.0, [0, 1], quad)
    mu_y = vals[1] / vals[0]
    cv, _ = _integrals(params.p, params.q, params.r, params.theta, sig, mu_y, [0, k], quad)
    return cv[1] / cv[0] / nu**k


def cch_cov_zw(params: CchParams, quad: QuadControl | None = None) -> float:
    """Cov(X, W) with ``W = (1 - nu X) / {theta + (1 - theta) nu X}``.

    ``d E(X) / d theta = -r Cov(X, W)``.
    """
    quad = quad or DEFAULT_QUAD
    if params.nu == 0.0:
        raise DomainError("Cov(X, W) requires nu > 0")
    sig = params.s / params.nu
    base, off0 = _integrals(params.p, params.q, params.r, params.theta, sig, 0.0, [0, 1], quad)
    shifted, off1 = _integrals(params.p, params.q + 1.0, params.r + 1.0, params.theta, sig, 0.0, [0, 1], quad)
    scale = math.exp(off1 - off0)
    e_z = base[1] / base[0]
    e_w = shifted[0] * scale / base[0]
    e_zw = shifted[1] * scale / base[0]
    return (e_zw - e_z * e_w) / params.nu


def cch_pdf(x: float, params: CchParams, ctrl: SeriesControl | None = None,
            quad: QuadControl | None = None) -> float:
    if not 0.0 < x < params.upper:
        raise DomainError(f"x = {x} outside the support (0, {params.upper})")
    nu, th = params.nu, params.theta
    lk = (params.p - 1.0) * math.log(x) - params.s * x
    if nu > 0:
        lk += (params.q - 1.0) * math.log1p(-nu * x) - params.r * math.log(th + (1.0 - th) * nu * x)
        lbh = _log_beta_h_quad(params, quad or DEFAULT_QUAD)
    else:
        lk -= params.r * math.log(th)
        lbh = _log_beta_h_gamma(params)
    return math.exp(lk - lbh)


def shrinkage_z_params(s_i: float, theta_i: float) -> CchParams:
    """Law of the horseshoe shrinkage weight Z_i given the data."""
    return CchParams(p=1.0, q=0.5, r=1.0, s=float(s_i), nu=1.0, theta=float(theta_i))


def horseshoe_moments(s, theta, quad: QuadControl | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised E(Z) and E(Z^2) for Z ~ CCH(1, 1/2, 1, s, 1, theta)."""
    quad = quad or DEFAULT_QUAD
    s, theta = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(theta, dtype=float))
    shape = s.shape
    s = np.ascontiguousarray(s.ravel())
    theta = np.ascontiguousarray(theta.ravel())
    if np.any(~np.isfinite(s)) or np.any(~np.isfinite(theta)) or np.any(theta <= 0):
        raise DomainError("horseshoe moments need finite s and finite theta > 0")
    js = np.array([0, 1, 2], dtype=np.int64)
    vals, errs, iers = _kronrod.integrate_batch(
        1.0, 0.5, 1.0, theta, s, np.zeros_like(s), js, quad.epsrel, quad.epsabs, quad.limit
    )
    if np.any(iers):
        bad = int(np.flatnonzero(iers)[0])
        raise IntegrationError(
            f"horseshoe moment quadrature failed at s={s[bad]}, theta={theta[bad]}",
            achieved=float(np.max(errs[bad] / np.abs(vals[bad]))),
        )
    e1 = vals[:, 1] / vals[:, 0]
    e2 = vals[:, 2] / vals[:, 0]
    return e1.reshape(shape), e2.reshape(shape)
