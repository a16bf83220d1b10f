"""Adaptive 21-point Gauss-Kronrod quadrature for the CCH kernel family.

All integrals have the form

    int_0^1 y^(P-1) (1-y)^(Q-1) {theta (1-y) + y}^(-R) exp(-sig*y) (y - c)^j dy

evaluated for several powers ``j`` at once on a shared subdivision. The unit
interval is split at 1/2; on the lower half ``y = u^(1/P)`` removes the
``y^(P-1)`` singularity when P < 1, on the upper half ``1 - y = t^(1/Q)``
removes ``(1-y)^(Q-1)`` when Q < 1. Both y and 1-y are carried so that
neither side suffers cancellation.

Returned values are scaled: the true integral is ``value * exp(log_offset)``
with ``log_offset`` from :func:`log_offset`. The scaling keeps the integrand
O(1) at its peak for large |sig| and large theta.
"""
import math

import numba
import numpy as np
from numba import njit, prange

# TBB shipped with some images is too old and numba warns on every import
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

# QUADPACK qk21 abscissae (descending, last is the centre) and weights
XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600854451275,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
# 10-point Gauss weights for XGK[1], XGK[3], ..., XGK[9]
WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

EPMACH = np.finfo(float).eps
UFLOW = np.finfo(float).tiny
# geometric break points L * 2^(-5k), k = 0..N_GEO, at both ends
N_GEO = 10


def log_offset(R, theta, sig):
    out = 0.0
    if theta > 1.0 and R != 0.0:
        out -= R * math.log(theta)
    if sig < 0.0:
        out -= sig
    return out


@njit(cache=True)
def _log_kernel(u, half, P, Q, R, theta, sig):
    if half == 0:
        if P < 1.0:
            y = u ** (1.0 / P)
            lk = -math.log(P)
        else:
            y = u
            lk = 0.0 if P == 1.0 else (P - 1.0) * math.log(y)
        omy = 1.0 - y
        if Q != 1.0:
            lk += (Q - 1.0) * math.log(omy)
    else:
        if Q < 1.0:
            omy = u ** (1.0 / Q)
            lk = -math.log(Q)
        else:
            omy = u
            lk = 0.0 if Q == 1.0 else (Q - 1.0) * math.log(omy)
        y = 1.0 - omy
        if P != 1.0:
            lk += (P - 1.0) * math.log(y)
    if R != 0.0:
        if theta > 1.0:
            a = omy + y / theta
        else:
            a = theta * omy + y
        lk -= R * math.log(a)
    if sig >= 0.0:
        lk -= sig * y
    else:
        lk += sig * omy
    return lk, y


@njit(cache=True)
def _gk21(a, b, half, P, Q, R, theta, sig, c, js, res, err, rabs):
    K = js.shape[0]
    centr = 0.5 * (a + b)
    hl = 0.5 * (b - a)
    fv = np.empty((21, K))
    # row 0: centre, rows 2j+1 / 2j+2: left / right partners of XGK[j]
    for i in range(21):
        if i == 0:
            x = centr
        else:
            j = (i - 1) // 2
            x = centr - hl * XGK[j] if (i - 1) % 2 == 0 else centr + hl * XGK[j]
        lk, y = _log_kernel(x, half, P, Q, R, theta, sig)
        base = math.exp(lk)
        for k in range(K):
            jk = js[k]
            if jk == 0:
                fv[i, k] = base
            else:
                fv[i, k] = base * (y - c) ** jk
    for k in range(K):
        resk = WGK[10] * fv[0, k]
        resg = 0.0
        resabs = WGK[10] * abs(fv[0, k])
        for j in range(10):
            f1 = fv[2 * j + 1, k]
            f2 = fv[2 * j + 2, k]
            resk += WGK[j] * (f1 + f2)
            resabs += WGK[j] * (abs(f1) + abs(f2))
            if j % 2 == 1:
                resg += WG[j // 2] * (f1 + f2)
        reskh = 0.5 * resk
        resasc = WGK[10] * abs(fv[0, k] - reskh)
        for j in range(10):
            resasc += WGK[j] * (abs(fv[2 * j + 1, k] - reskh) + abs(fv[2 * j + 2, k] - reskh))
        result = resk * hl
        dh = abs(hl)
        resabs *= dh
        resasc *= dh
        e = abs((resk - resg) * hl)
        if resasc != 0.0 and e != 0.0:
            e = resasc * min(1.0, (200.0 * e / resasc) ** 1.5)
        if resabs > UFLOW / (50.0 * EPMACH):
            e = max(EPMACH * 50.0 * resabs, e)
        res[k] = result
        err[k] = e
        rabs[k] = resabs


@njit(cache=True)
def integrate_family(P, Q, R, theta, sig, c, js, epsrel, epsabs, limit):
    """Adaptive integral of the scaled kernel times (y - c)^j for each j.

    Convergence per component: err_k <= max(epsrel*|I_k|, epsabs*int|f_k|).
    Returns (values, errors, ier) with ier = 1 when ``limit`` intervals
    were exhausted first.
    """
    K = js.shape[0]
    A = np.empty(limit)
    B = np.empty(limit)
    H = np.empty(limit, dtype=np.int64)
    V = np.empty((limit, K))
    E = np.empty((limit, K))
    AB = np.empty((limit, K))
    res = np.empty(K)
    er = np.empty(K)
    ra = np.empty(K)
    n = 0
    for half in range(2):
        if half == 0:
            L = 0.5 if P >= 1.0 else 0.5 ** P
        else:
            L = 0.5 if Q >= 1.0 else 0.5 ** Q
        prev = 0.0
        for g in range(N_GEO, -1, -1):
            right = L * 2.0 ** (-5.0 * g)
            _gk21(prev, right, half, P, Q, R, theta, sig, c, js, res, er, ra)
            A[n] = prev
            B[n] = right
            H[n] = half
            for k in range(K):
                V[n, k] = res[k]
                E[n, k] = er[k]
                AB[n, k] = ra[k]
            n += 1
            prev = right

    tot = np.zeros(K)
    toterr = np.zeros(K)
    tol = np.zeros(K)
    ier = 0
    while True:
        for k in range(K):
            tot[k] = 0.0
            toterr[k] = 0.0
            totabs = 0.0
            for i in range(n):
                tot[k] += V[i, k]
                toterr[k] += E[i, k]
                totabs += AB[i, k]
            tol[k] = max(epsrel * abs(tot[k]), epsabs * totabs)
        done = True
        for k in range(K):
            if toterr[k] > tol[k]:
                done = False
        if done:
            break
        if n >= limit:
            ier = 1
            break
        worst = -1.0
        iw = 0
        for i in range(n):
            for k in range(K):
                r = E[i, k] / max(tol[k], 1e-300)
                if r > worst:
                    worst = r
                    iw = i
        a = A[iw]
        b = B[iw]
        if b - a <= 4.0 * EPMACH * max(abs(a), abs(b)):
            ier = 1
            break
        mid = 0.5 * (a + b)
        h = H[iw]
        _gk21(a, mid, h, P, Q, R, theta, sig, c, js, res, er, ra)
        B[iw] = mid
        for k in range(K):
            V[iw, k] = res[k]
            E[iw, k] = er[k]
            AB[iw, k] = ra[k]
        _gk21(mid, b, h, P, Q, R, theta, sig, c, js, res, er, ra)
        A[n] = mid
        B[n] = b
        H[n] = h
        for k in range(K):
            V[n, k] = res[k]
            E[n, k] = er[k]
            AB[n, k] = ra[k]
        n += 1
    return tot.copy(), toterr.copy(), ier


@njit(cache=True, parallel=True)
def integrate_batch(P, Q, R, thetas, sigs, cs, js, epsrel, epsabs, limit):
    """Row-wise :func:`integrate_family` over arrays of (theta, sig, c).

    Rows are independent, so the result does not depend on the thread count.
    """
    N = thetas.shape[0]
    K = js.shape[0]
    vals = np.empty((N, K))
    errs = np.empty((N, K))
    iers = np.empty(N, dtype=np.int64)
    for i in prange(N):
        v, e, ier = integrate_family(P, Q, R, thetas[i], sigs[i], cs[i], js, epsrel, epsabs, limit)
        for k in range(K):
            vals[i, k] = v[k]
            errs[i, k] = e[k]
        iers[i] = ier
    return vals, errs, iers
