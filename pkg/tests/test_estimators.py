import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shrinksure.core_orthogonal import OrthoCoefficients, RegressionData, decompose, ols_ortho
from shrinksure.errors import DegenerateDesignError, InputError, IterationBudgetError
from shrinksure.estimators import (
    ShrinkageSpec,
    fit_orthogonal,
    global_posterior_mean,
    horseshoe_posterior_mean,
    lambda_max,
    lambda_profile,
    lasso_fit,
    lasso_path,
    optimal_ridge_orthogonal,
)


def coeffs(a, d=None):
    a = np.asarray(a, dtype=float)
    return OrthoCoefficients(a, np.ones_like(a) if d is None else np.asarray(d, dtype=float))


def test_spec_validation():
    with pytest.raises(InputError):
        ShrinkageSpec("pcr", 1.0, tau=1.0)
    with pytest.raises(InputError):
        ShrinkageSpec("ridge", 1.0, K=2)
    with pytest.raises(InputError):
        ShrinkageSpec("lasso", 1.0, tau=1.0)
    with pytest.raises(InputError):
        ShrinkageSpec("ridge", -1.0, tau=1.0)
    with pytest.raises(InputError):
        ShrinkageSpec("gprior", 1.0, tau=0.0)
    assert ShrinkageSpec("ridge", 1.0, tau=1.0).with_tau(2.0).tau == 2.0


def test_profiles_by_hand():
    assert np.allclose(lambda_profile(ShrinkageSpec("gprior", 1.0, tau=1.0), [3.0, 2.0, 1.0]), 0.5)
    assert np.allclose(lambda_profile(ShrinkageSpec("pcr", 1.0, K=3), [3.0, 2.0, 1.0]), 1.0)
    assert np.allclose(lambda_profile(ShrinkageSpec("pcr", 1.0, K=1), [3.0, 2.0, 1.0]), [1.0, 0.0, 0.0])
    assert np.allclose(lambda_profile(ShrinkageSpec("ridge", 1.0, tau=1.0), [2.0, 1.0]), [0.8, 0.5])
    with pytest.raises(InputError):
        lambda_profile(ShrinkageSpec("pcr", 1.0, K=4), [3.0, 2.0, 1.0])


def test_ridge_limits():
    c = coeffs([1.0, -2.0, 3.0], [3.0, 2.0, 1.0])
    big = global_posterior_mean(c, ShrinkageSpec("ridge", 1.0, tau=1e8)).alpha_tilde
    small = global_posterior_mean(c, ShrinkageSpec("ridge", 1.0, tau=1e-8)).alpha_tilde
    assert np.allclose(big, c.alpha_hat, rtol=1e-12)
    assert np.allclose(small, 0.0, atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_ridge_equals_direct_solve(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((20, 50))
    y = rng.standard_normal(20)
    tau = 0.3
    dec = decompose(X)
    fit = global_posterior_mean(ols_ortho(dec, y), ShrinkageSpec("ridge", 1.0, tau=tau), dec)
    direct = np.linalg.solve(X.T @ X + np.eye(50) / tau**2, X.T @ y)
    assert np.linalg.norm(fit.beta_tilde - direct) <= 1e-8 * np.linalg.norm(direct)
    assert np.allclose(fit.beta_tilde, dec.W @ fit.alpha_tilde, atol=1e-8)


def test_gprior_equals_direct_solve():
    rng = np.random.default_rng(9)
    X = rng.standard_normal((30, 6))
    y = rng.standard_normal(30)
    tau = 0.7
    dec = decompose(X)
    fit = global_posterior_mean(ols_ortho(dec, y), ShrinkageSpec("gprior", 1.0, tau=tau), dec)
    ols = np.linalg.lstsq(X, y, rcond=None)[0]
    assert np.allclose(fit.beta_tilde, tau**2 / (1 + tau**2) * ols, rtol=1e-10)


def test_global_rejects_horseshoe():
    with pytest.raises(InputError):
        global_posterior_mean(coeffs([1.0]), ShrinkageSpec("horseshoe", 1.0, tau=1.0))
    with pytest.raises(InputError):
        horseshoe_posterior_mean(coeffs([1.0]), ShrinkageSpec("ridge", 1.0, tau=1.0))


@given(
    a=st.lists(st.floats(-50, 50), min_size=2, max_size=8),
    tau=st.floats(1e-3, 1e3),
)
def test_global_ordering_properties(a, tau):
    d = np.sort(np.linspace(0.2, 5.0, len(a)))[::-1]
    c = coeffs(a, d)
    f = lambda_profile(ShrinkageSpec("ridge", 1.0, tau=tau), d)
    assert np.all((f >= 0) & (f <= 1))
    assert np.all(np.diff(f) <= 1e-15)  # larger d, less shrinkage
    g = lambda_profile(ShrinkageSpec("gprior", 1.0, tau=tau), d)
    assert np.ptp(g) == 0.0
    alpha = global_posterior_mean(c, ShrinkageSpec("ridge", 1.0, tau=tau)).alpha_tilde
    assert np.all(np.abs(alpha) <= np.abs(c.alpha_hat) + 1e-15)


def test_horseshoe_fixture():
    fit = horseshoe_posterior_mean(coeffs([math.sqrt(2.0)]), ShrinkageSpec("horseshoe", 1.0, tau=1.0))
    assert fit.alpha_tilde[0] == pytest.approx(math.sqrt(2.0) * (1 - 0.614 / 1.076), abs=2e-3)
    assert fit.alpha_tilde[0] == pytest.approx(0.60702, abs=1e-5)


def test_horseshoe_zero_and_large():
    spec = ShrinkageSpec("horseshoe", 1.0, tau=1.0)
    assert horseshoe_posterior_mean(coeffs([0.0]), spec).alpha_tilde[0] == 0.0
    a = math.sqrt(2e4)  # s = 1e4
    assert horseshoe_posterior_mean(coeffs([a]), spec).alpha_tilde[0] / a >= 0.999


def test_horseshoe_ratio_depends_on_s_theta_only():
    # component 2 has d = 2, alpha_hat halved and tau halved: same (s, theta)
    c = OrthoCoefficients(np.array([3.0, 1.5]), np.array([1.0, 2.0]))
    ratios = []
    for tau, i in [(0.8, 0), (0.4, 1)]:
        r = horseshoe_posterior_mean(c, ShrinkageSpec("horseshoe", 1.0, tau=tau)).alpha_tilde / c.alpha_hat
        ratios.append(r[i])
    assert ratios[0] == pytest.approx(ratios[1], rel=1e-12)


def test_horseshoe_ratio_monotone_in_s():
    s = np.array([0.0, 1.0, 10.0, 100.0, 1e4])
    a = np.sqrt(2 * s)
    a[0] = 1e-12
    fit = horseshoe_posterior_mean(coeffs(a), ShrinkageSpec("horseshoe", 1.0, tau=1.0))
    assert np.all(np.diff(fit.alpha_tilde / a) >= 0)


@given(
    a=st.lists(st.floats(-1e3, 1e3).filter(lambda v: abs(v) > 1e-6), min_size=1, max_size=6),
    tau=st.floats(1e-3, 1e2),
    sigma=st.floats(0.1, 10.0),
)
def test_horseshoe_sign_and_shrinkage(a, tau, sigma):
    c = coeffs(a)
    alpha = horseshoe_posterior_mean(c, ShrinkageSpec("horseshoe", sigma, tau=tau)).alpha_tilde
    assert np.all(np.sign(alpha) == np.sign(c.alpha_hat))
    assert np.all(np.abs(alpha) < np.abs(c.alpha_hat))


def test_fit_orthogonal_dispatch():
    c = coeffs([1.0, 2.0])
    assert np.allclose(fit_orthogonal(c, ShrinkageSpec("pcr", 1.0, K=1)).alpha_tilde, [1.0, 0.0])
    assert "E_Z" in fit_orthogonal(c, ShrinkageSpec("horseshoe", 1.0, tau=1.0)).meta


def test_optimal_ridge():
    assert np.allclose(optimal_ridge_orthogonal(coeffs([2.0] * 4), 1.0), 1.5)
    assert np.allclose(optimal_ridge_orthogonal(coeffs([1.0] * 4), 1.0), 0.0)
    big = coeffs([1e6, -1e6])
    assert np.allclose(optimal_ridge_orthogonal(big, 1.0), big.alpha_hat, rtol=1e-10)
    neg = optimal_ridge_orthogonal(coeffs([0.5, 0.5]), 1.0)
    assert np.all(neg < 0)  # no positive part
    with pytest.raises(DegenerateDesignError):
        optimal_ridge_orthogonal(coeffs([0.0, 0.0]), 1.0)


# --- lasso ---------------------------------------------------------------------


def test_lasso_soft_threshold():
    beta, df = lasso_fit(RegressionData(np.eye(2), np.array([3.0, 0.5])), 1.0)
    assert np.array_equal(beta, [2.0, 0.0]) and df == 1


def test_lasso_zero_penalty_identity():
    y = np.array([1.0, 0.0, -2.0])
    beta, df = lasso_fit(RegressionData(np.eye(3), y), 0.0)
    assert np.allclose(beta, y) and df == 2


def test_lasso_above_lambda_max():
    rng = np.random.default_rng(0)
    data = RegressionData(rng.standard_normal((20, 8)), rng.standard_normal(20))
    beta, df = lasso_fit(data, lambda_max(data))
    assert df == 0 and not beta.any()


def kkt_ok(data, beta, lam, tol=1e-5):
    g = data.X.T @ (data.y - data.X @ beta)
    act = beta != 0
    return np.all(np.abs(g[~act]) <= lam + tol) and np.allclose(g[act], lam * np.sign(beta[act]), atol=tol)


@given(seed=st.integers(0, 2**31 - 1), frac=st.floats(0.01, 0.9))
def test_lasso_kkt(seed, frac):
    rng = np.random.default_rng(seed)
    data = RegressionData(rng.standard_normal((15, 25)), rng.standard_normal(15))
    lam = frac * lambda_max(data)
    beta, df = lasso_fit(data, lam)
    assert df == np.count_nonzero(beta)
    assert kkt_ok(data, beta, lam)


def test_lasso_collinear_converges():
    rng = np.random.default_rng(3)
    f = rng.standard_normal((60, 2))
    X = f @ rng.standard_normal((2, 40)) + 0.05 * rng.standard_normal((60, 40))
    y = X[:, 0] - X[:, 5] + rng.standard_normal(60)
    data = RegressionData(X, y)
    lam = 0.01 * lambda_max(data)
    beta, _ = lasso_fit(data, lam)
    assert kkt_ok(data, beta, lam, tol=1e-6 * lambda_max(data))


def test_lasso_budget_error_carries_iterate():
    rng = np.random.default_rng(1)
    f = rng.standard_normal((40, 1))
    X = f + 1e-3 * rng.standard_normal((40, 30))
    data = RegressionData(X, rng.standard_normal(40))
    with pytest.raises(IterationBudgetError) as ei:
        lasso_fit(data, 1e-6 * lambda_max(data), max_iter=2)
    assert ei.value.last_iterate.shape == (30,)


def test_lasso_rejects_bad_penalty():
    data = RegressionData(np.eye(2), np.ones(2))
    for lam in (-1.0, math.nan, math.inf):
        with pytest.raises(InputError):
            lasso_fit(data, lam)


def test_lasso_path_warm_start_matches_cold():
    rng = np.random.default_rng(5)
    data = RegressionData(rng.standard_normal((30, 10)), rng.standard_normal(30))
    lams = lambda_max(data) * np.array([0.5, 0.05, 0.2])
    out_l, betas, dfs = lasso_path(data, lams)
    assert np.all(np.diff(out_l) < 0)
    for lam, b in zip(out_l, betas):
        assert np.allclose(b, lasso_fit(data, lam)[0], atol=1e-6)
