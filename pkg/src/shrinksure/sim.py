"""Synthetic designs, coefficient regimes and the SURE-versus-test-SSE experiment.

Every random draw comes from its own stream, seeded by ``(seed, stream id[, index])``
so that adding a method or a test set never perturbs the other draws.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core_orthogonal import RegressionData, decompose, ols_ortho, predict, reconstruct_beta
from .errors import InputError
from .estimators import ShrinkageSpec, fit_orthogonal
from .risk import SearchControl, minimize_sure_K, minimize_sure_lasso, minimize_sure_tau

__all__ = [
    "STREAMS",
    "stream",
    "DesignSpec",
    "AlphaScheme",
    "SimConfig",
    "MethodResult",
    "ExperimentResult",
    "gen_factor_design",
    "gen_design",
    "gen_alpha",
    "make_design",
    "run_experiment",
    "component_sure_profile",
    "settings_from_config",
]

STREAMS = {"design": 1, "alpha": 2, "train_noise": 3, "test_noise": 4, "test_design": 5, "splits": 6}
METHODS = ("ridge", "gprior", "pcr", "horseshoe", "lasso", "ols")


def stream(seed: int, name: str, *index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), STREAMS[name], *map(int, index)])))


@dataclass(frozen=True)
class DesignSpec:
    kind: str = "factor"  # factor | gaussian | orthogonal
    k: int = 8
    noise: float = 0.1  # factor noise level, see noise_scale
    noise_scale: str = "sd"  # how ``noise`` is read: sd or variance

    def __post_init__(self):
        if self.kind not in ("factor", "gaussian", "orthogonal"):
            raise InputError(f"unknown design kind {self.kind!r}")
        if self.noise_scale not in ("variance", "sd"):
            raise InputError("noise_scale must be 'variance' or 'sd'")
        if self.kind == "factor" and (self.k < 1 or not self.noise > 0):
            raise InputError("factor design needs k >= 1 and noise > 0")

    @property
    def noise_sd(self) -> float:
        return math.sqrt(self.noise) if self.noise_scale == "variance" else float(self.noise)


@dataclass(frozen=True)
class AlphaScheme:
    kind: str = "sparse_robust"  # sparse_robust | null | dense
    n_signals: int = 5
    signal_mean: float = 10.0
    signal_sd: float = math.sqrt(0.5)
    noise_sd: float = math.sqrt(0.5)
    fixed: bool = False  # signals exactly signal_mean, noise +/- fixed_noise
    fixed_noise: float = 0.5
    value: float = 2.0  # dense only

    def __post_init__(self):
        if self.kind not in ("sparse_robust", "null", "dense"):
            raise InputError(f"unknown alpha scheme {self.kind!r}")
        if self.n_signals < 0 or self.signal_sd < 0 or self.noise_sd < 0:
            raise InputError("alpha scheme scales must be nonnegative")


@dataclass(frozen=True)
class SimConfig:
    n: int = 100
    p: int = 500
    design: DesignSpec = field(default_factory=DesignSpec)
    alpha_scheme: AlphaScheme = field(default_factory=AlphaScheme)
    sigma: float = 1.0
    n_test_sets: int = 200
    test_size: int | None = None  # only used with redraw_x; defaults to n
    seed: int = 0
    methods: tuple = ("ridge", "pcr", "horseshoe")
    redraw_x: bool = False

    def __post_init__(self):
        if self.n < 1 or self.p < 1 or self.n_test_sets < 1:
            raise InputError("need n, p, n_test_sets >= 1")
        if not self.sigma > 0:
            raise InputError("sigma must be > 0")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise InputError(f"unknown methods {bad}; expected a subset of {METHODS}")
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.test_size is not None and self.test_size < 1:
            raise InputError("test_size must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["methods"] = list(self.methods)
        return d


@dataclass
class MethodResult:
    sure_total: float
    mean_sse: float
    sd_sse: float
    sse: np.ndarray
    per_component: np.ndarray | None = None
    tau_star: float | None = None
    K_star: int | None = None
    lambda_star: float | None = None
    alpha_tilde: np.ndarray | None = None
    beta_tilde: np.ndarray | None = None


@dataclass
class ExperimentResult:
    config: SimConfig
    per_method: dict
    alpha_true: np.ndarray
    alpha_hat: np.ndarray
    d: np.ndarray

    @property
    def per_component(self) -> dict:
        return {k: v.per_component for k, v in self.per_method.items() if v.per_component is not None}


# ---------------------------------------------------------------------------
# generators


def gen_factor_design(n: int, p: int, k: int, noise_sd: float, seed: int) -> np.ndarray:
    """Rows ``B F_i + xi_i`` with B the all-ones p x k loading matrix."""
    if k < 1:
        raise InputError("k must be >= 1")
    rng = stream(seed, "design")
    F = rng.standard_normal((n, k))
    xi = rng.standard_normal((n, p)) * noise_sd
    return F @ np.ones((k, p)) + xi


def gen_design(kind: str, n: int, p: int, seed: int) -> np.ndarray:
    """``gaussian``: iid N(0,1). ``orthogonal``: n x p with orthonormal rows (all d_i = 1)."""
    rng = stream(seed, "design")
    if kind == "gaussian":
        return rng.standard_normal((n, p))
    if kind == "orthogonal":
        if p < n:
            raise InputError(f"orthogonal design needs p >= n, got n={n}, p={p}")
        Q, R = np.linalg.qr(rng.standard_normal((p, n)))
        Q = Q * np.sign(np.diag(R))
        return np.ascontiguousarray(Q.T)
    raise InputError(f"unknown design kind {kind!r}")


def make_design(spec: DesignSpec, n: int, p: int, seed: int) -> np.ndarray:
    if spec.kind == "factor":
        return gen_factor_design(n, p, spec.k, spec.noise_sd, seed)
    return gen_design(spec.kind, n, p, seed)


def gen_alpha(scheme: AlphaScheme, m: int, seed: int, positions=None) -> np.ndarray:
    """True orthogonalized coefficients of length m."""
    if scheme.kind == "null":
        return np.zeros(m)
    if scheme.kind == "dense":
        return np.full(m, float(scheme.value))
    if scheme.n_signals > m:
        raise InputError(f"n_signals={scheme.n_signals} exceeds m={m}")
    rng = stream(seed, "alpha")
    if positions is None:
        positions = rng.choice(m, size=scheme.n_signals, replace=False)
    positions = np.sort(np.asarray(positions, dtype=int))
    if scheme.fixed:
        alpha = scheme.fixed_noise * rng.choice([-1.0, 1.0], size=m)
        alpha[positions] = scheme.signal_mean
    else:
        alpha = rng.normal(0.0, scheme.noise_sd, size=m)
        alpha[positions] = rng.normal(scheme.signal_mean, scheme.signal_sd, size=positions.size)
    return alpha


# ---------------------------------------------------------------------------
# experiment


def _fit_method(method, data, decomp, coeffs, sigma, search):
    """Tune by SURE and return (MethodResult without SSE, beta)."""
    if method == "lasso":
        lam, beta, _df, sure = minimize_sure_lasso(data, sigma)
        return MethodResult(sure, math.nan, math.nan, np.empty(0), lambda_star=lam, beta_tilde=beta), beta
    if method == "ols":
        spec = ShrinkageSpec("pcr", sigma, K=coeffs.m)
        from .risk import sure_global

        br = sure_global(coeffs, spec)
        fit = fit_orthogonal(coeffs, spec, decomp)
        return MethodResult(br.total, math.nan, math.nan, np.empty(0), per_component=br.per_component,
                            K_star=coeffs.m, alpha_tilde=fit.alpha_tilde, beta_tilde=fit.beta_tilde), fit.beta_tilde
    if method == "pcr":
        K, br = minimize_sure_K(coeffs, sigma)
        spec = ShrinkageSpec("pcr", sigma, K=K)
        tau = None
    else:
        tau, br = minimize_sure_tau(coeffs, method, sigma, search)
        spec = ShrinkageSpec(method, sigma, tau=tau)
        K = None
    fit = fit_orthogonal(coeffs, spec, decomp)
    return MethodResult(br.total, math.nan, math.nan, np.empty(0), per_component=br.per_component, tau_star=tau,
                        K_star=K, alpha_tilde=fit.alpha_tilde, beta_tilde=fit.beta_tilde), fit.beta_tilde


def run_experiment(config: SimConfig, search: SearchControl | None = None,
                   positions=None) -> ExperimentResult:
    """One training set, SURE tuning per method, then ``n_test_sets`` test SSEs.

    Test responses reuse the training design with fresh noise unless
    ``redraw_x`` is set, in which case each test set also gets a new design
    from the same law and the truth ``beta_0 = W alpha_0``.
    """
    c = config
    X = make_design(c.design, c.n, c.p, c.seed)
    decomp = decompose(X)
    alpha0 = gen_alpha(c.alpha_scheme, decomp.m, c.seed, positions)
    mean_train = decomp.Z @ alpha0
    y = mean_train + c.sigma * stream(c.seed, "train_noise").standard_normal(c.n)
    data = RegressionData(X, y)
    coeffs = ols_ortho(decomp, y)

    results = {}
    betas = {}
    for method in c.methods:
        results[method], betas[method] = _fit_method(method, data, decomp, coeffs, c.sigma, search)

    beta0 = reconstruct_beta(alpha0, decomp)
    nt = c.test_size or c.n
    sse = {m: np.empty(c.n_test_sets) for m in c.methods}
    for j in range(c.n_test_sets):
        if c.redraw_x:
            Xt = _redraw_design(c, nt, j)
            mu = Xt @ beta0
        else:
            Xt, mu = X, mean_train
        yt = mu + c.sigma * stream(c.seed, "test_noise", j).standard_normal(Xt.shape[0])
        for m in c.methods:
            r = yt - predict(Xt, betas[m])
            sse[m][j] = r @ r
    for m in c.methods:
        res = results[m]
        res.sse = sse[m]
        res.mean_sse = float(np.mean(sse[m]))
        res.sd_sse = float(np.std(sse[m], ddof=1)) if c.n_test_sets > 1 else 0.0
    return ExperimentResult(config=c, per_method=results, alpha_true=alpha0, alpha_hat=coeffs.alpha_hat, d=decomp.d)


def _redraw_design(c: SimConfig, nt: int, j: int) -> np.ndarray:
    rng = stream(c.seed, "test_design", j)
    if c.design.kind == "factor":
        F = rng.standard_normal((nt, c.design.k))
        return F @ np.ones((c.design.k, c.p)) + c.design.noise_sd * rng.standard_normal((nt, c.p))
    if c.design.kind == "gaussian":
        return rng.standard_normal((nt, c.p))
    raise InputError("redraw_x is not defined for the orthogonal design")


PROFILE_DTYPE = np.dtype([("i", np.int64), ("d", float), ("alpha_hat_d", float), ("sure", float)])


def component_sure_profile(result: ExperimentResult, family: str) -> np.ndarray:
    """Rows (i, d_i, alpha_hat_i d_i, SURE_i), 1-based i, in decreasing d order."""
    res = result.per_method.get(family)
    if res is None:
        raise InputError(f"family {family!r} not in result; have {sorted(result.per_method)}")
    if res.per_component is None:
        raise InputError(f"{family} has no component-wise SURE")
    order = np.argsort(-result.d, kind="stable")
    out = np.empty(result.d.size, dtype=PROFILE_DTYPE)
    out["i"] = order + 1
    out["d"] = result.d[order]
    out["alpha_hat_d"] = (result.alpha_hat * result.d)[order]
    out["sure"] = res.per_component[order]
    return out


# ---------------------------------------------------------------------------
# config files

_TOP_KEYS = {"n", "p", "design", "alpha_scheme", "sigma", "n_test_sets", "test_size", "seed", "methods", "redraw_x"}
_DESIGN_KEYS = {"kind", "k", "noise", "noise_scale"}
_ALPHA_KEYS = {"kind", "n_signals", "signal_mean", "signal_sd", "noise_sd", "fixed", "fixed_noise", "value",
               "positions"}


def settings_from_config(cfg: dict, seed: int | None = None) -> list[tuple[SimConfig, object]]:
    """Expand a config mapping into ``(SimConfig, positions)`` per setting.

    Keys mirror the SimConfig fields; ``p`` may be a list, giving one setting
    per value. ``alpha_scheme.positions`` optionally fixes the signal indices
    (0-based). ``seed`` overrides the file's seed when given.
    """
    bad = sorted(set(cfg) - _TOP_KEYS)
    bad += [f"design.{k}" for k in sorted(set(cfg.get("design") or {}) - _DESIGN_KEYS)]
    bad += [f"alpha_scheme.{k}" for k in sorted(set(cfg.get("alpha_scheme") or {}) - _ALPHA_KEYS)]
    if bad:
        raise InputError(f"unknown config keys: {', '.join(bad)}")
    try:
        design = DesignSpec(**(cfg.get("design") or {}))
        a = dict(cfg.get("alpha_scheme") or {})
        positions = a.pop("positions", None)
        scheme = AlphaScheme(**a)
        ps = cfg.get("p", 500)
        ps = list(ps) if isinstance(ps, (list, tuple)) else [ps]
        out = []
        for p in ps:
            out.append((SimConfig(
                n=int(cfg.get("n", 100)),
                p=int(p),
                design=design,
                alpha_scheme=scheme,
                sigma=float(cfg.get("sigma", 1.0)),
                n_test_sets=int(cfg.get("n_test_sets", 200)),
                test_size=cfg.get("test_size"),
                seed=int(seed if seed is not None else cfg.get("seed", 0)),
                methods=tuple(cfg.get("methods", ("ridge", "pcr", "horseshoe"))),
                redraw_x=bool(cfg.get("redraw_x", False)),
            ), positions))
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid config value: {exc}") from None
    return out
