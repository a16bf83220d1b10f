"""Command-line front end.

Exit codes: 0 success, 2 file I/O failure, 3 parse or validation failure,
4 numerical failure. Output files contain no timestamps, so identical inputs,
flags and seed give byte-identical outputs.
"""
from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import _io
from .core_orthogonal import RegressionData, decompose, ols_ortho
from .errors import (
    BudgetExceededError,
    DegenerateDesignError,
    InputError,
    IntegrationError,
    IterationBudgetError,
    SearchFailure,
)
from .risk import RiskEstimator, Scenario, mc_risk
from .sim import component_sure_profile, run_experiment, settings_from_config
from .workflow import DATA_METHODS, SplitPlan, Standardizer, evaluate_splits, fit_cv, fit_fixed, fit_sure

EXIT_OK, EXIT_IO, EXIT_PARSE, EXIT_NUMERIC = 0, 2, 3, 4
NUMERICAL_ERRORS = (IntegrationError, SearchFailure, IterationBudgetError, BudgetExceededError,
                    DegenerateDesignError, FloatingPointError, np.linalg.LinAlgError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which here means I/O; route to 3
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser, data: bool = True):
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--threads", type=int, default=None, help="worker threads for numerical kernels")
    p.add_argument("--output", "-o", default=None, help="output path (default stdout)")
    p.add_argument("--sigma", type=float, default=None, help="noise standard deviation for SURE")
    if data:
        p.add_argument("data", help="CSV file with a header row")
        p.add_argument("--response", required=True, help="name of the response column")
        p.add_argument("--standardize", choices=("none", "response", "both"), default="none",
                       help="center/scale the response, or response and predictors (default none)")
        p.add_argument("--missing", choices=("drop-cols", "drop-rows", "error"), default="drop-cols",
                       help="policy for missing cells (default drop-cols)")


def _param_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--tau", type=float, help="fixed global scale (ridge, gprior, horseshoe)")
    g.add_argument("--K", type=int, help="fixed number of components (pcr)")
    g.add_argument("--lambda", dest="lam", type=float, help="fixed penalty (lasso)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="shrinksure", description="Shrinkage regression with SURE-based tuning.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("decompose", help="singular values and rotated OLS coefficients")
    _common(p)
    p.add_argument("--rank-tol", type=float, default=None)

    p = sub.add_parser("fit", help="fit one method with SURE or CV tuning, or at a fixed parameter")
    _common(p)
    p.add_argument("--method", choices=DATA_METHODS, required=True)
    p.add_argument("--tuning", choices=("sure", "cv"), default="sure")
    p.add_argument("--folds", type=int, default=5)
    _param_flags(p)

    p = sub.add_parser("sure", help="component-wise SURE at a fixed parameter")
    _common(p)
    p.add_argument("--method", choices=DATA_METHODS, required=True)
    _param_flags(p)

    p = sub.add_parser("tune", help="tuning curve (SURE or CV) and the selected parameter")
    _common(p)
    p.add_argument("--method", choices=DATA_METHODS, required=True)
    p.add_argument("--tuning", choices=("sure", "cv"), default="sure")
    p.add_argument("--folds", type=int, default=5)

    p = sub.add_parser("evaluate", help="test MSE over random train/test splits")
    _common(p)
    p.add_argument("--methods", default="ridge,pcr,lasso,horseshoe",
                   help="comma-separated list; repeats allowed")
    p.add_argument("--tuning", choices=("sure", "cv"), default="cv")
    p.add_argument("--train-fraction", type=float, default=0.75)
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--folds", type=int, default=5)

    p = sub.add_parser("simulate", help="run simulation settings from a YAML config")
    _common(p, data=False)
    p.set_defaults(seed=None)  # None keeps the seed written in the config
    p.add_argument("config", help="YAML config file")

    p = sub.add_parser("risk-mc", help="Monte Carlo component-wise risk")
    _common(p, data=False)
    p.add_argument("--scenario", choices=("null-horseshoe", "ols", "optimal-ridge", "custom"), default="null-horseshoe")
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--estimator", choices=("ols", "ridge", "gprior", "pcr", "horseshoe", "optimal_ridge"),
                   default=None, help="custom scenario only")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--alpha-true", default="0", help="custom: comma-separated true coefficients")
    p.add_argument("--d", default="1", help="custom: comma-separated singular values (or one value)")
    p.add_argument("--m", type=int, default=500, help="optimal-ridge: number of components")
    p.add_argument("--c", type=float, default=1.0, help="optimal-ridge: |alpha|^2 / m")
    p.add_argument("--mode", choices=("sure", "loss"), default="sure")
    return ap


# ---------------------------------------------------------------------------
# helpers


def _load(args):
    ds = _io.read_dataset(args.data, args.response, args.missing)
    st = Standardizer.fit(ds.X, ds.y, args.standardize)
    data = RegressionData(st.X(ds.X), st.y(ds.y))
    return ds, st, data


def _fixed_param(args):
    for name in ("tau", "K", "lam"):
        v = getattr(args, name, None)
        if v is not None:
            return v
    return None


def _check_param_for(method, args):
    want = {"pcr": "K", "lasso": "lam"}.get(method, "tau")
    for name in ("tau", "K", "lam"):
        if name != want and getattr(args, name, None) is not None:
            flag = "--lambda" if name == "lam" else f"--{name}"
            raise InputError(f"{flag} does not apply to method {method}")


def _need_sigma(args):
    if args.sigma is None:
        raise InputError("SURE needs --sigma (the noise standard deviation); use --tuning cv to tune without it")
    if not (math.isfinite(args.sigma) and args.sigma > 0):
        raise InputError("--sigma must be finite and > 0")


def _dataset_meta(ds, st):
    return {
        "response": ds.response,
        "n": int(ds.X.shape[0]),
        "p": int(ds.X.shape[1]),
        "dropped_rows": ds.dropped_rows,
        "dropped_columns": ds.dropped_cols or [],
        "standardize": st.mode,
        "y_mean": st.y_mean,
        "y_scale": st.y_scale,
    }


# ---------------------------------------------------------------------------
# commands


def cmd_decompose(args, out):
    ds, st, data = _load(args)
    dec = decompose(data, args.rank_tol)
    co = ols_ortho(dec, data.y)
    rows = [(i + 1, dec.d[i], co.alpha_hat[i], co.alpha_hat[i] * dec.d[i]) for i in range(dec.m)]
    _io.write_text(args.output, _io.table_csv(["component", "d", "alpha_hat", "alpha_hat_d"], rows), out)


def _run_fit(args, data):
    fixed = _fixed_param(args)
    _check_param_for(args.method, args)
    if fixed is not None:
        if args.method == "horseshoe":
            _need_sigma(args)
        return fit_fixed(data, args.method, fixed, args.sigma), "fixed"
    if args.tuning == "sure":
        _need_sigma(args)
        return fit_sure(data, args.method, args.sigma), "sure"
    return fit_cv(data, args.method, args.folds, args.seed, args.sigma), "cv"


def cmd_fit(args, out):
    ds, st, data = _load(args)
    fit, how = _run_fit(args, data)
    coef = st.y_scale * fit.beta / st.x_scale
    intercept = st.y_mean - float(st.x_mean @ coef)
    fitted = st.y_inverse(data.X @ fit.beta)
    report = {
        "method": fit.method,
        "tuning": how,
        fit.param_name: int(fit.param) if fit.param_name == "K" else fit.param,
        "sigma": fit.sigma,
        "dataset": _dataset_meta(ds, st),
        "beta": dict(zip(ds.features, fit.beta)),
        "coef_original_units": dict(zip(ds.features, coef)),
        "intercept_original_units": intercept,
        "fitted_original_units": fitted,
        "sure_total": fit.sure_total,
    }
    if fit.alpha_tilde is not None:
        report["alpha_tilde"] = fit.alpha_tilde
        report["alpha_hat"] = fit.alpha_hat
        report["d"] = fit.d
    if fit.sure_per_component is not None:
        report["sure_per_component"] = fit.sure_per_component
    if fit.method == "pcr":
        K = int(fit.param)
        report["included"] = [i < K for i in range(fit.d.size)]
    if how == "cv":
        report["cv_curve"] = [{"param": c, "cv_mse": e} for c, e in fit.curve]
    _io.write_text(args.output, _io.dumps_json(report), out)


def cmd_sure(args, out):
    _need_sigma(args)
    ds, st, data = _load(args)
    _check_param_for(args.method, args)
    fixed = _fixed_param(args)
    if fixed is None:
        raise InputError("sure needs a fixed --tau, --K or --lambda")
    fit = fit_fixed(data, args.method, fixed, args.sigma)
    header = ["component", "d", "alpha_hat_d", "sure"]
    rows = []
    if fit.sure_per_component is not None:
        for i in range(fit.d.size):
            rows.append((i + 1, fit.d[i], fit.alpha_hat[i] * fit.d[i], fit.sure_per_component[i]))
    rows.append(("total", None, None, fit.sure_total))
    _io.write_text(args.output, _io.table_csv(header, rows), out)


def cmd_tune(args, out):
    ds, st, data = _load(args)
    if args.tuning == "sure":
        _need_sigma(args)
        if args.method == "lasso":
            from .risk import sure_lasso
            from .estimators import lambda_max, lasso_path

            lams = lambda_max(data) * np.logspace(0.0, -3.0, 100)
            lams, betas, dfs = lasso_path(data, lams, stop_on_budget=True)
            curve = [(l, sure_lasso(data, b, df, args.sigma)) for l, b, df in zip(lams, betas, dfs)]
            best = min(range(len(curve)), key=lambda i: (curve[i][1], i))
            chosen = curve[best][0]
        else:
            fit = fit_sure(data, args.method, args.sigma, keep_curve=True)
            curve, chosen = fit.curve, fit.param
            if args.method not in ("pcr",):
                curve = curve + [(chosen, fit.sure_total)]
        objective = "sure"
    else:
        fit = fit_cv(data, args.method, args.folds, args.seed, args.sigma)
        curve, chosen, objective = fit.curve, fit.param, "cv_mse"
    pname = {"pcr": "K", "lasso": "lambda"}.get(args.method, "tau")
    rows = [(int(c) if pname == "K" else c, v, c == chosen) for c, v in curve]
    # one selected row only: the refined optimum is appended last for tau searches
    seen = False
    fixed_rows = []
    for c, v, sel in reversed(rows):
        fixed_rows.append((c, v, sel and not seen))
        seen = seen or sel
    rows = list(reversed(fixed_rows))
    _io.write_text(args.output, _io.table_csv([pname, objective, "selected"], rows), out)


def cmd_evaluate(args, out):
    ds = _io.read_dataset(args.data, args.response, args.missing)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in DATA_METHODS]
    if not methods or bad:
        raise InputError(f"unknown methods {bad}; expected from {DATA_METHODS}")
    if args.tuning == "sure":
        _need_sigma(args)
    plan = SplitPlan(args.train_fraction, args.repeats, args.folds, args.seed)
    mse = evaluate_splits(ds.X, ds.y, methods, plan, args.tuning, args.sigma, args.standardize)
    labels = []
    for m in methods:
        k = sum(1 for x in labels if x == m or x.startswith(m + "#"))
        labels.append(m if k == 0 else f"{m}#{k + 1}")
    best = mse.min(axis=1, keepdims=True)
    wins = (mse == best).sum(axis=0)
    split_rows = [(r + 1, *mse[r]) for r in range(mse.shape[0])]
    summary = [(lab, float(mse[:, j].mean()), int(wins[j])) for j, lab in enumerate(labels)]
    files = {
        "mse_by_split.csv": _io.table_csv(["split", *labels], split_rows),
        "summary.csv": _io.table_csv(["method", "mean_mse", "wins"], summary),
        "summary.txt": _io.table_text(["method", "mean_mse", "wins"], summary),
    }
    _write_dir(args.output, files, out)


def _write_dir(path, files, out):
    if path is None or path == "-":
        for name, text in files.items():
            if name.endswith(".txt"):
                out.write(text)
        return
    os.makedirs(path, exist_ok=True)
    for name, text in files.items():
        _io.write_text(os.path.join(path, name), text, out)


def cmd_simulate(args, out):
    cfg = _io.load_config(args.config)
    settings = settings_from_config(cfg, args.seed)
    res_rows, prof_rows, sse_rows = [], [], []
    for k, (sc, positions) in enumerate(settings, start=1):
        r = run_experiment(sc, positions=positions)
        for m in sc.methods:
            v = r.per_method[m]
            res_rows.append((k, sc.n, sc.p, m, v.sure_total, v.mean_sse, v.sd_sse, v.tau_star, v.K_star,
                             v.lambda_star))
            for j, s in enumerate(v.sse):
                sse_rows.append((k, m, j + 1, s))
            if v.per_component is not None:
                for row in component_sure_profile(r, m):
                    prof_rows.append((k, int(row["i"]), row["d"], row["alpha_hat_d"], row["sure"], m))
    head = ["setting", "n", "p", "method", "sure", "mean_sse", "sd_sse", "tau", "K", "lambda"]
    files = {
        "results.csv": _io.table_csv(head, res_rows),
        "results.txt": _io.table_text(head, res_rows),
        "profiles.csv": _io.table_csv(["setting", "component", "d", "alpha_hat_d", "sure", "family"], prof_rows),
        "sse.csv": _io.table_csv(["setting", "method", "test_set", "sse"], sse_rows),
    }
    _write_dir(args.output, files, out)


def _floats(text, name):
    try:
        return np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError:
        raise InputError(f"--{name} must be comma-separated numbers, got {text!r}") from None


def cmd_risk_mc(args, out):
    if args.reps < 100:
        raise InputError("--reps must be >= 100")
    sigma = 1.0 if args.sigma is None else args.sigma
    sc = args.scenario
    lines = [("scenario", sc), ("reps", args.reps), ("seed", args.seed), ("sigma", sigma), ("mode", args.mode)]
    if sc == "null-horseshoe":
        scen, est = Scenario([0.0], [1.0], sigma), RiskEstimator("horseshoe", tau=1.0)
        mean, se = mc_risk(scen, est, args.reps, args.seed, mode=args.mode)
        bound = 1.75 * sigma**2
        ok = mean <= bound + 3.0 * se
        lines += [("estimator", "horseshoe"), ("tau", 1.0), ("risk", mean), ("se", se), ("bound", bound),
                  ("result", "PASS" if ok else "FAIL")]
    elif sc == "ols":
        scen = Scenario(_floats(args.alpha_true, "alpha-true"), _floats(args.d, "d"), sigma)
        mean, se = mc_risk(scen, RiskEstimator("ols"), args.reps, args.seed, mode=args.mode)
        target = 2.0 * sigma**2
        ok = abs(mean - target) <= 3.0 * se if se > 0 else mean == target
        lines += [("estimator", "ols"), ("risk", mean), ("se", se), ("target", target),
                  ("result", "PASS" if ok else "FAIL")]
    elif sc == "optimal-ridge":
        if args.m < 3 or not args.c >= 0:
            raise InputError("optimal-ridge needs --m >= 3 and --c >= 0")
        alpha = np.full(args.m, math.sqrt(args.c) * sigma)
        scen = Scenario(alpha, np.ones(args.m), sigma)
        est, _ = mc_risk(scen, RiskEstimator("optimal_ridge"), args.reps, args.seed, mode=args.mode,
                         loss="estimation")
        ols, _ = mc_risk(scen, RiskEstimator("ols"), args.reps, args.seed, mode=args.mode, loss="estimation")
        ratio = est / ols
        lines += [("estimator", "optimal_ridge"), ("m", args.m), ("c", args.c), ("estimation_risk", est),
                  ("ols_estimation_risk", ols), ("ratio", ratio), ("limit_c_over_c_plus_1", args.c / (args.c + 1.0))]
    else:
        if args.estimator is None:
            raise InputError("custom scenario needs --estimator")
        scen = Scenario(_floats(args.alpha_true, "alpha-true"), _floats(args.d, "d"), sigma)
        tau = args.tau if args.estimator in ("ridge", "gprior", "horseshoe") else None
        est = RiskEstimator(args.estimator, tau=tau, K=args.K)
        mean, se = mc_risk(scen, est, args.reps, args.seed, mode=args.mode)
        lines += [("estimator", args.estimator), ("risk", mean), ("se", se)]
    text = "".join(f"{k}: {_io.fmt(v)}\n" for k, v in lines)
    _io.write_text(args.output, text, out)


COMMANDS = {
    "decompose": cmd_decompose,
    "fit": cmd_fit,
    "sure": cmd_sure,
    "tune": cmd_tune,
    "evaluate": cmd_evaluate,
    "simulate": cmd_simulate,
    "risk-mc": cmd_risk_mc,
}


def _set_threads(n):
    if n is None:
        return
    if n < 1:
        raise InputError("--threads must be >= 1")
    import numba

    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        _set_threads(args.threads)
        COMMANDS[args.command](args, stdout)
    except UsageError as exc:
        stderr.write(f"{exc}\n")
        return EXIT_PARSE
    except (FileNotFoundError, PermissionError, IsADirectoryError, NotADirectoryError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_IO
    except NUMERICAL_ERRORS as exc:
        stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except (InputError, ValueError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except OSError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_IO
    return EXIT_OK


def main_exit() -> None:
    sys.exit(main())
