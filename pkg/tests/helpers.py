import io

import numpy as np

from shrinksure.cli import main
from shrinksure.core_orthogonal import decompose
from shrinksure.sim import AlphaScheme, DesignSpec, gen_alpha, make_design, stream


def synthetic_csv(path, n=80, p=120, design="gaussian", scheme="sparse_robust", sigma=1.0, seed=0):
    """Same recipe as scripts/make_synthetic_csv.py."""
    X = make_design(DesignSpec(kind=design), n, p, seed)
    dec = decompose(X)
    alpha = gen_alpha(AlphaScheme(kind=scheme), dec.m, seed)
    y = X @ (dec.W @ alpha) + sigma * stream(seed, "train_noise").standard_normal(n)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join([f"x{j + 1}" for j in range(p)] + ["y"]) + "\n")
        for i in range(n):
            fh.write(",".join(repr(float(v)) for v in (*X[i], y[i])) + "\n")
    return str(path)


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()
