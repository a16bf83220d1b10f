"""Null and dense coefficient regimes across seeds, five methods including the lasso.

    python scripts/supplementary_regimes.py --seeds 0 1 2 3 4 5 6 7 8 9

Slow: the lasso path on the collinear factor design takes tens of seconds per run.
"""
import argparse
from pathlib import Path

from shrinksure._io import load_config
from shrinksure.sim import run_experiment, settings_from_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, nargs="+", default=list(range(10)))
    ap.add_argument("--regimes", nargs="+", default=["null", "dense"], choices=("null", "dense"))
    a = ap.parse_args()

    for regime in a.regimes:
        cfg = load_config(str(CONFIGS / f"{regime}.yaml"))
        best_counts = {}
        for seed in a.seeds:
            sc, _ = settings_from_config(cfg, seed=seed)[0]
            mse = {m: r.mean_sse for m, r in run_experiment(sc).per_method.items()}
            low = min(mse.values())
            winners = [m for m, v in mse.items() if v <= low * (1 + 1e-9)]
            for m in winners:
                best_counts[m] = best_counts.get(m, 0) + 1
            print(regime, seed, "  ".join(f"{m} {v:.2f}" for m, v in mse.items()), "| lowest:", ",".join(winners),
                  flush=True)
        print(f"{regime}: lowest mean SSE counts (ties credit all) {best_counts}")


if __name__ == "__main__":
    main()
