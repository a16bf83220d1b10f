"""Monte Carlo risk of one horseshoe component with no signal (alpha = 0, d = 1), across tau.

    python scripts/null_component_risk.py --reps 100000

At tau = 1 the mean SURE should sit well under 1.75 sigma^2; OLS gives 2 sigma^2.
"""
import argparse

from shrinksure.risk import RiskEstimator, Scenario, mc_risk


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--taus", type=float, nargs="+", default=[0.1, 0.3, 1.0, 3.0, 10.0])
    a = ap.parse_args()
    sc = Scenario([0.0], [1.0], 1.0)
    print(f"{'tau':>6}  {'SURE mean':>10}  {'SE':>7}  {'loss mean':>10}  {'SE':>7}")
    for tau in a.taus:
        est = RiskEstimator("horseshoe", tau=tau)
        m, se = mc_risk(sc, est, a.reps, a.seed)
        ml, sel = mc_risk(sc, est, a.reps, a.seed, mode="loss")
        print(f"{tau:6.2f}  {m:10.4f}  {se:7.4f}  {ml:10.4f}  {sel:7.4f}")


if __name__ == "__main__":
    main()
