"""Stopping threshold x* across discount factors for a normal answer-value step.

    python scripts/threshold_sweep.py --step-mean -0.4 --step-sd 1
"""

import argparse

from stopwait.threshold import StepDistribution, solve_value_function


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--step-mean", type=float, default=-0.4)
    ap.add_argument("--step-sd", type=float, default=1.0)
    ap.add_argument("--deltas", type=float, nargs="+", default=[0.5, 0.8, 0.9, 0.95, 0.99])
    ap.add_argument("--points", type=int, default=2001)
    args = ap.parse_args()

    step = StepDistribution.normal(args.step_mean, args.step_sd)
    print("delta,x_star,iterations,grid_hi")
    for delta in args.deltas:
        # the upper edge must clear -E[Z]/(1-delta), where continuing always pays
        hi = max(10.0, 1.5 * abs(args.step_mean) / (1 - delta) + 5 * args.step_sd)
        sol = solve_value_function(step, delta, (-10.0, hi, args.points))
        print(f"{delta:g},{sol.x_star:.5f},{sol.iterations},{hi:g}")


if __name__ == "__main__":
    main()
