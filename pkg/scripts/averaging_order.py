"""Deviation between exact and averaged solutions as the small parameter shrinks.

Runs both the eps-scaled sweep and the 1/n sweep on X(n, x) = -x + (-1)^n and
prints the observed order of convergence.
"""

import argparse
import math

from avgdiff import stock
from avgdiff.stability import averaging_closeness_sweep, vanishing_rhs_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025, 0.0125])
    ap.add_argument("--n0", type=int, nargs="+", default=[10, 100, 1000, 10000])
    ap.add_argument("--x0", type=float, default=0.5)
    ap.add_argument("--horizon", type=int, default=10_000, help="steps for the 1/n sweep")
    args = ap.parse_args()
    f = stock.alternating_forced_decay()

    print("eps-scaled equation, horizon ceil(10/eps)")
    reps = averaging_closeness_sweep(f, [args.x0], args.eps, alpha=1.0, beta=0.0)
    for a, b in zip([None] + reps, reps):
        order = "" if a is None else f"  order {math.log(a.max_deviation / b.max_deviation, a.params['eps'] / b.params['eps']):.3f}"
        print(f"  eps={b.params['eps']:<8g} steps={b.params['steps']:<7d} deviation={b.max_deviation:.6e}{order}")

    print(f"1/n equation, {args.horizon} steps")
    for r in vanishing_rhs_sweep(f, [args.x0], args.n0, alpha=1.0, beta=0.0, horizon=args.horizon):
        print(f"  n0={r.params['n0']:<7d} deviation={r.max_deviation:.6e}")


if __name__ == "__main__":
    main()
