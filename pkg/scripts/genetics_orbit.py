"""Periodic orbit of the selection recursion across eps, and its distance from the averaged equilibrium.

    python scripts/genetics_orbit.py --eps 0.04 0.02 0.01 0.005 --out orbit.csv
"""

import argparse

import numpy as np

from avgdiff.csvio import write_csv
from avgdiff.genetics import SelectionParams, locate_orbit, selection_equilibrium


def sweep(eps_list, alpha, beta):
    rows = []
    for eps in eps_list:
        params = SelectionParams(eps, alpha, beta)
        orbit, fallback = locate_orbit(params)
        pbar = selection_equilibrium(params)
        rows.append(
            dict(
                eps=eps,
                pbar=pbar,
                distance=float(np.max(np.abs(orbit.states[:, 0] - pbar))),
                max_multiplier=max(orbit.multipliers),
                residual=orbit.residual,
                fallback=fallback,
                states=" ".join(f"{v:.10f}" for v in orbit.states[:, 0]),
            )
        )
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=float, nargs="+", default=[0.04, 0.02, 0.01, 0.005, 0.0025])
    ap.add_argument("--alpha", type=float, nargs="+", default=[0.5, 1.5])
    ap.add_argument("--beta", type=float, nargs="+", default=[3.5, 2.5])
    ap.add_argument("--out", help="optional CSV path")
    args = ap.parse_args()
    rows = sweep(args.eps, args.alpha, args.beta)
    prev = None
    for r in rows:
        ratio = "" if prev is None else f"  ratio {r['distance'] / prev:.3f}"
        print(f"eps={r['eps']:<8g} distance={r['distance']:.6e} multiplier={r['max_multiplier']:.6f}{ratio}")
        prev = r["distance"]
    if args.out:
        write_csv(rows, args.out)


if __name__ == "__main__":
    main()
