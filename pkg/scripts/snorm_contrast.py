"""Window-sum norm versus its absolute-value variant for a zero-mean field, across window lengths."""

import argparse

from avgdiff import stock
from avgdiff.csvio import write_csv
from avgdiff.norms import window_abs_norm, window_sum_norm


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--windows", type=int, nargs="+", default=[1, 2, 3, 10, 11, 100, 101, 1000, 10_000])
    ap.add_argument("--grid-spacing", type=float, default=0.1)
    ap.add_argument("--out", help="optional CSV path")
    args = ap.parse_args()
    f = stock.zero_mean_period_two()
    rows = []
    for N in args.windows:
        s = window_sum_norm(f, N, args.grid_spacing, 2)
        a = window_abs_norm(f, N, args.grid_spacing, 2)
        rows.append(dict(window=N, snorm=s.value, abs_norm=a.value, abs_per_step=a.value / N))
        print(f"N={N:<6d} S={s.value:<8g} S_abs={a.value:<10g} S_abs/N={a.value / N:g}")
    if args.out:
        write_csv(rows, args.out)


if __name__ == "__main__":
    main()
