"""Additional-shot counts for GKP grid preparation: knitting vs random walk.

Writes the long-format CSV (series, r, L, additional_shots) and prints the
exact-norm ratio next to its Stirling estimate at each squeezing.

    python3 scripts/fig2_gkp_shots.py [-o fig2.csv] [--Lmax 10] [--r 0.1 1.0]
"""

import argparse

from cvknit.applications import GKP_FIGURE_HEADER, gkp_figure_rows, gkp_shot_analysis
from cvknit.serialization import csv_text


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-o", "--output", default="fig2_gkp_shots.csv")
    ap.add_argument("--Lmax", type=int, default=10)
    ap.add_argument("--r", type=float, nargs="+", default=[0.1, 1.0])
    args = ap.parse_args()

    with open(args.output, "w", newline="") as f:
        f.write(csv_text(GKP_FIGURE_HEADER, gkp_figure_rows(args.Lmax, tuple(args.r))))
    print(f"wrote {args.output}")

    for r in args.r:
        print(f"\nr = {r:g}")
        print(f"{'L':>3} {'N_exact':>12} {'ck shots':>12} {'rw shots':>9} {'ratio':>9} {'stirling':>9}")
        for row in gkp_shot_analysis(args.Lmax, r):
            print(f"{row.L:>3} {row.N_exact:>12.5g} {row.shots_ck:>12.5g} {row.shots_rw:>9.5g} "
                  f"{row.ratio:>9.4f} {row.stirling:>9.4f}")


if __name__ == "__main__":
    main()
