"""Area-law probe across toy potentials V = gamma * R**beta.

Prints the spread of omega/L around its median for each beta, which is the
quantity the verdict thresholds.
"""
import argparse

import numpy as np

from mesonfringe.analysis import toy_area_law_probe


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--beta", type=float, nargs="+",
                    default=list(np.round(np.linspace(0.5, 2.0, 16), 3)))
    ap.add_argument("--R", type=int, nargs="+", default=[1, 2, 3, 4])
    ap.add_argument("--L", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--threshold", type=float, default=0.02)
    args = ap.parse_args()

    print(f"{'beta':>6} {'median w/L':>11} {'max dev':>9}  verdict")
    for beta in args.beta:
        rep = toy_area_law_probe(args.gamma, beta, args.R, args.L, threshold=args.threshold)
        print(f"{beta:6.3f} {rep.median_ratio:11.5f} {rep.max_deviation:9.2e}  {rep.verdict}")


if __name__ == "__main__":
    main()
