"""How far from sharp is the Lyapunov bound 4/(b - a)?

For each order, q = lambda1 is the smallest constant potential with a
nontrivial Dirichlet solution, so lambda1 * integral(rho) / (4/(b - a)) >= 1
measures the slack in the inequality. At alpha -> 2 it tends to pi^2/4.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from conformable_bvp import Interval, Order, lyapunov_check, principal_eigenvalue


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=256)
    parser.add_argument("--points", type=int, default=19)
    parser.add_argument("--csv", help="also write the table to this file")
    args = parser.parse_args()

    iv = Interval(0.0, 1.0)
    rows = []
    for alpha in np.linspace(1.05, 1.995, args.points):
        lam = principal_eigenvalue(iv, Order(alpha), args.n).lambda1_extrapolated
        rep = lyapunov_check(lambda s: lam + 0 * s, iv, Order(alpha))
        rows.append((float(alpha), lam, rep.weighted_q_integral, rep.bound, rep.weighted_q_integral / rep.bound))

    writer = csv.writer(sys.stdout)
    writer.writerow(["alpha", "lambda1", "weighted_q_integral", "bound", "ratio"])
    for row in rows:
        writer.writerow([f"{v:.10g}" for v in row])
    print(f"# classical limit of the ratio: pi^2/4 = {np.pi**2 / 4:.10g}", file=sys.stderr)
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh)
            out.writerow(["alpha", "lambda1", "weighted_q_integral", "bound", "ratio"])
            out.writerows(rows)


if __name__ == "__main__":
    main()
