"""Refinement study of the principal eigenvalue: lambda1(n), successive differences and observed order."""

from __future__ import annotations

import argparse

import numpy as np

from conformable_bvp import Interval, Order, principal_eigenvalue


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--alphas", default="1.1,1.25,1.5,1.75,1.9,1.999")
    parser.add_argument("--sizes", default="32,64,128,256,512")
    parser.add_argument("--a", type=float, default=0.0)
    parser.add_argument("--b", type=float, default=1.0)
    args = parser.parse_args()

    iv = Interval(args.a, args.b)
    sizes = [int(s) for s in args.sizes.split(",")]
    for alpha in (float(x) for x in args.alphas.split(",")):
        results = [principal_eigenvalue(iv, Order(alpha), n) for n in sizes]
        lams = np.array([r.lambda1 for r in results])
        diffs = np.abs(np.diff(lams))
        print(f"alpha = {alpha}")
        print(f"  {'n':>5} {'lambda1':>18} {'|diff|':>10} {'order':>6}")
        for i, n in enumerate(sizes):
            diff = f"{diffs[i - 1]:10.3e}" if i else " " * 10
            order = f"{np.log2(diffs[i - 2] / diffs[i - 1]):6.2f}" if i >= 2 else " " * 6
            print(f"  {n:5d} {lams[i]:18.12f} {diff} {order}")
        print(f"  extrapolated: {results[-1].lambda1_extrapolated:.12f}"
              f"  (pi^2 = {np.pi**2:.12f} is the alpha -> 2 limit on [0, 1])")


if __name__ == "__main__":
    main()
