#!/usr/bin/env python3
"""Print L2 errors of the three second-order solvers and the H1 error of the
clamped fourth-order solver over successive mesh halvings."""
import argparse

from transmission_lab.acceptance import biharmonic_errors, manufactured_errors


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, default=3)
    ap.add_argument("--h", type=float, default=0.2)
    args = ap.parse_args()
    hs = [args.h / 2**k for k in range(args.levels)]
    print("h,dirichlet,neumann,mixed,clamped_h1")
    prev = None
    for h in hs:
        e = manufactured_errors(h)
        row = [e["dirichlet"], e["neumann"], e["mixed"], biharmonic_errors(h)[1]]
        print(f"{h:.4g}," + ",".join(f"{v:.4e}" for v in row))
        if prev:
            print("  ratios: " + ", ".join(f"{a / b:.2f}" for a, b in zip(prev, row)))
        prev = row


if __name__ == "__main__":
    main()
