"""Evaluate the tabulated (R, h) points and, optionally, re-optimise them.

    python scripts/reproduce_table.py            # evaluation only, < 1 s
    python scripts/reproduce_table.py --reopt    # 64-start search per nu, ~1 min
"""

import argparse
from fractions import Fraction

from cltk import levinson


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reopt", action="store_true")
    ap.add_argument("--starts", type=int, default=64)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    print(f"{'nu':>6} {'proportion':>12} {'gradient':>10}  {'as printed':>12}")
    for nu in levinson.TABLE:
        p = levinson.table_params(nu)
        printed = levinson.proportion(levinson.table_params(nu, printed=True))
        print(f"{str(nu):>6} {levinson.proportion(p):12.8f} {levinson.gradient_norm(p):10.1e}  {printed:12.6f}")

    if args.reopt:
        print()
        for nu in levinson.TABLE:
            res = levinson.optimize_proportion(Fraction(nu), 4, args.starts, args.seed)
            h = ", ".join(f"{x:.6f}" for x in res.params.h)
            print(f"nu={nu}: proportion {res.proportion:.8f}  R={res.params.R:.6f}  h=({h})")


if __name__ == "__main__":
    main()
