"""Windowed and sharp-cutoff second moments of L(Delta, s) against their main terms.

Writes one JSON line per run; pass --csv DIR to also dump (t, w, |L|^2) per T.
Takes about a minute for the default T list.
"""

import argparse
import json
from pathlib import Path

from cltk import experiment, forms, rankin
from cltk.forms import DELTA


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--T", type=float, nargs="+", default=[200, 300, 500])
    ap.add_argument("--sharp", type=float, nargs="*", default=[125, 500])
    ap.add_argument("--delta-pow", type=int, default=1)
    ap.add_argument("--table", type=int, default=1_000_000)
    ap.add_argument("--csv", type=Path)
    args = ap.parse_args()

    table = forms.build_delta_coefficients(args.table)
    consts = rankin.moment_constants(DELTA, table)
    cache = experiment.LineCache(DELTA, table)
    for T in args.T:
        w = experiment.make_window(T, args.delta_pow)
        num = experiment.second_moment_numeric(DELTA, w, table=table, cache=cache)
        main_term = experiment.second_moment_mainterm(DELTA, w, consts).value
        row = {"kind": "windowed", "T": T, "numeric": num.value, "mainterm": main_term,
               "ratio": num.value / main_term, "error_estimate": num.error_estimate}
        print(json.dumps(row), flush=True)
        if args.csv:
            args.csv.mkdir(parents=True, exist_ok=True)
            (args.csv / f"moment_T{int(T)}.csv").write_text(experiment.moment_csv(w, cache, 0.05))
    for T in args.sharp:
        r = experiment.sharp_cutoff_moment(DELTA, T, table, consts, cache=cache)
        print(json.dumps({"kind": "sharp", "T": r.T, "numeric": r.numeric, "mainterm": r.mainterm,
                          "ratio": r.ratio, "error_estimate": r.error_estimate}), flush=True)


if __name__ == "__main__":
    main()
