"""Command-line entry point.

    python -m cltk coeffs --form delta --max-n 10 --format csv
    python -m cltk constants --form delta --cutoff 1000000
    python -m cltk lvalue --form delta --re 0.5 --im 14
    python -m cltk moment --form delta --T 300
    python -m cltk optimize --nu 5/27 --degree 4 --starts 64 --seed 42
    python -m cltk shifted --l1 1 --l2 2 --h 1 --max 10000
    python -m cltk verify --suite all

Every JSON document carries tool_version, config_echo and error_estimates.
Exit status: 0 ok, 1 computation error (or failed verification), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, experiment, forms, levinson, lfunc, mainterm, rankin, verify
from .errors import CltkError, CoefficientTableTooSmall, UsageError
from .forms import DELTA, ModularForm, ShiftPair

# tables for the builtin form grow to this size at most when a computation asks for more
MAX_AUTO_TABLE = 20_000_000


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)

    def echo(self) -> dict:
        return {"command": self.command, **{k: _jsonable(v) for k, v in sorted(self.options.items())}}


def _jsonable(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else str(float(x))
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    return x


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- forms and tables ----------------------------------------------------------------


@dataclass
class FormContext:
    form: ModularForm
    table: forms.CoefficientTable | None
    builtin: bool

    def ensure(self, n: int) -> forms.CoefficientTable:
        if self.table is not None and self.table.max_n >= n:
            return self.table
        if not self.builtin:
            have = 0 if self.table is None else self.table.max_n
            raise CoefficientTableTooSmall(f"coefficient file has {have} entries, {n} needed", needed=n)
        self.table = forms.build_delta_coefficients(n)
        return self.table

    def at_least(self, n: int) -> forms.CoefficientTable:
        """A builtin table of size n, or the loaded file table as it is."""
        return self.ensure(n) if self.builtin else self.table

    def retrying(self, fn, start: int):
        """fn(table), growing a builtin table once if the cutoff turns out larger."""
        table = self.at_least(start)
        try:
            return fn(table)
        except CoefficientTableTooSmall as exc:
            if not self.builtin or exc.needed is None or exc.needed > MAX_AUTO_TABLE:
                raise
            return fn(self.ensure(int(exc.needed * 1.1) + 1))


def _form_context(args) -> FormContext:
    spec = args.form
    if spec == "delta":
        return FormContext(DELTA, None, True)
    if not spec.startswith("file:"):
        raise UsageError(f"--form must be 'delta' or 'file:PATH', got {spec!r}")
    path = Path(spec[5:])
    if not path.exists():
        raise UsageError(f"coefficient file not found: {path}")
    form = ModularForm(args.weight, args.level, args.epsilon, "file", path.stem)
    table = forms.load_coefficients(path, form)
    if getattr(args, "estimate_epsilon", False):
        eps, _ = lfunc.estimate_root_number(form, table, lfunc.AfeKernelConfig(g_scale=0.25))
        form = ModularForm(form.weight, form.level, eps, "file", form.label)
    return FormContext(form, table, False)


# -- commands ----------------------------------------------------------------------


def cmd_coeffs(args, ctx: FormContext):
    table = ctx.ensure(args.max_n)
    n = np.arange(1, args.max_n + 1)
    lam = table.lam[1 : args.max_n + 1]
    if args.format == "csv":
        return "n,lambda\n" + "".join(f"{i},{v!r}\n" for i, v in zip(n.tolist(), lam.tolist()))
    return {"n": n.tolist(), "lambda": lam.tolist(), "error_estimates": {}}


def cmd_constants(args, ctx: FormContext):
    table = ctx.at_least(args.cutoff)
    c = rankin.moment_constants(ctx.form, table)
    return {**c.as_dict(), "error_estimates": c.error_estimates}


def cmd_lvalue(args, ctx: FormContext):
    cfg = lfunc.AfeKernelConfig(g_scale=args.g_scale)
    s = complex(args.re, args.im)
    value = ctx.retrying(lambda tab: lfunc.lvalue(ctx.form, s, cfg, tab), args.table_size)
    defect = ctx.retrying(lambda tab: lfunc.fe_defect(ctx.form, s, cfg, tab), ctx.table.max_n)
    return {
        "re": args.re,
        "im": args.im,
        "value": value,
        "abs": abs(value),
        "root_number": ctx.form.root_number,
        "error_estimates": {"functional_equation_defect": defect},
    }


def cmd_moment(args, ctx: FormContext):
    consts = rankin.moment_constants(ctx.form, ctx.at_least(max(args.table_size, 100_000)))
    shifts = ShiftPair(complex(args.alpha), complex(args.beta))
    T = args.T
    if args.mollified:
        nu = args.nu
        params = levinson.table_params(nu) if nu in levinson.TABLE else levinson.LevinsonParams(args.R, (), nu)
        _, P = mainterm.minimize_c_pq(params.Q, params.R, float(nu) / 2, 8)
        main = levinson.mollified_moment_mainterm(params, P, T)
        table = ctx.at_least(args.table_size)
        numeric = ctx.retrying(
            lambda tab: experiment.mollified_moment_numeric(
                ctx.form, T, params.Q, P, params.R / 2, float(nu), tab, grid_step=args.step
            ),
            table.max_n,
        )
        return {
            "T": T, "nu": nu, "alpha": shifts.alpha, "beta": shifts.beta, "numeric": numeric,
            "mainterm": main, "ratio": numeric / main, "step": args.step, "error_estimate": None,
            "error_estimates": {"note": "diagnostic only; the o(1) term is not controlled at desk T"},
        }
    if args.sharp:
        res = ctx.retrying(
            lambda tab: experiment.sharp_cutoff_moment(
                ctx.form, T, tab, consts, args.step, experiment.default_cache(ctx.form, tab, 0.5, args.step)
            ),
            args.table_size,
        )
        numeric, main, err = res.numeric, res.mainterm, res.error_estimate
        extra = {"T_effective": res.T}
    else:
        window = experiment.make_window(T, args.delta_pow)
        res = ctx.retrying(
            lambda tab: experiment.second_moment_numeric(
                ctx.form, window, shifts, args.step, tab, cache=experiment.default_cache(ctx.form, tab, 0.5, args.step)
            ),
            args.table_size,
        )
        mt = experiment.second_moment_mainterm(ctx.form, window, consts)
        numeric, main, err = res.value, mt.value, res.error_estimate
        extra = {"window_delta": window.delta, "window_mass": mt.mass}
        if args.csv:
            cache = experiment.default_cache(ctx.form, ctx.table, 0.5, args.step)
            Path(args.csv).write_text(experiment.moment_csv(window, cache, args.step), encoding="utf-8")
    return {
        "T": T, "nu": None, "alpha": shifts.alpha, "beta": shifts.beta, "numeric": numeric,
        "mainterm": main, "ratio": numeric / main, "step": args.step, "error_estimate": err,
        "error_estimates": {"step_halving": err, "a_f": consts.error_estimates.get("a_f"),
                            "b_f": consts.error_estimates.get("b_f")},
        **extra,
    }


def cmd_optimize(args, ctx):
    res = levinson.optimize_proportion(args.nu, args.degree, args.starts, args.seed, workers=args.threads)
    return {
        "nu": args.nu, "degree": args.degree, "R": res.params.R, "h": list(res.params.h),
        "proportion": res.proportion, "objective": res.objective, "gradient_norm": res.gradient_norm,
        "starts": res.starts, "seed": res.seed,
        "error_estimates": {"gradient_norm": res.gradient_norm},
    }


def cmd_shifted(args, ctx: FormContext):
    table = ctx.ensure(args.max)
    total = forms.shifted_convolution_brute(args.l1, args.l2, args.h, 1, args.max, table)
    return {
        "l1": args.l1, "l2": args.l2, "h": args.h, "max": args.max, "sum": total,
        "ratio_to_trivial_bound": abs(total) / args.max,
        "error_estimates": {},
    }


def cmd_verify(args, ctx):
    results = verify.run_suite(args.suite)
    ok = all(c.passed for checks in results.values() for c in checks)
    return {
        "suite": args.suite,
        "passed": ok,
        "checks": {k: [c.as_dict() for c in v] for k, v in results.items()},
        "error_estimates": {},
    }, (0 if ok else 1)


COMMANDS = {
    "coeffs": cmd_coeffs,
    "constants": cmd_constants,
    "lvalue": cmd_lvalue,
    "moment": cmd_moment,
    "optimize": cmd_optimize,
    "shifted": cmd_shifted,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--form", default="delta", help="delta or file:PATH (CSV with header n,lambda)")
    common.add_argument("--weight", type=int, default=12)
    common.add_argument("--level", type=int, default=1)
    common.add_argument("--epsilon", type=int, default=1, choices=(1, -1))
    common.add_argument("--estimate-epsilon", action="store_true")
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--threads", type=int, default=int(os.environ.get("CLTK_THREADS", "1")))
    common.add_argument("--seed", type=int, default=0)

    p = _Parser(prog="cltk", description="mollified second moments of degree-2 L-functions")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("coeffs", parents=[common])
    c.add_argument("--max-n", type=int, required=True)

    c = sub.add_parser("constants", parents=[common])
    c.add_argument("--cutoff", type=int, default=1_000_000)

    c = sub.add_parser("lvalue", parents=[common])
    c.add_argument("--re", type=float, required=True)
    c.add_argument("--im", type=float, required=True)
    c.add_argument("--g-scale", type=float, default=1.0)
    c.add_argument("--table-size", type=int, default=100_000)

    c = sub.add_parser("moment", parents=[common])
    c.add_argument("--T", type=float, required=True)
    c.add_argument("--alpha", type=complex, default=0j)
    c.add_argument("--beta", type=complex, default=0j)
    c.add_argument("--sharp", action="store_true")
    c.add_argument("--delta-pow", type=int, choices=(1, 2), default=1)
    c.add_argument("--step", type=float, default=0.05)
    c.add_argument("--mollified", action="store_true")
    c.add_argument("--nu", type=_fraction, default=Fraction(5, 27), help="mollifier exponent for --mollified")
    c.add_argument("--R", type=float, default=1.0, help="R for --mollified when nu is not tabulated")
    c.add_argument("--csv", help="also write t, w(t), |L|^2 to this file")
    c.add_argument("--table-size", type=int, default=100_000)

    c = sub.add_parser("optimize", parents=[common])
    c.add_argument("--nu", type=_fraction, required=True)
    c.add_argument("--degree", type=int, required=True)
    c.add_argument("--starts", type=int, required=True)

    c = sub.add_parser("shifted", parents=[common])
    c.add_argument("--l1", type=int, required=True)
    c.add_argument("--l2", type=int, required=True)
    c.add_argument("--h", type=int, required=True)
    c.add_argument("--max", type=int, required=True)

    c = sub.add_parser("verify", parents=[common])
    c.add_argument("--suite", choices=("hecke", "afe", "euler", "laurent", "conrey", "all"), default="all")
    return p


def _render(doc, fmt: str) -> str:
    if isinstance(doc, str):
        return doc
    if fmt == "text":
        return "".join(f"{k}: {json.dumps(_jsonable(v))}\n" for k, v in doc.items())
    if fmt == "csv":
        flat = {k: v for k, v in doc.items() if not isinstance(v, (dict, list))}
        return ",".join(flat) + "\n" + ",".join(str(_jsonable(v)) for v in flat.values()) + "\n"
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def run(config: RunConfig, args) -> int:
    ctx = _form_context(args) if hasattr(args, "form") else None
    out = COMMANDS[config.command](args, ctx)
    status = 0
    if isinstance(out, tuple):
        out, status = out
    if isinstance(out, dict):
        out = {
            **out,
            "tool_version": __version__,
            "config_echo": config.echo(),
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        }
    text = _render(out, args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return status


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        options = {k: v for k, v in vars(args).items() if k not in ("command", "out")}
        return run(RunConfig(args.command, options), args)
    except UsageError as exc:
        print(f"cltk: usage error: {exc}", file=sys.stderr)
        return 2
    except CltkError as exc:
        print(f"cltk: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # argument values the parser accepted but a module rejected (e.g. T < 40)
        print(f"cltk: usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
