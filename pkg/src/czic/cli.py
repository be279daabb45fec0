"""Command-line front end: scheme simulation, formula sweeps and gap checks.

Exit codes: 0 success, 1 a check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import capacity as cap
from . import gaussian as g
from .capacity import Regime
from .ld_channel import ConfigError, LdConfig
from .ld_schemes import WrongRegimeError, export_trace, run_scheme, scheme_for

SCHEMA_VERSION = 1
DEFAULT_K = [2, 3, 4, 10]


class UsageError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _json_value(v):
    if isinstance(v, Fraction):
        return {"num": v.numerator, "den": v.denominator}
    if isinstance(v, Regime):
        return v.value
    return v


def _csv_value(v):
    if isinstance(v, Fraction):
        return repr(float(v))
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    return str(v)


def render(records: list, fmt: str) -> str:
    if fmt == "json":
        rows = [{"schema_version": SCHEMA_VERSION, **{k: _json_value(v) for k, v in r.items()}}
                for r in records]
        return json.dumps(rows, indent=1) + "\n"
    buf = io.StringIO()
    if records:
        w = csv.writer(buf, lineterminator="\n")
        cols = list(records[0])
        w.writerow(cols)
        for r in records:
            w.writerow([_csv_value(r[c]) for c in cols])
    return buf.getvalue()


def emit(records, args):
    text = render(records, args.format)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def alpha_grid(step: Fraction, alpha_max: Fraction):
    if step <= 0 or alpha_max < 0:
        raise UsageError("alpha grid needs a positive step and non-negative maximum")
    out, a = [], Fraction(0)
    while a <= alpha_max:
        out.append(a)
        a += step
    return out


# --------------------------------------------------------------------------
# commands


def cmd_ld_capacity(args) -> int:
    records = []
    for a in alpha_grid(args.alpha_step, args.alpha_max):
        for K in args.K:
            t2 = cap.type2_upper_closed(a, K)
            records.append({
                "alpha": a,
                "K": K,
                "regime": cap.classify_regime(a).value,
                "c_sym_fb": cap.c_sym_ld_fb(a, K),
                "c_sym_nofb": cap.gdof_nofb(a),
                "c_sym_global_fb": cap.c_sym_global_fb(a),
                "type1_upper": cap.type1_upper(a),
                "type2_upper": t2,
            })
    emit(records, args)
    return 0


def cmd_ld_simulate(args) -> int:
    cfg = LdConfig(args.K, args.n, args.m)
    name = args.scheme
    if name == "auto":
        name = scheme_for(cfg)
    result = run_scheme(name, cfg, args.seed, strict=False)
    if name == "global":
        formula = cap.c_sym_global_fb(Fraction(cfg.m, cfg.n)) if cfg.n else Fraction(cfg.m, 2)
    else:
        formula = cap.c_sym_ld_fb(Fraction(cfg.m, cfg.n), cfg.K) if cfg.n else cap.ld_fb_rate(cfg)
    measured = result.normalized_rate if cfg.n else result.rate_per_user
    ok = result.decode_success and measured == formula
    label = "rate" if cfg.n else "rate (bits/use)"
    print(f"{name}: {result.bits_per_user} bits/user, {result.blocks} uses, "
          f"{label} {measured} == formula {formula}, {'PASS' if ok else 'FAIL'}")
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(export_trace(result) + "\n")
    if args.out:
        emit([{
            "scheme": name, "K": cfg.K, "n": cfg.n, "m": cfg.m, "seed": args.seed,
            "bits_per_user": result.bits_per_user, "blocks": result.blocks,
            "rate_per_user": result.rate_per_user, "normalized_rate": result.normalized_rate,
            "formula": formula, "decode_success": result.decode_success, "pass": ok,
        }], args)
    return 0 if ok else 1


def cmd_gdof_curve(args) -> int:
    records = []
    for a in alpha_grid(args.alpha_step, args.alpha_max):
        for K in args.K:
            records.append({
                "alpha": a,
                "K": K,
                "gdof_fb": cap.gdof_fb(a, K),
                "gdof_nofb": cap.gdof_nofb(a),
                "gdof_fb_K2": cap.gdof_fb(a, 2),
                "global_fb": cap.c_sym_global_fb(a),
            })
    emit(records, args)
    return 0


def _gap_row(pr):
    p, r = pr
    return g.gap_report(p, r).as_record()


def cmd_gauss_gap(args) -> int:
    from .verify import parallel_map

    lo, hi, step = args.snr_exp
    if args.quick:
        step = max(step, 6)
    exps = range(lo, hi + 1, step)
    if not exps:
        raise UsageError("empty snr exponent range")
    grid = g.main_grid(exps, args.K_gauss, inr_step=args.inr_step, alpha_max=args.alpha_max)
    if args.regime:
        grid = [pr for pr in grid if pr[1].value == args.regime]
    rows = parallel_map(_gap_row, grid, args.workers, chunksize=512)
    emit(rows, args)

    worst = {}
    ok = True
    for row in rows:
        key = row["regime"] + (f" case {row['case']}" if row["case"] else "")
        worst[key] = max(worst.get(key, float("-inf")), row["gap"])
        ok = ok and row["pass"]
    for key in sorted(worst):
        print(f"{key}: max gap {worst[key]:.4f}", file=sys.stderr)
    if rows:
        overall = max(r["gap"] for r in rows if r["guarded"] or r["case"] in ("II", "III"))
        print(f"overall max gap {overall:.4f}; {'PASS' if ok else 'FAIL'}", file=sys.stderr)
    return 0 if ok else 1


def cmd_gauss_gdof(args) -> int:
    records = []
    for a in args.alpha:
        for K in args.K_gauss:
            for e in args.exponent:
                val = g.gdof_numeric(a, K, e)
                target = cap.gdof_fb(a, K)
                records.append({
                    "alpha": a, "K": K, "snr_exponent": e,
                    "gdof_numeric": val, "gdof_fb": target,
                    "abs_error": abs(val - float(target)),
                })
    emit(records, args)
    return 0


def cmd_verify_all(args) -> int:
    from .verify import run_all

    results = run_all(quick=args.quick, workers=args.workers, mutate=args.mutate,
                      only=set(args.only) if args.only else None)
    for r in results:
        print(r.line())
    npass = sum(r.passed for r in results)
    print(f"{npass}/{len(results)} criteria passed")
    return 0 if npass == len(results) else 1


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    from .verify import default_workers

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--quick", action="store_true", help="reduced grids")
    common.add_argument("--workers", type=int, default=default_workers())

    alpha = argparse.ArgumentParser(add_help=False)
    alpha.add_argument("--K", type=int, nargs="+", default=DEFAULT_K)
    alpha.add_argument("--alpha-step", type=_fraction, default=Fraction(1, 24))
    alpha.add_argument("--alpha-max", type=_fraction, default=Fraction(3))

    p = argparse.ArgumentParser(prog="czic", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="mode", required=True)

    s = sub.add_parser("ld-capacity", parents=[common, alpha], help="LD capacity and bound curves")
    s.set_defaults(func=cmd_ld_capacity)

    s = sub.add_parser("ld-simulate", parents=[common], help="run one LD feedback scheme")
    s.add_argument("--K", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--scheme", choices=("auto", "very-weak", "weak", "very-strong", "global"),
                   default="auto")
    s.add_argument("--trace", help="write the full transcript as JSON")
    s.set_defaults(func=cmd_ld_simulate)

    s = sub.add_parser("gdof-curve", parents=[common, alpha], help="GDoF curves with and without feedback")
    s.set_defaults(func=cmd_gdof_curve)

    s = sub.add_parser("gauss-gap", parents=[common], help="Gaussian constant-gap sweep")
    s.add_argument("--snr-exp", type=int, nargs=3, default=[2, 40, 2], metavar=("LO", "HI", "STEP"))
    s.add_argument("--K", dest="K_gauss", type=int, nargs="+", default=list(range(3, 11)))
    s.add_argument("--inr-step", type=_fraction, default=Fraction(1, 2),
                   help="step of log2(inr)")
    s.add_argument("--alpha-max", type=int, default=4)
    s.add_argument("--regime", choices=[r.value for r in Regime])
    s.set_defaults(func=cmd_gauss_gap)

    s = sub.add_parser("gauss-gdof", parents=[common], help="numeric GDoF of the achievable rates")
    s.add_argument("--alpha", type=_fraction, nargs="+",
                   default=[Fraction(1, 4), Fraction(1, 3), Fraction(7, 12), Fraction(3, 4),
                            Fraction(1), Fraction(3, 2), Fraction(5, 2), Fraction(3)])
    s.add_argument("--K", dest="K_gauss", type=int, nargs="+", default=[3, 4, 10])
    s.add_argument("--exponent", type=int, nargs="+", default=[10, 20, 40, 80])
    s.set_defaults(func=cmd_gauss_gdof)

    s = sub.add_parser("verify-all", parents=[common], help="run every acceptance check")
    s.add_argument("--only", type=int, nargs="+", help="criterion numbers to run")
    s.add_argument("--mutate", help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_verify_all)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "workers", 1) < 1:
        print("czic: --workers must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (WrongRegimeError, ConfigError, UsageError, g.WrongRegimeError) as exc:
        print(f"czic: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        sys.stderr.close()
        return 0


if __name__ == "__main__":
    sys.exit(main())
