"""Command-line front end.

JSON reports go to stdout (or ``--out``); a one-line summary goes to stderr.
Exit codes: 0 success or expected verdict, 1 verdict contradicts an
expectation, 2 bad input.
"""
from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction

from . import fixtures as fx
from . import report
from .coderivative import LIMITING, REGULAR, coderivative, coderivative_shift
from .convexity import (
    convexity_check_second_order, convexity_oracle_sampling, semilocal_spot_check, strong_convexity_check,
)
from .errors import MonoconeError
from .maxquad import MaxQuadFunction
from .monotonicity import (
    DEFAULT_RADII, DecisionConfig, default_shift, hypomonotonicity_estimate, maximality_decision,
    minty_surjectivity_test, pairwise_monotone_test,
)
from .operators import MaxQuadSubdiff, SampleConfig, from_json, graph_sample, is_compilable, load_json, smooth_form
from .rational import q, to_json_number, vec

log = logging.getLogger("monocone")


# --------------------------------------------------------------------------
# argument parsing helpers


def parse_vector(text):
    try:
        return vec(x for x in text.split(",") if x.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise MonoconeError(f"cannot parse vector {text!r}") from exc


def parse_region(text, n):
    parts = [p for p in text.split(",") if p.strip()]
    out = []
    for p in parts:
        lo, sep, hi = p.partition(":")
        if not sep:
            raise MonoconeError(f"region entry {p!r} must look like lo:hi")
        out.append((q(lo), q(hi)))
    if len(out) == 1:
        out = out * n
    if len(out) != n:
        raise MonoconeError(f"region has {len(out)} intervals for dimension {n}")
    return tuple(out)


def run_config(args, n) -> dict:
    region = parse_region(args.region, n)
    return {"seed": args.seed, "region": [[to_json_number(a), to_json_number(b)] for a, b in region],
            "density": args.density, "kind": args.kind, "kappa": to_json_number(q(args.kappa)),
            "shift_s": None if args.shift_s is None else to_json_number(q(args.shift_s)),
            "route": args.route, "radii": [to_json_number(r) for r in DEFAULT_RADII]}


def _sample_cfg(args, n):
    return SampleConfig.make(parse_region(args.region, n), args.density, args.seed)


def _match_fixture(data, analysis, kappa):
    for f in fx.FIXTURES:
        if f.analysis == analysis and f.spec == data and q(f.options.get("kappa", 0)) == kappa:
            return f
    return None


def _expected(args, data, analysis):
    if getattr(args, "expect", None):
        return tuple(args.expect.split(","))
    f = _match_fixture(data, analysis, q(args.kappa))
    return f.expected if f is not None else None


# --------------------------------------------------------------------------
# commands


def cmd_coderivative(args):
    data = load_json(args.spec)
    T = from_json(data, where=str(args.spec))
    n = T.dim
    p = parse_vector(args.point)
    if len(p) != 2 * n:
        raise MonoconeError(f"--point needs {2 * n} numbers (u then v), got {len(p)}")
    w = parse_vector(args.dir)
    if len(w) != n:
        raise MonoconeError(f"--dir needs {n} numbers, got {len(w)}")
    u, v = p[:n], p[n:]
    if args.shift_s is not None:
        val = coderivative_shift(T, q(args.shift_s), (u, v), w, args.kind)
    else:
        val = coderivative(T, (u, v), w, args.kind, args.seed)
    res = val.to_json()
    res["point"] = {"u": [to_json_number(x) for x in u], "v": [to_json_number(x) for x in v]}
    rep = report.build("coderivative", run_config(args, n), res)
    if args.figure:
        from .plotting import operator_figure
        operator_figure(graph_sample(T, _sample_cfg(args, n)), args.figure,
                        marker=(float(u[0]), float(v[0])) if n == 1 else None, title="coderivative query")
    return rep, 0


def cmd_check_monotone(args):
    data = load_json(args.spec)
    T = from_json(data, where=str(args.spec))
    samples = graph_sample(T, _sample_cfg(args, T.dim))
    pw = pairwise_monotone_test(T, samples)
    hy = hypomonotonicity_estimate(T, samples)
    res = {"pairwise": pw.to_json(), "hypomonotonicity": hy.to_json(), "samples": len(samples)}
    rep = report.build("check-monotone", run_config(args, T.dim), res)
    if args.figure:
        from .plotting import operator_figure
        operator_figure(samples, args.figure, pair=None if pw.monotone else res["pairwise"]["witness"],
                        title="pairwise monotonicity")
    return rep, 0


def _minty_grid(n):
    if n == 1:
        return [(Fraction(k, 2) - 5,) for k in range(21)]
    ax = [Fraction(k) - 3 for k in range(7)]
    pts = [()]
    for _ in range(n):
        pts = [p + (x,) for p in pts for x in ax]
    return pts


def cmd_check_maximal(args):
    data = load_json(args.spec)
    T = from_json(data, where=str(args.spec))
    n = T.dim
    cfg = DecisionConfig(region=parse_region(args.region, n), density=args.density, seed=args.seed,
                         kind=args.kind, kappa=q(args.kappa), route=args.route)
    verdict = maximality_decision(T, cfg)
    res = verdict.to_json()
    r_hat = res["certificates"]["hypomonotonicity"]["r_hat"]
    if r_hat != "inf" and (is_compilable(T) or (smooth_form(T) is not None and n == 1)):
        r = q(r_hat)
        s = q(args.shift_s) if args.shift_s is not None else default_shift(r)
        try:
            res["certificates"]["minty"] = minty_surjectivity_test(T, s, _minty_grid(n), r).to_json()
        except MonoconeError as exc:
            res["certificates"]["minty"] = {"error": str(exc)}
    expected = _expected(args, data, fx.CHECK_MAXIMAL)
    ok = expected is None or verdict.verdict in expected
    rep = report.build("check-maximal", run_config(args, n), res, expected, ok)
    if args.figure:
        from .plotting import operator_figure
        samples = graph_sample(T, cfg.sample_config(n))
        operator_figure(samples, args.figure, pair=res["witnesses"].get("pair"), title=verdict.verdict)
    return rep, 0 if ok else 1


def load_function(data, where):
    if isinstance(data, dict) and data.get("variant") == "MaxQuadSubdiff":
        data = data.get("function")
    if not isinstance(data, dict):
        raise MonoconeError(f"{where}: expected a function object with 'pieces'")
    return MaxQuadFunction.from_json(data)


def cmd_check_convex(args):
    data = load_json(args.spec)
    f = load_function(data, str(args.spec))
    kappa = q(args.kappa)
    cfg = _sample_cfg(args, f.dim)
    v = strong_convexity_check(f, kappa, cfg) if kappa > 0 else convexity_check_second_order(f, cfg)
    res = v.to_json()
    res["certificates"]["oracle"] = convexity_oracle_sampling(f, 1000, args.seed, kappa).to_json()
    res["certificates"]["semilocal_window"] = semilocal_spot_check(f) if is_compilable(MaxQuadSubdiff(f)) else None
    expected = _expected(args, data, fx.CHECK_CONVEX)
    ok = expected is None or v.verdict in expected
    rep = report.build("check-convex", run_config(args, f.dim), res, expected, ok)
    if args.figure:
        from .plotting import function_figure
        function_figure(f, args.figure, witness=v.witnesses.get("primal"), title=v.verdict)
    return rep, 0 if ok else 1


def _fixture_args(base, f):
    ns = argparse.Namespace(**vars(base))
    ns.kappa = f.options.get("kappa", 0)
    ns.expect = None
    ns.figure = None
    ns.spec = None
    return ns


def run_fixture(f, base):
    args = _fixture_args(base, f)
    if f.analysis == fx.CHECK_MAXIMAL:
        T = from_json(f.spec, where=f.name)
        n = T.dim
        cfg = DecisionConfig(region=parse_region(args.region, n), density=args.density, seed=args.seed,
                             kind=args.kind, kappa=q(args.kappa), route=args.route)
        verdict = maximality_decision(T, cfg).verdict
    else:
        fn = MaxQuadFunction.from_json(f.spec)
        k = q(args.kappa)
        cfg = _sample_cfg(args, fn.dim)
        verdict = (strong_convexity_check(fn, k, cfg) if k > 0 else convexity_check_second_order(fn, cfg)).verdict
    return verdict, verdict in f.expected


def cmd_fixtures(args):
    if args.action == "list":
        res = {"fixtures": [{"name": f.name, "analysis": f.analysis, "expected": list(f.expected), "note": f.note}
                            for f in fx.FIXTURES]}
        return report.build("fixtures", {}, res), 0
    if args.action == "export":
        paths = fx.export(args.name or "fixtures")
        return report.build("fixtures", {}, {"exported": [str(p) for p in paths]}), 0
    try:
        chosen = fx.FIXTURES if not args.name else (fx.get(args.name),)
    except KeyError:
        raise MonoconeError(f"unknown fixture {args.name!r}") from None
    rows, ok = [], True
    for f in chosen:
        verdict, good = run_fixture(f, args)
        ok = ok and good
        rows.append({"name": f.name, "verdict": verdict, "expected": list(f.expected), "pass": good})
        print(f"{f.name:24s} {verdict:26s} {'pass' if good else 'FAIL'}", file=sys.stderr)
    res = {"verdict": "pass" if ok else "fail", "fixtures": rows}
    return report.build("fixtures", run_config(args, 1), res), 0 if ok else 1


# --------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--region", default="-2:2", help="lo:hi per axis, comma separated (one entry broadcasts)")
    common.add_argument("--density", type=int, default=5, help="grid points per axis")
    common.add_argument("--kind", choices=(REGULAR, LIMITING), default=REGULAR)
    common.add_argument("--kappa", default="0", help="strong monotonicity / convexity modulus")
    common.add_argument("--shift-s", dest="shift_s", default=None, help="shift s for T + sI")
    common.add_argument("--route", choices=("auto", "semilocal"), default="auto")
    common.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    common.add_argument("--figure", default=None, help="also render a figure to this file")
    common.add_argument("--expect", default=None, help="comma separated acceptable verdicts")

    p = argparse.ArgumentParser(prog="monocone", description="Coderivative-based monotonicity and convexity checks.")
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("coderivative", parents=[common], help="coderivative value at a graph point")
    c.add_argument("spec")
    c.add_argument("--point", required=True, help="u then v, comma separated")
    c.add_argument("--dir", required=True, help="direction w, comma separated")
    for name, helptext in (("check-monotone", "pairwise and hypomonotonicity sweep"),
                           ("check-maximal", "maximal monotonicity decision"),
                           ("check-convex", "convexity of a max-of-quadratics")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("spec")
    f = sub.add_parser("fixtures", parents=[common], help="built-in fixtures")
    f.add_argument("action", choices=("list", "run", "export"))
    f.add_argument("name", nargs="?", help="fixture name (run) or directory (export)")
    return p


COMMANDS = {
    "coderivative": cmd_coderivative,
    "check-monotone": cmd_check_monotone,
    "check-maximal": cmd_check_maximal,
    "check-convex": cmd_check_convex,
    "fixtures": cmd_fixtures,
}


VALUE_FLAGS = ("--region", "--point", "--dir", "--kappa", "--shift-s", "--expect")


def attach_values(argv):
    """``--region -2:2`` becomes ``--region=-2:2`` so argparse does not read
    a leading minus as an option."""
    out, it = [], iter(argv)
    for a in it:
        if a in VALUE_FLAGS:
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(attach_values(argv))
    try:
        rep, code = COMMANDS[args.command](args)
    except (MonoconeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = report.dumps(rep)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(report.summary(rep), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
