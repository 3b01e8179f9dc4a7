"""Command-line front end.

Exit codes: 0 success, 1 usage or parse error, 2 a cap was reached,
3 an internal invariant failed.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .binomial import RlctValue, rlct_binomial, rlct_via_tree
from .blowup import (
    DEFAULT_MAX_NODES,
    NonHaltingReport,
    blowup_between_terms,
    blowup_between_variables_with_jacobian,
    local_nc_blowup,
    max_degree_selective,
    min_degree_selective,
)
from .errors import (
    InvariantViolation,
    NodeCapExceeded,
    ParseError,
    PivotLimitExceeded,
    TermCapExceeded,
)
from .models import DEFAULT_TERM_CAP, ModelSpec, compare_model
from .poly import (
    OuterMonomial,
    SopPolynomial,
    format_polynomial,
    outer_from_json,
    parse_polynomial,
    parse_rational_list,
    polynomial_from_json,
)
from .rational import format_rational
from .simplex import (
    DEFAULT_PIVOT_CAP,
    linear_transform,
    minimum_index_ratio,
    optimal_weight,
    search_weights,
    simplex_upper_bound,
    translate,
    weighted_blowup_chart,
)

EXIT_OK, EXIT_USAGE, EXIT_CAP, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# ------------------------------------------------------------------ inputs

def _read_source(text: str) -> str:
    if text == "-":
        return sys.stdin.read()
    if text.startswith("@"):
        try:
            with open(text[1:], encoding="utf-8") as fh:
                return fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {text[1:]}: {exc}") from exc
    return text


def read_polynomial(text: str, d: int | None = None):
    src = _read_source(text).strip()
    if src.startswith("{"):
        f = polynomial_from_json(src)
        if d is not None and d != f.d:
            raise ParseError("JSON d disagrees with --d")
        return f
    return parse_polynomial(src, d)


def read_outer(text: str | None, d: int) -> OuterMonomial:
    if text is None:
        return OuterMonomial.ones(d)
    src = _read_source(text).strip()
    try:
        g = outer_from_json(src) if src.startswith("{") else OuterMonomial(parse_rational_list(src))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    if g.d != d:
        raise ParseError(f"--s has {g.d} entries but the polynomial has {d} variables")
    return g


def _poly_and_outer(args):
    s_len = len(_read_source(args.s).split(",")) if args.s and not args.s.startswith(("{", "@", "-")) else None
    d = args.d if args.d is not None else None
    f = read_polynomial(args.polynomial, d)
    if d is None and s_len is not None and s_len > f.d:
        f = read_polynomial(args.polynomial, s_len)
    return f, read_outer(args.s, f.d)


def _max_nodes(args) -> int:
    if args.max_nodes is not None:
        return args.max_nodes
    env = os.environ.get("RLCTKIT_MAX_NODES")
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError("RLCTKIT_MAX_NODES must be an integer") from exc
    return DEFAULT_MAX_NODES


def _as_sop(f, nonneg: bool) -> SopPolynomial:
    try:
        return f.to_sop(nonneg=nonneg)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit(obj, fmt: str, out):
    if fmt == "json":
        out.write(json.dumps(obj) + "\n")
    elif fmt == "text":
        for k, v in obj.items():
            out.write(f"{k}: {v}\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(list(obj))
        w.writerow([v if not isinstance(v, list) else ",".join(map(str, v)) for v in obj.values()])
    else:
        raise UsageError(f"format {fmt} is not available here")


def _rlct_json(v: RlctValue) -> dict:
    return {"lambda": format_rational(v.lam), "multiplicity": v.multiplicity}


# ---------------------------------------------------------------- commands

def cmd_rlct(args, out):
    f, g = _poly_and_outer(args)
    if f.n != 2:
        raise UsageError("rlct takes a binomial; use `bound` for other polynomials")
    f = _as_sop(f, nonneg=False)
    if any(x % 2 for c in f.columns for x in c):
        raise UsageError("rlct needs a non-negative binomial (even exponents only)")
    f = SopPolynomial(f.indexes, True)
    closed = tree = None
    if args.method in ("closed", "both"):
        closed = rlct_binomial(f, g)
    if args.method in ("tree", "both"):
        tree = rlct_via_tree(f, g, _max_nodes(args))
    if closed is not None and tree is not None and closed.lam != tree.lam:
        raise InvariantViolation(
            f"closed form {format_rational(closed.lam)} != tree {format_rational(tree.lam)}"
        )
    result = tree if tree is not None else closed
    _emit(_rlct_json(result), args.format, out)
    return EXIT_OK


def _parse_matrix(text: str):
    rows = [r for r in text.split(";") if r.strip()]
    return [list(parse_rational_list(r)) for r in rows]


def cmd_bound(args, out):
    f, g = _poly_and_outer(args)
    if args.transform:
        f = linear_transform(f, _parse_matrix(args.transform))
    if args.translate:
        p = parse_rational_list(args.translate)
        if len(p) != f.d:
            raise UsageError("--translate needs one value per variable")
        f = translate(f, p)
    if f.is_zero():
        raise UsageError("the polynomial is identically zero")
    b = simplex_upper_bound(f, g, args.pivot_cap)
    weight = None
    if b.beta > 0:
        weight = list(optimal_weight(f, g, args.pivot_cap).weight_q)
    obj = {
        "lambda_smplx": format_rational(b.lambda_smplx),
        "alpha": [format_rational(a) for a in b.alpha_star],
        "beta": format_rational(b.beta),
        "weight": weight,
    }
    if args.translate or args.transform:
        obj["polynomial"] = format_polynomial(f)
    _emit(obj, args.format, out)
    return EXIT_OK


def cmd_tree(args, out):
    f, g = _poly_and_outer(args)
    cap = _max_nodes(args)
    alg = args.algorithm
    f = _as_sop(f, nonneg=False)
    report = None
    try:
        if alg == "between-vars":
            pair = tuple(int(x) - 1 for x in args.vars.split(","))
            tree = blowup_between_variables_with_jacobian(f, g, pair, cap)
        elif alg == "between-terms":
            tree = blowup_between_terms(f, g, cap)
        elif alg == "local-nc":
            tree = local_nc_blowup(f, g, cap)
        elif alg == "min-deg":
            tree = min_degree_selective(f, cap)
        else:
            tree = max_degree_selective(f, cap)
    except NodeCapExceeded as exc:
        report = NonHaltingReport(exc.partial, cap, str(exc))
        tree = None
    if isinstance(tree, NonHaltingReport):
        report, tree = tree, None
    shown = tree if tree is not None else report.partial
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(shown.to_dot())
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(shown.to_json_text())
    summary = shown.summary()
    summary["halted"] = report is None
    if report is not None:
        summary["message"] = report.message
    _emit(summary, args.format if args.format != "csv" else "json", out)
    return EXIT_OK if report is None else EXIT_CAP


def cmd_weight(args, out):
    f, g = _poly_and_outer(args)
    b = optimal_weight(f, g, args.pivot_cap)
    q = b.weight_q
    obj = {"q": list(q), "mu": format_rational(minimum_index_ratio(f, g, q))}
    if args.chart is not None:
        i = args.chart - 1
        if not 0 <= i < f.d:
            raise UsageError("--chart is a 1-indexed variable")
        if q[i] == 0:
            raise UsageError(f"chart {args.chart} has weight 0")
        obj["chart"] = format_polynomial(weighted_blowup_chart(f, q, i))
    if args.weight_cap is not None:
        best, best_q = search_weights(f, g, args.weight_cap)
        obj["brute_force"] = {"mu": format_rational(best), "q": list(best_q)}
    _emit(obj, args.format, out)
    return EXIT_OK


def _parse_range(text: str) -> list:
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part or "-" in part:
            lo, hi = part.replace("..", "-").split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise UsageError("empty H range")
    return out


def _compare_one(job):
    spec, term_cap, pivot_cap = job
    return compare_model(spec, term_cap, pivot_cap)


def _run_jobs(fn, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def cmd_model_compare(args, out):
    spec = ModelSpec.from_json(_read_source(args.spec))
    if args.H:
        hs = _parse_range(args.H)
    elif "H" in spec.params:
        hs = [int(spec.params["H"])]
    else:
        raise UsageError("give --H or an H in the model spec")
    jobs = [(spec.with_h(h), args.term_cap, args.pivot_cap) for h in hs]
    rows = _run_jobs(_compare_one, jobs, args.jobs)
    if args.format == "json":
        out.write(json.dumps([{
            "H": r.H, "lambda_rlct": format_rational(r.lambda_rlct),
            "lambda_smplx": format_rational(r.lambda_smplx),
            "param_bound": format_rational(r.param_bound), "equal": r.equal,
        } for r in rows]) + "\n")
        return EXIT_OK
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["H", "lambda_rlct", "lambda_smplx", "param_bound", "equal"])
    for r in rows:
        w.writerow([r.H, format_rational(r.lambda_rlct), format_rational(r.lambda_smplx),
                    format_rational(r.param_bound), str(r.equal).lower()])
    return EXIT_OK


def _sweep_one(job):
    cols, s, cap = job
    f = SopPolynomial.from_columns(cols, nonneg=True)
    g = OuterMonomial(s)
    closed = rlct_binomial(f, g).lam
    tree = rlct_via_tree(f, g, cap).lam
    lp = simplex_upper_bound(f, g).lambda_smplx
    return cols, s, closed, tree, lp


def sweep_jobs(d: int, max_exp: int, s_values, limit: int | None, cap: int):
    evens = range(0, max_exp + 1, 2)
    vecs = list(itertools.product(evens, repeat=d))
    s_choices = list(itertools.product(s_values, repeat=d))
    jobs = []
    for a, b in itertools.combinations(vecs, 2):
        for s in s_choices:
            jobs.append(((a, b), s, cap))
            if limit is not None and len(jobs) >= limit:
                return jobs
    return jobs


def cmd_sweep(args, out):
    s_values = parse_rational_list(args.s_values)
    if any(x <= 0 for x in s_values):
        raise UsageError("outer exponents must be positive")
    jobs = sweep_jobs(args.d, args.max_exp, s_values, args.limit, _max_nodes(args))
    rows = _run_jobs(_sweep_one, jobs, args.jobs)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["col1", "col2", "s", "closed", "tree", "lp", "agree"])
    bad = 0
    for (a, b), s, closed, tree, lp in rows:
        agree = closed == tree == lp
        bad += not agree
        w.writerow([" ".join(map(str, a)), " ".join(map(str, b)),
                    " ".join(format_rational(x) for x in s),
                    format_rational(closed), format_rational(tree), format_rational(lp),
                    str(agree).lower()])
    if bad:
        print(f"{bad} disagreeing instances", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rlctkit", description="Exact RLCTs and simplex upper bounds.")
    p.add_argument("--version", action="version", version=f"rlctkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def poly_args(sp):
        sp.add_argument("polynomial", help="text or JSON polynomial; @file or - for stdin")
        sp.add_argument("--s", help="outer exponents, e.g. 1,1/2 (default all 1)")
        sp.add_argument("--d", type=int, help="number of variables (default: inferred)")
        sp.add_argument("--format", choices=["json", "text", "csv"], default="json")

    sp = sub.add_parser("rlct", help="exact RLCT of a non-negative sop binomial")
    poly_args(sp)
    sp.add_argument("--method", choices=["closed", "tree", "both"], default="both")
    sp.add_argument("--max-nodes", type=int)
    sp.set_defaults(func=cmd_rlct)

    sp = sub.add_parser("bound", help="simplex upper bound of any polynomial")
    poly_args(sp)
    sp.add_argument("--translate", help="expansion point p, e.g. 1,0")
    sp.add_argument("--transform", help="P^-1 rows separated by ';', e.g. '1,1;1,-1'")
    sp.add_argument("--pivot-cap", type=int, default=DEFAULT_PIVOT_CAP)
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("tree", help="build and export a blow-up tree")
    poly_args(sp)
    sp.add_argument("--algorithm", default="between-terms",
                    choices=["between-vars", "between-terms", "local-nc", "min-deg", "max-deg"])
    sp.add_argument("--vars", default="1,2", help="centre pair for between-vars")
    sp.add_argument("--dot", help="write DOT to this path")
    sp.add_argument("--json", help="write full JSON tree to this path")
    sp.add_argument("--max-nodes", type=int)
    sp.set_defaults(func=cmd_tree)

    sp = sub.add_parser("weight", help="optimal weighted blow-up weight")
    poly_args(sp)
    sp.add_argument("--chart", type=int, help="print this chart (1-indexed)")
    sp.add_argument("--weight-cap", type=int, help="also brute-force q in {0..cap}^d")
    sp.add_argument("--pivot-cap", type=int, default=DEFAULT_PIVOT_CAP)
    sp.set_defaults(func=cmd_weight)

    sp = sub.add_parser("model-compare", help="RLCT vs simplex bound for a model family")
    sp.add_argument("spec", help='model JSON, e.g. {"model":"rrr","M":5,"N":5,"r":2}')
    sp.add_argument("--H", help="range such as 2-8 or 1,2,5")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("--term-cap", type=int, default=DEFAULT_TERM_CAP)
    sp.add_argument("--pivot-cap", type=int, default=DEFAULT_PIVOT_CAP)
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_model_compare)

    sp = sub.add_parser("sweep", help="closed form vs tree vs LP on all small binomials")
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--max-exp", type=int, default=8)
    sp.add_argument("--s-values", default="1")
    sp.add_argument("--limit", type=int)
    sp.add_argument("--max-nodes", type=int)
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except (UsageError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NodeCapExceeded, PivotLimitExceeded, TermCapExceeded) as exc:
        print(f"cap reached: {exc}", file=sys.stderr)
        return EXIT_CAP
    except InvariantViolation as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
