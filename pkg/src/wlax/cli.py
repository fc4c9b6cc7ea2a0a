"""Command-line front end.

Every construction and check is reachable from one subcommand; output is
deterministic (sorted keys, canonical expression grammar, see
docs/grammar.md) so runs can be diffed byte for byte.  Exit codes: 0 when
all requested checks hold, 1 when a check fails, 2 for usage errors, 3 for
internal errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import liealg, pva, psdo, uea, yangian
from .adler import check_adler
from .errors import WlaxError
from .pva import DiffPoly, PVAContext
from .scalars import QQ, qq

SCHEMA = 1

ADLER_TABLE = {
    "gl": lambda n: (qq(1), qq(0), qq(0)),
    "sl": lambda n: (qq(1), qq(0), QQ(1, n)),
    "so": lambda n: (QQ(1, 2), QQ(1, 2), qq(0)),
    "sp": lambda n: (QQ(1, 2), QQ(1, 2), qq(0)),
}


def yangian_table(alg):
    if alg.kind in ("gl", "sl"):
        return (qq(1), qq(0), qq(0))
    return (QQ(1, 2), QQ(1, 2), QQ(alg.epsilon, 2))


def _parse_partition(text):
    return tuple(int(p) for p in text.split(",") if p)


def _load_triple(alg, path):
    with open(path) as fh:
        doc = json.load(fh)
    mats = []
    for key in ("e", "x", "f"):
        mats.append([[qq(v) for v in row] for row in doc[key]])
    return liealg.triple_from_matrices(alg, *mats)


def _build(args):
    alg = liealg.build_algebra(args.algebra, args.n)
    if getattr(args, "triple_file", None):
        triple = _load_triple(alg, args.triple_file)
    elif getattr(args, "partition", None):
        triple = liealg.sl2_from_partition(alg, _parse_partition(args.partition))
    else:
        triple = None
    return alg, triple


def _emit(args, doc, text_lines):
    if args.format == "json":
        doc = {"schema": SCHEMA, **doc}
        payload = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    else:
        payload = "\n".join(text_lines) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def cmd_algebra(args):
    alg = liealg.build_algebra(args.kind, args.n)
    doc = liealg.algebra_to_json(alg)
    lines = [f"{alg.kind}{alg.n}: dim {alg.dim}", "basis: " + " ".join(alg.labels)]
    _emit(args, {"command": "algebra", **doc}, lines)
    return 0


def cmd_lax_finite(args):
    alg, triple = _build(args)
    if triple is None:
        raise WlaxError("lax-finite needs --partition or --triple-file")
    lax = yangian.lax_finite(alg, triple, truncation=args.trunc)
    op = lax.op
    entries = {}
    for (i, j), series in sorted(op.entries.items()):
        entries[f"{i},{j}"] = [[k, series[k].text()] for k in sorted(series, reverse=True)]
    doc = {"command": "lax-finite", "n": lax.n, "truncation": args.trunc,
           "entries": entries}
    lines = [f"L(z) on a {lax.n}-dimensional space, truncation {args.trunc}"]
    for key, rows in entries.items():
        for k, txt in rows:
            lines.append(f"  ({key}) z^{k}: {txt}")
    _emit(args, doc, lines)
    return 0


def cmd_check_yangian(args):
    alg, triple = _build(args)
    if args.lax:
        if triple is None:
            raise WlaxError("--lax needs --partition or --triple-file")
        lax = yangian.lax_finite(alg, triple, truncation=args.trunc)
        abc = (qq(args.alpha), qq(args.beta), qq(args.gamma)) \
            if args.alpha is not None else (qq(1), qq(0), qq(0))
        form = None
        if abc[1] != 0:
            form = [[qq(1) if i == j else qq(0) for j in range(lax.n)]
                    for i in range(lax.n)]
        report = yangian.check_yangian(lax.op, *abc, form=form, grading=lax.grading)
    else:
        op = yangian.operator_A(alg)
        abc = (qq(args.alpha), qq(args.beta), qq(args.gamma)) \
            if args.alpha is not None else yangian_table(alg)
        report = yangian.check_yangian(op, *abc, form=alg.form)
    doc = {"command": "check-yangian", "alpha": str(abc[0]), "beta": str(abc[1]),
           "gamma": str(abc[2]), **report.to_json()}
    lines = [f"generalized Yangian identity ({abc[0]},{abc[1]},{abc[2]}): "
             + ("holds" if report.holds else "FAILS"),
             f"window: {report.to_json()['window']}"]
    if report.first_failure:
        lines.append("first failure: " + report.first_failure)
    _emit(args, doc, lines)
    return 0 if report.holds else 1


def cmd_check_symmetry(args):
    alg, _ = _build(args)
    op = yangian.operator_A(alg)
    report = yangian.check_symmetry_condition(op, alg)
    doc = {"command": "check-symmetry", **report.to_json()}
    lines = ["symmetry condition: " + ("holds" if report.holds else "FAILS")]
    if report.first_failure:
        lines.append("first failure: " + report.first_failure)
    _emit(args, doc, lines)
    return 0 if report.holds else 1


def cmd_lax_affine(args):
    alg, triple = _build(args)
    if triple is None:
        raise WlaxError("lax-affine needs --partition or --triple-file")
    lax = psdo.lax_affine(alg, triple, truncation=args.trunc, level=args.level)
    doc = {"command": "lax-affine", "level": str(qq(args.level)),
           **lax.op.to_json(alg.labels)}
    lines = [f"L(d) at level {args.level}, truncation {args.trunc}",
             "  " + lax.op.text(alg.labels),
             "all coefficients pass the reduction-invariance check"]
    _emit(args, doc, lines)
    return 0


def cmd_check_adler(args):
    alg, triple = _build(args)
    if triple is None:
        raise WlaxError("check-adler needs --partition or --triple-file")
    lax = psdo.lax_affine(alg, triple, truncation=args.trunc, level=args.level)
    if args.alpha is not None:
        abc = (qq(args.alpha), qq(args.beta), qq(args.gamma))
    else:
        abc = ADLER_TABLE[alg.kind](alg.n)
    form = alg.form
    report = check_adler(lax.op, *abc, lax.reduced_ctx, keep=args.window, form=form)
    doc = {"command": "check-adler", "alpha": str(abc[0]), "beta": str(abc[1]),
           "gamma": str(abc[2]), "level": str(qq(args.level)), **report.to_json()}
    lines = [f"Adler identity ({abc[0]},{abc[1]},{abc[2]}) at level {args.level}: "
             + ("holds" if report.holds else "FAILS"),
             f"window: {report.to_json()['window']}"]
    if report.first_failure:
        lines.append("first failure: " + report.first_failure)
    _emit(args, doc, lines)
    return 0 if report.holds else 1


def cmd_hierarchy(args):
    L = psdo.kdv_operator()
    dens = psdo.hierarchy_density(L, 2, args.n)
    doc = {"command": "hierarchy", "n": args.n, "K": 2,
           "density": dens.density.text(["u"])}
    lines = [f"h_{args.n} = {dens.density.text(['u'])}"]
    _emit(args, doc, lines)
    return 0


def cmd_flow(args):
    L = psdo.kdv_operator()
    ctx = PVAContext.kdv_adler()
    flow = psdo.lax_flow(L, 2, args.n)
    ok = psdo.check_flow_consistency(L, 2, args.n, ctx)
    rhs = flow.coefficient(0).text(["u"])
    doc = {"command": "flow", "n": args.n, "equation": f"u_t = {rhs}",
           "hamiltonian_consistent": ok}
    lines = [f"u_t = {rhs}",
             "Hamiltonian form " + ("matches" if ok else "DOES NOT match")
             + " the Lax commutator"]
    _emit(args, doc, lines)
    return 0 if ok else 1


def cmd_kdv(args):
    ctx = PVAContext.virasoro_magri()
    u = DiffPoly.gen(0)
    h = (u * u).scale(QQ(1, 2))
    flow = pva.hamiltonian_flow(ctx, h, u)
    eq = f"u_t = {flow.text(['u'])}"
    _emit(args, {"command": "kdv", "equation": eq}, [eq])
    return 0


def cmd_axioms(args):
    import random
    if args.context == "virasoro":
        ctx = PVAContext.virasoro_magri()
    elif args.context == "kdv":
        ctx = PVAContext.kdv_adler()
    else:
        ctx = PVAContext.current_algebra(liealg.build_algebra("gl", 2), args.level)
    rng = random.Random(args.seed)
    counts = pva.run_axiom_suite(ctx, rng, args.count)
    ok = counts["failures"] == 0
    doc = {"command": "axioms", "context": args.context, **counts}
    lines = [f"{k}: {v}" for k, v in sorted(counts.items())]
    lines.append("all axioms hold" if ok else "AXIOM FAILURES")
    _emit(args, doc, lines)
    return 0 if ok else 1


def build_parser():
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--format", choices=("text", "json"), default="text")
    shared.add_argument("--output", default=None, help="write output to a file")
    parser = argparse.ArgumentParser(
        prog="wlax",
        description="Exact W-algebra Lax operators, exchange/Adler identity "
                    "checks and KdV-type hierarchies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, triple=True):
        p.add_argument("--algebra", choices=("gl", "sl", "so", "sp"), required=True)
        p.add_argument("--n", type=int, required=True)
        if triple:
            p.add_argument("--partition", default=None,
                           help="comma-separated Jordan type, e.g. 2,1 (gl/sl)")
            p.add_argument("--triple-file", default=None,
                           help="JSON file with e/x/f matrices of rationals (so/sp)")

    p = sub.add_parser("algebra", parents=[shared], help="print an algebra descriptor")
    p.add_argument("--kind", choices=("gl", "sl", "so", "sp"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(fn=cmd_algebra)

    p = sub.add_parser("lax-finite", parents=[shared], help="finite Lax operator L(z)")
    common(p)
    p.add_argument("--trunc", type=int, default=-8)
    p.set_defaults(fn=cmd_lax_finite)

    p = sub.add_parser("check-yangian", parents=[shared], help="generalized Yangian identity")
    common(p)
    p.add_argument("--lax", action="store_true",
                   help="check L(z) instead of the degree-one operator")
    p.add_argument("--trunc", type=int, default=-8)
    p.add_argument("--alpha", default=None)
    p.add_argument("--beta", default="0")
    p.add_argument("--gamma", default="0")
    p.set_defaults(fn=cmd_check_yangian)

    p = sub.add_parser("check-symmetry", parents=[shared], help="twisted-Yangian symmetry condition")
    common(p, triple=False)
    p.set_defaults(fn=cmd_check_symmetry)

    p = sub.add_parser("lax-affine", parents=[shared], help="affine Lax operator L(d)")
    common(p)
    p.add_argument("--trunc", type=int, default=-8)
    p.add_argument("--level", default="1")
    p.set_defaults(fn=cmd_lax_affine)

    p = sub.add_parser("check-adler", parents=[shared], help="five-term Adler-type identity")
    common(p)
    p.add_argument("--trunc", type=int, default=-8)
    p.add_argument("--level", default="1")
    p.add_argument("--window", type=int, default=-6)
    p.add_argument("--alpha", default=None)
    p.add_argument("--beta", default="0")
    p.add_argument("--gamma", default="0")
    p.set_defaults(fn=cmd_check_adler)

    p = sub.add_parser("hierarchy", parents=[shared], help="root-hierarchy density h_n (KdV case)")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(fn=cmd_hierarchy)

    p = sub.add_parser("flow", parents=[shared], help="Lax flow and Hamiltonian consistency (KdV case)")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(fn=cmd_flow)

    p = sub.add_parser("kdv", parents=[shared], help="the KdV equation from the Virasoro bracket")
    p.set_defaults(fn=cmd_kdv)

    p = sub.add_parser("axioms", parents=[shared], help="randomized bracket axiom suite")
    p.add_argument("--context", choices=("virasoro", "gl2", "kdv"), default="virasoro")
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--level", default="1")
    p.set_defaults(fn=cmd_axioms)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except WlaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
