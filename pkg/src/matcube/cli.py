"""Command-line interface.

Instance files are JSON with a ``kind`` discriminator:

    {"kind": "cube",   "H": [[..], ...], "radius": 1.0}
    {"kind": "system", "A": [[..], ...], "radius": 1.0}
    {"kind": "graph",  "n": 5, "W": [[..]]}  or  {"edges": [[i, j, w], ...]}
    {"kind": "bqp",    "A": [[..]]}

Exit codes: 0 = certified / answered positively, 1 = refuted or
infeasible, 2 = inconclusive (a sufficient method found no certificate, or
the solver failed numerically), 3 = input error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import apps, cube, serialize
from .lmi import SolverFailure

EXIT_YES = 0
EXIT_NO = 1
EXIT_INCONCLUSIVE = 2
EXIT_INPUT = 3


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def load_instance_file(path: str):
    """Parse any instance kind; returns (kind, object)."""
    d = _load_json(path)
    kind = d.get("kind", "cube")
    if kind == "cube":
        return kind, serialize.instance_from_dict(d)
    if kind == "system":
        A = tuple(np.asarray(a, dtype=float) for a in d["A"])
        n = int(d.get("n", A[0].shape[0]))
        m = int(d.get("m", len(A) - 1))
        return kind, apps.UncertainLinearSystem(n, m, A, float(d.get("radius", 1.0)))
    if kind == "graph":
        if "W" in d:
            W = np.asarray(d["W"], dtype=float)
            n = int(d.get("n", W.shape[0]))
        else:
            n = int(d["n"])
            W = np.zeros((n, n))
            for i, j, w in d["edges"]:
                W[int(i), int(j)] += float(w)
                W[int(j), int(i)] += float(w)
        return kind, apps.WeightedGraph(n, W)
    if kind == "bqp":
        return kind, np.asarray(d["A"], dtype=float)
    raise ValueError(f"unknown instance kind {kind!r}")


def _need(kind_got: str, kind_want: str):
    if kind_got != kind_want:
        raise ValueError(f"this command needs a {kind_want!r} instance, "
                         f"got {kind_got!r}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_verify(args) -> int:
    kind, inst = load_instance_file(args.instance)
    _need(kind, "cube")
    cert = None
    if args.method == "vertex":
        lam, delta = cube.vertex_oracle(inst)
        psd = lam >= -args.tol
        print(f"vertex oracle: min eigenvalue {_fmt(lam)} "
              f"at delta = {delta.tolist()}")
        print("PSD on cube" if psd else "NOT PSD on cube")
        return EXIT_YES if psd else EXIT_NO
    try:
        if args.method == "bental":
            cert = cube.bental_test(inst)
        elif args.method == "quad":
            cert = cube.quad_test(inst)
        elif args.method == "full":
            try:
                cert = cube.construct_full_certificate(inst)
            except ValueError as exc:       # not PSD at a vertex: refuted
                print(str(exc))
                return EXIT_NO
            except cube.ConstructionError as exc:
                print(f"inconclusive: {exc}")
                return EXIT_INCONCLUSIVE
    except SolverFailure as exc:
        print(f"inconclusive: numerical failure ({exc})")
        return EXIT_INCONCLUSIVE
    if cert is None:
        print(f"method {args.method}: certificate not found (inconclusive; "
              "the method is sufficient, not necessary)")
        return EXIT_INCONCLUSIVE
    result = cube.verify_certificate(inst, cert)
    print(f"method {args.method}: certificate found and "
          f"{'verified' if result.valid else 'REJECTED'} "
          f"(identity residual {_fmt(result.residual)})")
    if args.cert_out:
        serialize.dump_certificate(cert, args.cert_out)
        print(f"certificate written to {args.cert_out}")
    return EXIT_YES if result.valid else EXIT_INCONCLUSIVE


def cmd_certify_full(args) -> int:
    kind, inst = load_instance_file(args.instance)
    _need(kind, "cube")
    try:
        cert = cube.construct_full_certificate(inst)
    except ValueError as exc:
        print(str(exc))
        return EXIT_NO
    except cube.ConstructionError as exc:
        print(f"inconclusive: {exc}")
        return EXIT_INCONCLUSIVE
    print(f"degree-{2 * inst.m} certificate constructed ({cert.path})")
    if args.out:
        serialize.dump_certificate(cert, args.out)
        print(f"certificate written to {args.out}")
    return EXIT_YES


def cmd_check_cert(args) -> int:
    kind, inst = load_instance_file(args.instance)
    _need(kind, "cube")
    cert = serialize.load_certificate(args.certificate)
    result = cube.verify_certificate(inst, cert)
    print(f"certificate variant: {cert.variant}")
    print(f"identity residual: {_fmt(result.residual)}")
    for name, margin in result.psd_margins.items():
        print(f"  psd margin {name}: {_fmt(margin)}")
    if result.valid:
        print("certificate VALID")
        return EXIT_YES
    for reason in result.reasons:
        print(f"  reject: {reason}")
    print("certificate INVALID")
    return EXIT_NO


def cmd_dual(args) -> int:
    kind, inst = load_instance_file(args.instance)
    _need(kind, "cube")
    d = cube.dual_solve(inst)
    cube.rank_one_extract(d, seed=args.seed)
    print(f"dual optimum: {_fmt(d.d_star)}")
    if d.atoms:
        for a in d.atoms:
            print(f"  atom: weight {_fmt(a.weight)}, "
                  f"delta = {[int(s) for s in a.delta]}, "
                  f"x = {[float(_fmt(v)) for v in a.x]}")
    else:
        print(f"  no rank-one extraction: {d.diagnostic or 'no atoms'}")
    return EXIT_YES if d.d_star >= -args.tol else EXIT_NO


def cmd_stability(args) -> int:
    kind, sys_ = load_instance_file(args.instance)
    _need(kind, "system")
    report = apps.stability_feasible(sys_, args.method)
    print(f"method {args.method}, radius {_fmt(sys_.radius)}: "
          f"{report.verdict} (margin {_fmt(report.t_star)})")
    if args.radius_search:
        r = apps.stability_radius(sys_, args.method, tol_r=args.tol_r)
        print(f"certified stability radius: {_fmt(r)}")
    if report.verdict == "marginal":
        return EXIT_INCONCLUSIVE
    return EXIT_YES if report.stable else EXIT_NO


def cmd_maxcut(args) -> int:
    kind, g = load_instance_file(args.instance)
    _need(kind, "graph")
    for method in args.methods.split(","):
        method = method.strip()
        bound = apps.maxcut_bound(g, method)
        tag = "value" if method == "exact" else "upper bound"
        print(f"{method:>8}: {tag} {_fmt(bound)}")
    return EXIT_YES


def cmd_bqp(args) -> int:
    kind, A = load_instance_file(args.instance)
    _need(kind, "bqp")
    for method in args.methods.split(","):
        method = method.strip()
        bound = apps.bqp_min_lower_bound(A, method)
        tag = "minimum" if method == "exact" else "lower bound"
        print(f"{method:>8}: {tag} {_fmt(bound)}")
    return EXIT_YES


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="matcube",
        description="PSD verification of affine matrix families over a cube")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for randomized extraction steps (default 0)")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="test PSD-ness of a cube instance")
    v.add_argument("instance")
    v.add_argument("--method", default="quad",
                   choices=["vertex", "bental", "quad", "full"])
    v.add_argument("--tol", type=float, default=1e-8)
    v.add_argument("--cert-out", default=None)
    v.set_defaults(fn=cmd_verify)

    c = sub.add_parser("certify-full",
                       help="construct the explicit degree-2m certificate")
    c.add_argument("instance")
    c.add_argument("--out", default=None)
    c.set_defaults(fn=cmd_certify_full)

    k = sub.add_parser("check-cert", help="re-verify a stored certificate")
    k.add_argument("instance")
    k.add_argument("certificate")
    k.set_defaults(fn=cmd_check_cert)

    d = sub.add_parser("dual", help="dual bound and worst-case extraction")
    d.add_argument("instance")
    d.add_argument("--tol", type=float, default=1e-6)
    d.set_defaults(fn=cmd_dual)

    s = sub.add_parser("stability", help="quadratic stability of a system")
    s.add_argument("instance")
    s.add_argument("--method", default="quad",
                   choices=["vertex", "bental", "quad"])
    s.add_argument("--radius-search", action="store_true")
    s.add_argument("--tol-r", type=float, default=1e-3)
    s.set_defaults(fn=cmd_stability)

    mc = sub.add_parser("maxcut", help="certified MAXCUT upper bounds")
    mc.add_argument("instance")
    mc.add_argument("--methods", default="exact,bental,quad,gw_sdp")
    mc.set_defaults(fn=cmd_maxcut)

    bq = sub.add_parser("bqp", help="certified binary-quadratic lower bounds")
    bq.add_argument("instance")
    bq.add_argument("--methods", default="exact,bental,quad")
    bq.set_defaults(fn=cmd_bqp)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverFailure as exc:
        print(f"inconclusive: solver failure ({exc})", file=sys.stderr)
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
