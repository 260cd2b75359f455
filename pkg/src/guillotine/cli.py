"""Command-line driver.

Exit codes: 0 when every check passes, 1 when a quantitative check fails,
2 on usage, parse or bound errors.  Numbers are printed with 17
significant digits so identical inputs give byte-identical output.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import eigen as eg
from . import gibbs as gb
from . import lattice as lt
from .errors import GuillotineError, ModelFormatError
from .io import ModelFile, model_from_eigenstructure, read_model, write_model
from .tensor import StateSpaces, pair_boundary

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _fmt(v) -> str:
    return "%.17g" % v


def _emit(key: str, *vals) -> None:
    print(key, *[v if isinstance(v, str) else _fmt(v) for v in vals])


def _parse_matrix(text: str | None, name: str) -> np.ndarray:
    if text is None:
        raise UsageError(f"--{name} is required for this builtin model")
    if text.startswith("ones"):
        try:
            n = int(text[4:])
        except ValueError:
            raise UsageError(f"--{name}: 'onesN' needs an integer size, got {text!r}") from None
        return np.ones((n, n))
    try:
        return np.array(json.loads(text), dtype=np.float64)
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise UsageError(f"--{name}: expected 'onesN' or a JSON matrix ({exc})") from None


def _parse_offsets(text: str) -> tuple:
    try:
        off = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"--offsets: expected n1,n2,m1,m2, got {text!r}") from None
    if len(off) != 4 or any(o < 0 for o in off):
        raise UsageError(f"--offsets: expected four nonnegative integers, got {text!r}")
    return off


def _load(args) -> ModelFile:
    if args.model and args.builtin:
        raise UsageError("give either --model or --builtin, not both")
    if args.model:
        return read_model(args.model)
    if args.builtin == "hv":
        es, w = eg.build_hv_eigenstructure(_parse_matrix(args.a, "a"), _parse_matrix(args.b, "b"))
        return model_from_eigenstructure(es, w)
    if args.builtin == "oblique":
        es, w = eg.build_oblique_eigenstructure(_parse_matrix(args.c, "c"), _parse_matrix(args.d, "d"))
        return model_from_eigenstructure(es, w)
    if args.builtin == "random":
        rng = np.random.default_rng(args.seed)
        w = lt.random_face_weight(StateSpaces(args.s1, args.s2), rng)
        return ModelFile(w.spaces, w)
    raise UsageError("one of --model or --builtin is required")


def _family(model: ModelFile) -> gb.BoundaryFamily:
    if model.rep is None:
        return gb.BoundaryFamily.uniform(model.spaces)
    return gb.BoundaryFamily(model.rep)


def _shape(args, model: ModelFile) -> tuple:
    p, q = args.p, args.q
    if (p is None or q is None) and model.sizes:
        p, q = model.sizes[0]
    if p is None or q is None:
        raise UsageError("--p and --q are required")
    if p < 1 or q < 1:
        raise UsageError(f"--p and --q must be >= 1, got ({p}, {q})")
    return p, q


# ---------------------------------------------------------------------------
# Subcommands


def cmd_partition(args) -> int:
    model = _load(args)
    p, q = _shape(args, model)
    fam = _family(model)
    g = fam.weight(p, q)
    z = pair_boundary(g, lt.partition_tensor(model.weight, p, q))
    _emit("shape", str(p), str(q))
    _emit("boundary", "rope" if model.rep is not None else "uniform")
    _emit("Z_bw", z)
    ok = True
    if model.eigen is not None and model.rep is not None:
        cf = gb.partition_closed_form(model.eigenstructure(), p, q)
        dev = abs(z - cf) / abs(cf)
        _emit("closed_form", cf)
        _emit("closed_form_rel_deviation", dev)
        ok &= dev <= args.tol
    if args.bruteforce:
        zb = pair_boundary(g, lt.partition_tensor_bruteforce(model.weight, p, q))
        dev = abs(z - zb) / abs(zb)
        _emit("Z_bw_bruteforce", zb)
        _emit("bruteforce_rel_deviation", dev)
        ok &= dev <= args.tol
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_check_consistency(args) -> int:
    model = _load(args)
    p, q = _shape(args, model)
    off = _parse_offsets(args.offsets) if args.offsets else model.offsets
    if off is None:
        raise UsageError("--offsets is required")
    n1, n2, m1, m2 = off
    if p - n1 - n2 < 1 or q - m1 - m2 < 1:
        raise UsageError(f"offsets {off} leave no inner rectangle inside ({p}, {q})")
    tv = gb.check_consistency(model.weight, _family(model), (p, q), off)
    ok = tv <= args.tol
    _emit("outer", str(p), str(q))
    _emit("inner", str(p - n1 - n2), str(q - m1 - m2))
    _emit("tv_distance", tv)
    _emit("tolerance", args.tol)
    print("PASS" if ok else "FAIL")
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_eigen_verify(args) -> int:
    model = _load(args)
    if model.rep is None:
        raise ModelFormatError("model has no 'rope' section")
    if not model.halfstrip and not model.corner:
        raise ModelFormatError("model has no 'morphisms' section")
    if model.eigen is None:
        raise ModelFormatError("model has no 'eigen' section")
    es = model.eigenstructure()
    grid = (args.p or 3, args.q or 3)
    report = eg.verify_eigenstructure(es, model.weight, p_max=args.p_max, grid=grid)
    _emit("lambda", es.lam)
    for a in ("S", "N", "W", "E"):
        _emit(f"sigma_{a}", es.sigma[a])
    _emit("kappa", es.kappa)
    ok = True
    for key, res in report.items():
        passed = res.passed(args.tol)
        ok &= passed
        _emit(f"residual:{key}", res.max, "PASS" if passed else "FAIL")
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_correlate(args) -> int:
    model = _load(args)
    es = model.eigenstructure()
    w = model.weight
    L = args.L
    if L < 1:
        raise UsageError("--L must be >= 1")
    s1 = model.spaces.s1
    for u in (args.u, args.v):
        if not 0 <= u < s1:
            raise UsageError(f"states must lie in 0..{s1 - 1}, got {u}")
    one_u = gb.one_point(es, w, args.u)
    _emit(f"one_point[{args.u}]", one_u)
    ok = True
    if L >= 2:
        one_v = gb.one_point(es, w, args.v)
        tp = gb.two_point(es, w, args.u, args.v, L)
        _emit(f"one_point[{args.v}]", one_v)
        _emit(f"two_point[{args.u},{args.v};L={L}]", tp)
        _emit("connected", tp - one_u * one_v)
    eigs = np.linalg.eigvals(gb.correlation_kernel(es).C_SN)
    eigs = eigs[np.argsort(-np.abs(eigs), kind="stable")]
    _emit("C_SN_spectrum_moduli", *[abs(s) for s in eigs])
    cl = gb.correlation_length(es)
    _emit("correlation_length", cl.length, *( [cl.note] if cl.note else []))
    if args.bruteforce:
        q = 2
        geom = lt.RectGeometry(L, q)
        edges = [geom.h(i, 1) for i in range(L)]
        old = lt.set_enumeration_bound(max(lt.get_enumeration_bound(), args.enum_bound))
        try:
            bf = lt.edge_marginal(w, _family(model).weight(L, q), edges)
        finally:
            lt.set_enumeration_bound(old)
        law = gb.marginal_segment_law(es, w, L)
        mask = bf > 0
        dev = float(np.max(np.abs(law[mask] - bf[mask]) / bf[mask])) if mask.any() else 0.0
        _emit("bruteforce_rectangle", str(L), str(q))
        _emit("bruteforce_rel_deviation", dev)
        ok &= dev <= args.tol
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_export(args) -> int:
    model = _load(args)
    write_model(model, args.out)
    _emit("wrote", args.out)
    return EXIT_PASS


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("model source")
    src.add_argument("--model", metavar="PATH", help="JSON model document")
    src.add_argument("--builtin", choices=("hv", "oblique", "random"), help="built-in model")
    src.add_argument("--a", help="hv: matrix A, 'onesN' or JSON")
    src.add_argument("--b", help="hv: matrix B, 'onesN' or JSON")
    src.add_argument("--c", help="oblique: matrix C of shape (s1, s2)")
    src.add_argument("--d", help="oblique: matrix D of shape (s2, s1)")
    src.add_argument("--seed", type=int, default=0, help="seed for --builtin random")
    src.add_argument("--s1", type=int, default=2, help="horizontal states for --builtin random")
    src.add_argument("--s2", type=int, default=2, help="vertical states for --builtin random")
    common.add_argument("--tol", type=float, default=1e-8, help="pass/fail threshold")

    parser = argparse.ArgumentParser(
        prog="guillotine",
        description="Partition functions, consistency and eigen checks for 2D lattice Markov processes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("partition", parents=[common], help="boundary-weighted partition function")
    sp.add_argument("--p", type=int)
    sp.add_argument("--q", type=int)
    sp.add_argument("--bruteforce", action="store_true", help="also sum over interior edges")
    sp.set_defaults(func=cmd_partition)

    sc = sub.add_parser("check-consistency", parents=[common], help="TV distance of nested laws")
    sc.add_argument("--p", type=int)
    sc.add_argument("--q", type=int)
    sc.add_argument("--offsets", help="n1,n2,m1,m2")
    sc.set_defaults(func=cmd_check_consistency)

    se = sub.add_parser("eigen-verify", parents=[common], help="half-strip, corner and full-plane residuals")
    se.add_argument("--p", type=int, help="full-plane grid width (default 3)")
    se.add_argument("--q", type=int, help="full-plane grid height (default 3)")
    se.add_argument("--p-max", type=int, default=2, help="widest half-strip product")
    se.set_defaults(func=cmd_eigen_verify)

    sr = sub.add_parser("correlate", parents=[common], help="one/two-point functions along a line")
    sr.add_argument("--L", type=int, default=2, help="segment length")
    sr.add_argument("--u", type=int, default=0)
    sr.add_argument("--v", type=int, default=0)
    sr.add_argument("--bruteforce", action="store_true", help="compare with enumeration on an L x 2 rectangle")
    sr.add_argument("--enum-bound", type=int, default=27, help="edge bound for --bruteforce")
    sr.set_defaults(func=cmd_correlate)

    sx = sub.add_parser("export", parents=[common], help="write the model as a JSON document")
    sx.add_argument("--out", required=True, metavar="PATH")
    sx.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    try:
        return args.func(args)
    except (UsageError, GuillotineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
