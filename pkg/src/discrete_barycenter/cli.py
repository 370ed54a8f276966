"""Command-line interface.

Exit codes: 0 success, 1 failed verification, 2 unreadable or invalid
input, 3 solver failure, 4 size cap or enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time

from . import __version__
from .barycenter import (
    build_cost_tensor,
    build_primal,
    check_dual,
    dump_result,
    load_result,
    primal_size,
    solve_barycenter,
)
from .centroid import build_centroids, detect_grid, grid_density_bound, refined_grid
from .demo import generate_demo, load_demo
from .errors import (
    BudgetExceeded,
    DimensionError,
    InfeasibleTransport,
    NumericalError,
    ParseError,
    SizeError,
    SolverFailure,
    ValidationError,
)
from .lp import dump_lp
from .measure import load_measure_set, measure_set_to_dict
from .oracle import run_oracle
from .sparsity import sparsify, support_bound
from .svg import render_svg
from .transport import certify

log = logging.getLogger("discrete_barycenter")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_SOLVER, EXIT_SIZE = 0, 1, 2, 3, 4


def _read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _load_measures(path: str, exact: bool):
    return load_measure_set(_read_text(path), exact=exact)


def cmd_solve(args) -> int:
    ms = _load_measures(args.measures, args.exact)
    s = build_centroids(ms)
    n_var, n_row = primal_size(ms, len(s))
    log.info("%d measures, %d centroids, LP with %d variables and %d rows", ms.n, len(s), n_var, n_row)
    if args.dump_lp:
        p = build_primal(ms, s, build_cost_tensor(ms, s))
        dump_lp(p, args.dump_lp)
    start = time.perf_counter()
    result = solve_barycenter(ms, mode="exact" if args.exact else "float", tol=args.tol,
                              strategy=args.strategy, centroids=s)
    if args.sparse:
        result = sparsify(result, ms, s)
    elapsed = time.perf_counter() - start
    _write_text(args.output, dump_result(result))
    if args.svg:
        _write_text(args.svg, render_svg(result, ms))
    gap = check_dual(result, ms)["relative_gap"]
    print(json.dumps({
        "status": "optimal",
        "total_cost": float(result.total_cost),
        "support_size": result.support_size,
        "support_bound": support_bound(ms),
        "centroids": len(s),
        "variables": n_var,
        "constraints": n_row,
        "relative_duality_gap": gap,
        "seconds": round(elapsed, 3),
    }))
    return EXIT_OK


def cmd_verify(args) -> int:
    doc_text = _read_text(args.result)
    try:
        exact = bool(json.loads(doc_text).get("exact", False))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {args.result}: {exc}") from exc
    ms = _load_measures(args.measures, exact)
    result = load_result(doc_text, ms)
    cert = certify(result, ms)
    report = cert.as_dict()
    print(json.dumps(report, indent=1, default=str))
    return EXIT_OK if cert.passed else EXIT_FAIL


def cmd_centroids(args) -> int:
    ms = _load_measures(args.measures, args.exact)
    s = build_centroids(ms)
    doc = {
        "count": len(s),
        "tuples": math.prod(ms.sizes),
        "points": [[float(c) for c in p] for p in s.points],
        "provenance": [[int(k) for k in t] for t in s.provenance],
    }
    g = detect_grid(ms)
    if g is not None:
        bounds = grid_density_bound(g, ms.n)
        doc["grid"] = {
            "origin": g.origin.tolist(),
            "axes": g.axes.tolist(),
            "extents": list(g.extents),
            "refined_extents": list(refined_grid(g, ms.n).extents),
            "density_bound": bounds.density,
            "support_bound": bounds.support,
        }
    print(json.dumps(doc))
    return EXIT_OK


def cmd_demo(args) -> int:
    spec = load_demo(args.name)
    ms = generate_demo(spec)
    doc = measure_set_to_dict(ms)
    doc["labels"] = spec.month_names
    doc["cities"] = [c.name for c in spec.cities]
    _write_text(args.output, json.dumps(doc, indent=1))
    return EXIT_OK


def cmd_oracle(args) -> int:
    summary = run_oracle(seed=args.seed, count=args.count, max_n=args.max_n,
                         max_support=args.max_support, q=args.denominator)
    print(json.dumps(summary, indent=1))
    return EXIT_OK if summary["failed"] == 0 else EXIT_FAIL


def cmd_plot(args) -> int:
    doc_text = _read_text(args.result)
    try:
        exact = bool(json.loads(doc_text).get("exact", False))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {args.result}: {exc}") from exc
    ms = _load_measures(args.measures, exact)
    result = load_result(doc_text, ms)
    labels = json.loads(_read_text(args.measures)).get("labels")
    _write_text(args.output, render_svg(result, ms, transport_to=args.transport_to, labels=labels))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="barycenter", description="Exact Wasserstein-2 barycenters of discrete measures.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compute a barycenter")
    p.add_argument("measures", help="measure-set JSON")
    p.add_argument("-o", "--output", required=True, help="result JSON path")
    p.add_argument("--sparse", action="store_true", help="return a barycenter with at most sum S_i - N + 1 atoms")
    p.add_argument("--exact", action="store_true", help="rational arithmetic throughout")
    p.add_argument("--tol", type=float, default=None, help="float solver tolerance (default 1e-9)")
    p.add_argument("--svg", help="also write a plot (2-d only)")
    p.add_argument("--dump-lp", help="write the LP as text triplets")
    p.add_argument("--strategy", choices=["auto", "full", "pricing"], default="auto",
                   help="solve the full LP or price centroids in (default: auto)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="certify a result against its measures")
    p.add_argument("result")
    p.add_argument("measures")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("centroids", help="list the candidate support")
    p.add_argument("measures")
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=cmd_centroids)

    p = sub.add_parser("demo", help="write a bundled demo measure set")
    p.add_argument("name", choices=["california"])
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("oracle", help="cross-check solvers against brute force")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--max-n", type=int, default=3)
    p.add_argument("--max-support", type=int, default=3)
    p.add_argument("--denominator", type=int, default=4)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("plot", help="render a result as SVG")
    p.add_argument("result")
    p.add_argument("measures")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--transport-to", type=int, default=None, help="draw transport arrows to this measure")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ParseError, ValidationError, DimensionError, InfeasibleTransport) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverFailure, NumericalError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (SizeError, BudgetExceeded) as exc:
        print(f"size limit: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
