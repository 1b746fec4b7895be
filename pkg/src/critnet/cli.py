"""Command-line front end: ``critnet <subcommand> ...``.

Exit codes: 0 success, 1 a check failed, 2 usage or input error,
3 numeric failure (no convergence, edge collapse, every sample rejected).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import generators
from .criticality import EdgeCollapseError, SolverParams, is_critical, relax_net
from .currents import cut_scan, packing_svg, rectangle_packing
from .density import DensitySampleRejected, density_profile, extend_leaves
from .fileio import dumps, fmt, read_net, write_net
from .net import Net, NetError, outer_radius, total_interior_length
from .verify import CHECKS, Options, details_csv, report_csv, report_json, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
INEQ_SLACK = 1e-9

log = logging.getLogger("critnet")


class UsageError(Exception):
    pass


def _vector(text: str, k: int | None = None, normalize: bool = False) -> np.ndarray:
    try:
        v = np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError:
        raise UsageError(f"cannot parse vector {text!r}; expected c1,c2,...") from None
    if k is not None and v.size != k:
        raise UsageError(f"vector {text!r} must have {k} components")
    if normalize:
        n = np.linalg.norm(v)
        if n == 0:
            raise UsageError("direction must be non-zero")
        v = v / n
    return v


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _counts(net: Net) -> str:
    return (f"leaves={net.n_leaves} interior={net.interior.size} edges={net.n_edges} "
            f"interior_length={fmt(total_interior_length(net))}")


# -- subcommands -------------------------------------------------------------


def cmd_generate(args) -> int:
    fam = args.family
    if fam == "grid":
        net = generators.grid_net(args.d, args.n)
    elif fam == "hex":
        net = generators.hexagon_net(args.rows, args.cols)
    elif fam == "lines":
        if not args.line:
            raise UsageError("give at least one --line px,py,dx,dy")
        lines = []
        for text in args.line:
            v = _vector(text, 4)
            lines.append((v[:2], v[2:]))
        net = generators.line_arrangement_net(lines, args.radius)
    elif fam == "exadiam":
        net = generators.exadiam_net(args.n, args.k)
    else:
        net = generators.fixture(args.name)
    if args.output in (None, "-"):
        sys.stdout.write(dumps(net))
        print(_counts(net), file=sys.stderr)
    else:
        write_net(net, args.output)
        print(_counts(net))
        target = net.meta.get("longest_path_target")
        if target is not None:
            print(f"longest_path_target={target}")
    return EXIT_OK


def cmd_relax(args) -> int:
    net = read_net(args.input)
    if args.jitter > 0:
        rng = np.random.default_rng(args.seed)
        pos = np.array(net.positions)
        pos[net.interior] += args.jitter * rng.normal(size=(net.interior.size, net.dimension))
        net = net.with_positions(pos)
    params = SolverParams(tol=args.tol, max_sweeps=args.max_sweeps, damping=args.damping,
                          seed=args.seed)
    try:
        res = relax_net(net, params)
    except EdgeCollapseError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.trace:
        Path(args.trace).write_text(res.trace_csv())
    _emit(dumps(res.net), args.output)
    print(f"converged={res.converged} sweeps={res.sweeps} residual={res.max_residual:.3e} "
          f"{_counts(res.net)}", file=sys.stderr)
    return EXIT_OK if res.converged else EXIT_NUMERIC


def cmd_verify(args) -> int:
    net = read_net(args.input)
    checks = None
    if args.checks:
        checks = [c.strip() for c in args.checks.split(",") if c.strip()]
        unknown = sorted(set(checks) - set(CHECKS))
        if unknown:
            raise UsageError(f"unknown checks {unknown}; choose from {', '.join(CHECKS)}")
    opt = Options(seed=args.seed, n_directions=args.directions, perturb=args.perturb,
                  tol=args.tol)
    result = run_suite(net, opt, checks)
    for r in result.reports:
        res = "" if r.residual is None else f" residual={r.residual:.3e}"
        print(f"{r.check:24s} {r.status:13s}{res} {r.reason}".rstrip())
    c = result.counts
    print(f"summary: pass={c['pass']} fail={c['fail']} skipped={c['skipped']} "
          f"not_asserted={c['not_asserted']}")
    bad = result.first_failure()
    if bad is not None:
        print(f"first failure: {bad.check}")
    if args.output:
        Path(args.output).write_text(report_json(net, result, opt))
    if args.csv:
        Path(args.csv).write_text(report_csv(result))
    if args.details_csv:
        Path(args.details_csv).write_text(details_csv(result))
    return EXIT_OK if result.all_passed else EXIT_FAIL


def cmd_density(args) -> int:
    net = read_net(args.input)
    center = net.center if args.center is None else _vector(args.center, net.dimension)
    ext = extend_leaves(net)
    try:
        prof = density_profile(ext, center, args.rmin, args.rmax, args.samples)
    except DensitySampleRejected as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    _emit(prof.csv(), args.output)
    agree, defined = prof.derivative_agreement()
    mono = prof.monotone_violation()
    form = prof.formula_residual()
    print(f"samples={prof.radii.size} rejected={len(prof.rejected)} monotone_violation={mono:.3e} "
          f"formula_residual={form:.3e} derivative_agree={agree}/{defined}", file=sys.stderr)
    for name, end in (("start", prof.start), ("end", prof.end)):
        print(f"{name}: r={end['radius']:.6g} lambda={end['lambda']:.12g} target={end['target']} "
              f"applicable={end['applicable']} residual={end['residual']:.3e}", file=sys.stderr)
    return EXIT_OK if mono <= INEQ_SLACK and form <= INEQ_SLACK else EXIT_FAIL


def cmd_cuts(args) -> int:
    net = read_net(args.input)
    v = _vector(args.dir, net.dimension, normalize=True)
    scan = cut_scan(net, v)
    rows = ["lambda_low,lambda_high,current,boundary_kind"]
    rows += [f"{fmt(lo)},{fmt(hi)},{fmt(c)},{kind}" for lo, hi, c, kind in scan.rows()]
    _emit("\n".join(rows) + "\n", args.output)
    res = max(scan.lemma_residual(), scan.interior_jump(), scan.excess())
    print(f"c_in={scan.c_in:.12g} max_cut={scan.currents.max():.12g} "
          f"interior_jump={scan.interior_jump():.3e} lemma_residual={scan.lemma_residual():.3e}",
          file=sys.stderr)
    return EXIT_OK if res <= INEQ_SLACK else EXIT_FAIL


def cmd_rects(args) -> int:
    net = read_net(args.input)
    if net.dimension != 2:
        raise UsageError("rects needs a planar net (dimension 2)")
    v = _vector(args.dir, 2, normalize=True)
    pack = rectangle_packing(net, v)
    _emit(pack.csv(), args.output)
    if args.svg:
        Path(args.svg).write_text(packing_svg(pack))
    print(f"area={pack.total_area:.12g} bound={pack.c_in * pack.spread:.12g} "
          f"slack={pack.slack:.3e}", file=sys.stderr)
    return EXIT_OK if pack.slack >= -INEQ_SLACK else EXIT_FAIL


def cmd_info(args) -> int:
    net = read_net(args.input)
    ok, rep = is_critical(net, args.tol)
    print(f"dimension={net.dimension} {_counts(net)}")
    if net.interior.size:
        r, c = outer_radius(net)
        print(f"outer_radius={fmt(r)} center={','.join(fmt(t) for t in c)}")
    print(f"critical={ok} max_residual={rep.max_norm:.3e} worst={rep.worst}")
    print(f"max_degree={int(net.degree[net.interior].max(initial=0))} "
          f"components={len(net.components())}")
    for key in sorted(net.meta):
        if key != "anchors":
            print(f"meta.{key}={net.meta[key]}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="critnet", description="Construct, relax and certify "
                                "length-critical nets in R^k.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a canonical net")
    gs = g.add_subparsers(dest="family", required=True)
    x = gs.add_parser("grid")
    x.add_argument("--d", type=int, required=True)
    x.add_argument("--n", type=int, required=True)
    x = gs.add_parser("hex")
    x.add_argument("--rows", type=int, required=True)
    x.add_argument("--cols", type=int, required=True)
    x = gs.add_parser("lines")
    x.add_argument("--line", action="append", help="px,py,dx,dy (repeat per line)")
    x.add_argument("--radius", type=float, required=True)
    x = gs.add_parser("exadiam")
    x.add_argument("--n", type=int, required=True)
    x.add_argument("--k", type=int, required=True)
    x = gs.add_parser("fixture")
    x.add_argument("--name", required=True, choices=generators.FIXTURES)
    for name, sp in gs.choices.items():
        sp.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("relax", help="relax interior vertices to a critical embedding")
    r.add_argument("input")
    r.add_argument("-o", "--output")
    r.add_argument("--trace", help="CSV of sweep, total_length, max_residual")
    r.add_argument("--tol", type=float, default=1e-10)
    r.add_argument("--max-sweeps", type=int, default=10000)
    r.add_argument("--damping", type=float, default=1.0)
    r.add_argument("--jitter", type=float, default=0.0,
                   help="seeded Gaussian jitter applied to interior vertices first")
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_relax)

    v = sub.add_parser("verify", help="run the check catalog")
    v.add_argument("input")
    v.add_argument("--checks", help="comma-separated subset of: " + ", ".join(CHECKS))
    v.add_argument("--directions", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=float, default=None, help="identity tolerance")
    v.add_argument("--perturb", action="store_true",
                   help="rotate directions that hit a perpendicular edge")
    v.add_argument("-o", "--output", help="JSON report")
    v.add_argument("--csv", help="summary CSV")
    v.add_argument("--details-csv", help="per-direction/basis CSV")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("density", help="sample the length density profile")
    d.add_argument("input")
    d.add_argument("--center", help="x,y[,z...] (use --center=-1,0 for negatives)")
    d.add_argument("--rmin", type=float, default=0.05)
    d.add_argument("--rmax", type=float, default=20.0)
    d.add_argument("--samples", type=int, default=200)
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_density)

    c = sub.add_parser("cuts", help="cut currents across hyperplanes normal to a direction")
    c.add_argument("input")
    c.add_argument("--dir", required=True)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_cuts)

    rr = sub.add_parser("rects", help="rectangle packing of the current (planar nets)")
    rr.add_argument("input")
    rr.add_argument("--dir", required=True)
    rr.add_argument("--svg")
    rr.add_argument("-o", "--output")
    rr.set_defaults(func=cmd_rects)

    i = sub.add_parser("info", help="summarise a net file")
    i.add_argument("input")
    i.add_argument("--tol", type=float, default=1e-10)
    i.set_defaults(func=cmd_info)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (NetError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
