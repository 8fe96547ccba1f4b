"""Command line interface.

Exit codes: 0 optimal, 2 infeasible (or least-violated), 3 time limit,
64 usage error, 65 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .bench import bench_run, load_suite
from .bnb import SolverConfig
from .bounds import (
    InfeasibleCertificate,
    integral_bounds,
    projected_upper_bound,
    shor_bounds,
    strengthened_bounds,
)
from .core import InstanceError, Status, to_plus_minus_one
from .formats import export_maxcut, read_instance, write_instance
from .instances import RgiSpec, build_k_cluster, gen_rgi, petersen_graph, random_cbqp, random_graph
from .maxcut import penalized_maxcut
from .penalty import cli_params, default_epsilon
from .pipeline import PIPELINE_BOUND_BUDGET, PenaltyMode, PipelineConfig, solve_bqp

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_TIME_LIMIT = 3
EXIT_USAGE = 64
EXIT_DATA = 65


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v) -> str:
    if v is None:
        return "-"
    v = float(v)
    return str(int(v)) if v == int(v) and abs(v) < 2**53 else f"{v:.10g}"


def cmd_solve(args) -> int:
    p = read_instance(args.file)
    solver = SolverConfig(time_limit=args.time_limit, seed=args.seed)
    cfg = PipelineConfig(penalty_mode=args.mode, epsilon=args.epsilon, solver=solver,
                         least_violation=args.least_violation, brute_force_crosscheck=args.crosscheck)
    out = solve_bqp(p, cfg)
    sol = out.solution
    obj = sol.objective
    if obj is not None and p.negate_display:
        obj = -obj
    info = {
        "status": sol.status.value,
        "objective": obj,
        "y": None if sol.x01 is None else [int(v) for v in sol.x01],
        "residual": sol.residual,
        "sigma": None if out.parameters_used is None else out.parameters_used.sigma,
        "rho": None if out.parameters_used is None else out.parameters_used.rho,
        "nodes": None if out.maxcut_report is None else out.maxcut_report.nodes,
        "events": out.timeline.get("events", []),
        "stages": out.timeline.get("stages", {}),
    }
    if args.json:
        print(json.dumps(info, indent=1))
    else:
        print(f"status     {info['status']}")
        if obj is not None:
            print(f"objective  {_fmt(obj)}")
            print("y          " + " ".join(str(v) for v in info["y"]))
        if sol.residual:
            print(f"residual   {_fmt(sol.residual)}")
        print(f"sigma      {_fmt(info['sigma'])}")
        print(f"rho        {_fmt(info['rho'])}")
        print(f"nodes      {_fmt(info['nodes'])}")
        if info["events"]:
            print("events     " + ", ".join(info["events"]))
    return {
        Status.OPTIMAL: EXIT_OK,
        Status.INFEASIBLE: EXIT_INFEASIBLE,
        Status.LEAST_VIOLATED: EXIT_INFEASIBLE,
        Status.TIME_LIMIT: EXIT_TIME_LIMIT,
    }[sol.status]


def cmd_transform(args) -> int:
    p = read_instance(args.file)
    pm = to_plus_minus_one(p)
    rho = None
    if args.sigma is not None:
        sigma = args.sigma
    elif pm.m == 0:
        sigma = 0.0
    else:
        bp = strengthened_bounds(pm, PIPELINE_BOUND_BUDGET)
        if pm.integral_objective:
            bp = integral_bounds(bp)
        eps = args.epsilon or default_epsilon(pm.integral_objective, bp.ell, bp.u)
        pp = cli_params(bp, eps)
        sigma, rho = pp.sigma, pp.rho
    g = penalized_maxcut(pm, sigma, rho)
    info = export_maxcut(g, args.out, scale_to_integer=args.scale_int)
    print(f"wrote {args.out}: {g.n_vertices} vertices, {len(g.edges())} edges, sigma {_fmt(sigma)}, "
          f"scale {info['scale']}")
    if info["warning"]:
        print(f"warning: {info['warning']}", file=sys.stderr)
    return EXIT_OK


def cmd_bounds(args) -> int:
    p = to_plus_minus_one(read_instance(args.file))
    t0 = time.perf_counter()
    shor = shor_bounds(p)
    t1 = time.perf_counter()
    strong = strengthened_bounds(p, PIPELINE_BOUND_BUDGET, shor)
    t2 = time.perf_counter()
    proj = projected_upper_bound(p, shor=shor) if p.m else None
    t3 = time.perf_counter()
    print(f"shor          ell {_fmt(shor.ell)}  u {_fmt(shor.u)}  ({t1 - t0:.3f}s)")
    print(f"strengthened  ell {_fmt(strong.ell)}  u {_fmt(strong.u)}  ({t2 - t1:.3f}s)")
    if proj is None:
        print("projected     no constraints")
    elif isinstance(proj, InfeasibleCertificate):
        print(f"projected     infeasible: {proj.reason}  ({t3 - t2:.3f}s)")
        return EXIT_INFEASIBLE
    else:
        print(f"projected     u {_fmt(proj.u)}  ({t3 - t2:.3f}s)")
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.kind == "rgi":
        spec = RgiSpec(args.family, args.n, args.m, tuple(args.a_interval), tuple(args.f_interval), args.bv, args.seed)
        p = gen_rgi(spec)
    elif args.kind == "kcluster":
        adj = petersen_graph() if args.petersen else random_graph(args.n, args.density, args.seed)
        p = build_k_cluster(adj, args.k)
    else:
        p = random_cbqp(args.n, args.k, args.seed)
    write_instance(p, args.out)
    print(f"wrote {args.out}: n {p.n}, m {p.m}")
    return EXIT_OK


def cmd_bench(args) -> int:
    suite = load_suite(args.suite)
    out = Path(args.out) if args.out else Path(args.suite).with_suffix("")
    records = bench_run(suite, out_dir=out, workers=args.workers)
    errors = sum(r.status == "Error" for r in records)
    print(f"{len(records)} runs, {errors} errors; results in {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="bqpcut", description="Exact binary quadratic programming via max-cut.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("file")
    s.add_argument("--mode", choices=[m.value for m in PenaltyMode], default="auto")
    s.add_argument("--epsilon", type=float)
    s.add_argument("--time-limit", type=float, default=600.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--least-violation", action="store_true")
    s.add_argument("--crosscheck", action="store_true", help="compare with enumeration (small n)")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_solve)

    t = sub.add_parser("transform", help="write the penalized max-cut graph")
    t.add_argument("file")
    t.add_argument("--out", required=True)
    t.add_argument("--scale-int", action="store_true")
    t.add_argument("--sigma", type=float)
    t.add_argument("--epsilon", type=float)
    t.set_defaults(func=cmd_transform)

    b = sub.add_parser("bounds", help="print the SDP bounds")
    b.add_argument("file")
    b.set_defaults(func=cmd_bounds)

    g = sub.add_parser("generate", help="generate an instance")
    g.add_argument("kind", choices=["rgi", "kcluster", "cbqp"])
    g.add_argument("--out", required=True)
    g.add_argument("--n", type=int, default=10)
    g.add_argument("--m", type=int, default=1)
    g.add_argument("--family", choices=["One", "Two"], default="One")
    g.add_argument("--a-interval", type=int, nargs=2, default=[-1, 1])
    g.add_argument("--f-interval", type=int, nargs=2, default=[-1, 1])
    g.add_argument("--bv", type=int, default=0)
    g.add_argument("--k", type=int)
    g.add_argument("--density", type=float, default=0.5)
    g.add_argument("--petersen", action="store_true")
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("bench", help="run a benchmark suite")
    r.add_argument("suite")
    r.add_argument("--out")
    r.add_argument("--workers", type=int)
    r.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "generate" and args.kind == "kcluster" and args.k is None:
        ap.error("kcluster needs --k")
    try:
        return args.func(args)
    except (InstanceError, OSError, ValueError, KeyError) as exc:
        # InstanceError and JSON decode errors are ValueErrors as well
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
