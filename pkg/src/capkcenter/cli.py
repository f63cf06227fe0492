"""Command line: solve, verify, oracle, gen and bench.

Exit codes: 0 success, 1 error or failed check, 2 no feasible solution.
"""
from __future__ import annotations

import argparse
import json
import logging
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

from .formats import (
    InstanceFormatError,
    as_metric,
    instance_to_json,
    load_instance,
    load_solution,
    parse_instance,
    write_json,
)
from .generators import gen_gap, gen_random
from .model import GraphInstance, validate_metric, verify_solution
from .oracle import DEFAULT_BUDGET, OracleBudgetError, exact_opt, feasible_at
from .thresholding import FACTORS, infer_variant, solve_metric

log = logging.getLogger("capkcenter")

EXIT_OK, EXIT_ERROR, EXIT_NO = 0, 1, 2


def _emit_trace(events: List[dict], target: Optional[str]) -> None:
    if target is None:
        return
    lines = "".join(json.dumps(e, default=str) + "\n" for e in events)
    if target == "-":
        sys.stderr.write(lines)
    else:
        Path(target).write_text(lines)


def _load_metric(path: str):
    inst = as_metric(load_instance(path))
    problems = validate_metric(inst)
    if problems:
        raise InstanceFormatError("; ".join(problems[:10]))
    return inst


def cmd_solve(args) -> int:
    from .variants import solve_via_center

    inst = _load_metric(args.input)
    variant = args.variant or infer_variant(inst)
    trace: Optional[list] = [] if args.trace is not None else None
    dumps: Optional[list] = [] if args.dump_lp else None
    t0 = time.perf_counter()
    if args.mode == "center" and inst.mode == "supplier":
        res = solve_via_center(inst, variant, exact_lp=args.exact_lp, trace=trace, lp_dumps=dumps)
    else:
        res = solve_metric(inst, variant, exact_lp=args.exact_lp, trace=trace, lp_dumps=dumps)
    elapsed = time.perf_counter() - t0
    if trace is not None:
        _emit_trace(trace, args.trace)
    if dumps is not None:
        Path(args.dump_lp).write_text("\n\n".join(dumps) + "\n")

    report = {"input": args.input, "variant": variant, "mode": args.mode or inst.mode, "seconds": round(elapsed, 4)}
    if res is None:
        report["result"] = "NO"
        if args.report:
            write_json(report, args.report)
        print("NO: no feasible solution at any threshold", file=sys.stderr if args.output is None else sys.stdout)
        return EXIT_NO
    sol = res.solution
    problems = verify_solution(inst, sol, res.factor * res.threshold)
    if problems:
        print("internal error: solution failed verification: " + "; ".join(problems), file=sys.stderr)
        return EXIT_ERROR
    variant = res.variant  # the center route may fall back to the general variant
    report.update(
        variant=variant,
        result="OK",
        threshold=res.threshold,
        factor=res.factor,
        radius=sol.radius,
        verified=True,
        thresholds=res.report.get("thresholds", []),
    )
    if args.check_oracle:
        try:
            opt = exact_opt(inst, budget=args.budget).opt
            report["oracle"] = {"opt": opt, "ratio": (sol.radius / opt) if opt else (0.0 if sol.radius == 0 else None)}
        except OracleBudgetError as exc:
            report["oracle"] = {"unchecked": str(exc)}
    if args.report:
        write_json(report, args.report)
    summary = (
        f"variant={variant} threshold={res.threshold:g} radius={sol.radius:g} "
        f"(bound {res.factor}x{res.threshold:g}={res.factor * res.threshold:g}) "
        f"open={sum(sol.open.values())} served={len(sol.assign)}"
    )
    if args.output is None:
        print(summary, file=sys.stderr)
        print(write_json(sol.to_json(), None))
    else:
        write_json(sol.to_json(), args.output)
        print(summary)
    return EXIT_OK


def cmd_verify(args) -> int:
    raw = load_instance(args.instance)
    sol = load_solution(args.solution)
    radius = args.radius if args.radius is not None else sol.radius
    problems = verify_solution(raw, sol, radius)
    if not isinstance(raw, GraphInstance):
        problems = validate_metric(raw) + problems
    if problems:
        for p in problems:
            print(f"VIOLATION: {p}")
        return EXIT_ERROR
    print(f"valid at radius {radius:g}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = _load_metric(args.input)
    try:
        if args.radius is not None:
            ok, checked = feasible_at(inst, args.radius, budget=args.budget)
            verdict = "feasible" if ok else "infeasible"
            print(json.dumps({"radius": args.radius, "feasible": ok, "sets_checked": checked}))
            print(f"{verdict} at radius {args.radius:g}", file=sys.stderr)
            return EXIT_OK if ok else EXIT_NO
        res = exact_opt(inst, budget=args.budget)
    except OracleBudgetError as exc:
        print(json.dumps({"unchecked": str(exc)}))
        return EXIT_ERROR
    out = {"opt": res.opt, "flows": res.flows, "witness": res.witness.to_json() if res.witness else None}
    print(json.dumps(out))
    return EXIT_OK if res.feasible else EXIT_NO


def cmd_gen(args) -> int:
    if args.kind == "gap":
        g, S = gen_gap(args.r)
        doc = instance_to_json(g)
        doc["suggested_skeleton"] = list(S)
    else:
        inst = gen_random(
            args.clients,
            args.facilities,
            args.k,
            args.p,
            (args.cap_min, args.cap_max),
            args.model,
            args.seed,
            grid=args.grid,
            density=args.density,
            uniform=args.uniform,
            capacity_mode="soft" if args.soft else "hard",
            mode="center" if args.center else "supplier",
        )
        doc = instance_to_json(inst)
    text = write_json(doc, args.output)
    if args.output is None:
        print(text)
    return EXIT_OK


def _bench_row(job) -> dict:
    name, doc, variant, budget = job
    inst = as_metric(parse_instance(doc))
    v = variant or infer_variant(inst)
    t0 = time.perf_counter()
    res = solve_metric(inst, v)
    elapsed = time.perf_counter() - t0
    row = {"instance": name, "variant": v, "radius": None if res is None else res.solution.radius, "seconds": round(elapsed, 4)}
    try:
        opt = exact_opt(inst, budget=budget).opt
        row["opt"] = opt
        if opt is None:
            row["ratio"] = None
            row["ok"] = res is None
        elif res is None:
            row["ratio"] = None
            row["ok"] = False
        else:
            row["ratio"] = res.solution.radius / opt if opt else (0.0 if res.solution.radius == 0 else float("inf"))
            row["ok"] = row["ratio"] <= FACTORS[v]
    except OracleBudgetError:
        row["opt"] = "unchecked"
        row["ratio"] = None
        row["ok"] = True
    return row


def cmd_bench(args) -> int:
    jobs = []
    if args.dir:
        for path in sorted(Path(args.dir).glob("*.json")):
            jobs.append((path.name, json.loads(path.read_text()), args.variant, args.budget))
    else:
        for i in range(args.count):
            seed = args.seed + i
            rng = random.Random(seed)
            nF = rng.randint(1, 8)
            nC = rng.randint(1, 20)
            k = rng.randint(1, min(4, nF))
            p = rng.randint(0, nC)
            uniform = args.variant in ("uniform", "uniform-soft")
            soft = args.variant in ("soft", "uniform-soft")
            inst = gen_random(nC, nF, k, p, (0, 6), "metric", seed, uniform=uniform, capacity_mode="soft" if soft else "hard")
            jobs.append((f"random-{seed}", instance_to_json(inst), args.variant, args.budget))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_bench_row, jobs))
    else:
        rows = [_bench_row(j) for j in jobs]
    header = f"{'instance':<20} {'opt':>10} {'radius':>10} {'ratio':>8} {'seconds':>8}"
    print(header)
    for r in rows:
        opt = r["opt"] if isinstance(r["opt"], str) else ("-" if r["opt"] is None else f"{r['opt']:g}")
        rad = "NO" if r["radius"] is None else f"{r['radius']:g}"
        ratio = "-" if r["ratio"] is None else f"{r['ratio']:.3f}"
        flag = "" if r["ok"] else "  VIOLATION"
        print(f"{r['instance']:<20} {opt:>10} {rad:>10} {ratio:>8} {r['seconds']:>8.3f}{flag}")
    if args.report:
        write_json(rows, args.report)
    return EXIT_OK if all(r["ok"] for r in rows) else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="capkcenter", description="Capacitated k-supplier / k-center with outliers")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    sub = parser.add_subparsers(dest="command", required=True)

    variants = sorted(FACTORS)
    s = sub.add_parser("solve", help="run the approximation pipeline")
    s.add_argument("--input", required=True)
    s.add_argument("--variant", choices=variants, help="default: inferred from the instance")
    s.add_argument("--mode", choices=["supplier", "center"], help="center on a supplier file solves through the center image")
    s.add_argument("--output", help="solution JSON file (default: stdout)")
    s.add_argument("--report", help="run report JSON file")
    s.add_argument("--trace", nargs="?", const="-", help="JSON-lines trace to FILE (stderr without a value)")
    s.add_argument("--exact-lp", action="store_true", help="solve LPs over exact rationals")
    s.add_argument("--dump-lp", metavar="FILE", help="write the component LPs behind the solution")
    s.add_argument("--check-oracle", action="store_true", help="compare against the exact optimum")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a solution against an instance")
    v.add_argument("--instance", required=True)
    v.add_argument("--solution", required=True)
    v.add_argument("--radius", type=float, help="radius bound (default: the solution's own)")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="exact optimum by enumeration")
    o.add_argument("--input", required=True)
    o.add_argument("--radius", type=float, help="only decide feasibility at this radius")
    o.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    o.set_defaults(func=cmd_oracle)

    g = sub.add_parser("gen", help="generate instances")
    gsub = g.add_subparsers(dest="kind", required=True)
    gap = gsub.add_parser("gap", help="LP-gap family")
    gap.add_argument("--r", type=int, default=2)
    gap.add_argument("--output")
    rnd = gsub.add_parser("random", help="seeded random instance")
    rnd.add_argument("--seed", type=int, default=0)
    rnd.add_argument("--clients", type=int, default=10)
    rnd.add_argument("--facilities", type=int, default=5)
    rnd.add_argument("-k", type=int, default=2)
    rnd.add_argument("-p", type=int, default=5)
    rnd.add_argument("--cap-min", type=int, default=0)
    rnd.add_argument("--cap-max", type=int, default=5)
    rnd.add_argument("--model", choices=["metric", "graph"], default="metric")
    rnd.add_argument("--grid", type=int, default=20)
    rnd.add_argument("--density", type=float, default=0.25)
    rnd.add_argument("--uniform", action="store_true")
    rnd.add_argument("--soft", action="store_true")
    rnd.add_argument("--center", action="store_true")
    rnd.add_argument("--output")
    for p in (gap, rnd):
        p.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="compare pipeline radii with the exact optimum")
    b.add_argument("--dir", help="directory of instance JSON files (default: seeded random instances)")
    b.add_argument("--count", type=int, default=50)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--variant", choices=variants)
    b.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--report")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InstanceFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # surfaced as exit 1, never as a fake NO
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
