"""Graphic solver: skeleton candidates, component DP, LP points and rounding."""
from __future__ import annotations

import logging
from collections import Counter
from fractions import Fraction
from typing import List, Optional

from .clustering import partition_dp, prune_and_split
from .flow import FlowNetwork
from .model import GraphInstance, Solution
from .relaxation import EPS_FEAS, FeasibilityCache, build_lp, scale_service
from .rounding import assemble, round_component
from .skeleton import cap_truncate, skeleton_candidates

log = logging.getLogger(__name__)

VARIANTS = ("hard", "uniform", "uniform-soft")


def service_upper_bound(g: GraphInstance, copies: int = 1) -> int:
    """Clients servable at distance 1 with every facility open ``copies`` times."""
    net = FlowNetwork()
    src, snk = ("src",), ("snk",)
    net.node(src)
    for u in g.facilities:
        net.add_arc(src, ("f", u), g.capacities[u] * copies)
    for v, u in sorted(g.edges):
        net.add_arc(("f", u), ("c", v), 1)
    for v in g.clients:
        net.add_arc(("c", v), snk, 1)
    net.node(snk)
    return net.max_flow(src, snk)[0]


def distance_one_possible(g: GraphInstance, k: int, p: int, soft: bool) -> bool:
    """Necessary conditions for a distance-1 solution; cheap flow and counting checks."""
    if soft:
        return service_upper_bound(g, copies=k) >= p
    if k > len(g.facilities):
        return False
    top = sorted(g.capacities.values(), reverse=True)[:k]
    return sum(top) >= p and service_upper_bound(g) >= p


def solve_graphic(
    g: GraphInstance,
    variant: str = "hard",
    *,
    exact_lp: bool = False,
    trace: Optional[list] = None,
    report: Optional[dict] = None,
    cache: Optional[FeasibilityCache] = None,
    lp_dumps: Optional[list] = None,
    collect: Optional[list] = None,
) -> Optional[Solution]:
    """Find a distance-25 (23, 13 for the uniform variants) solution of ``g`` or ``None``.

    Success is guaranteed whenever ``g`` has a distance-1 solution.  Uses
    ``g.k`` and ``g.p``.  Capacities are clamped to degrees; the uniform
    variants keep the original capacities for the LP and the rounding, which
    leaves the LP unchanged because x <= y already bounds a facility's load by
    its degree.  ``lp_dumps`` collects a text listing of each component LP
    behind the returned solution and ``collect`` the per-component results.
    """
    if variant not in VARIANTS:
        raise ValueError(f"graphic solver has no variant {variant!r}")
    soft = variant == "uniform-soft"
    report = report if report is not None else {}
    k, p = g.k, g.p
    clamped = cap_truncate(g)
    work = g if variant in ("uniform", "uniform-soft") else clamped

    if k == 0:
        return Solution({}, Counter(), 0) if p == 0 else None
    if not distance_one_possible(clamped, k, p, soft):
        report["skipped"] = "no distance-1 solution possible"
        return None

    cache = cache or FeasibilityCache()
    tried: List[dict] = []
    report["skeletons"] = tried
    for S in skeleton_candidates(clamped, k):
        comps = prune_and_split(work, S)
        entry = {"skeleton": list(S), "components": len(comps)}
        tried.append(entry)

        def service(i, ki):
            c = comps[i]
            return cache.max_service(c.key, c.graph, c.skeleton, ki, y_upper=not soft, exact=exact_lp)

        def feas(i, ki, pi):
            out = service(i, ki)
            if out is None:
                return False
            best = out[0]
            return best >= pi if exact_lp else best >= pi - EPS_FEAS

        parts = partition_dp(comps, k, p, feas, soft=soft)
        entry["partition"] = parts
        entry["lp_solves"] = cache.solves
        if trace is not None:
            trace.append({"event": "skeleton", "skeleton": list(S), "components": len(comps), "partition": parts})
        if parts is None:
            continue
        solved = []
        for i, (ki, pi) in enumerate(parts):
            _, point = service(i, ki)
            target = Fraction(pi) if exact_lp else pi
            comp = comps[i]
            if lp_dumps is not None:
                model = build_lp(comp.graph, comp.skeleton, ki, pi, y_upper=not soft)
                lp_dumps.append(f"# component {i}, skeleton {list(comp.skeleton)}, k={ki}, p={pi}\n" + model.dump())
            part = round_component(comp.graph, comp.skeleton, ki, pi, scale_service(point, target), variant, trace)
            solved.append(part)
        entry["tree_stages"] = [part.stage for part in solved]
        entry["chains"] = [[(s.name, s.bound) for s in part.chain] for part in solved]
        sol = assemble(solved)
        if collect is not None:
            collect.extend(solved)
        if sum(sol.open.values()) != k or len(sol.assign) != p:
            raise AssertionError("assembled solution has wrong totals")
        return sol
    return None
