"""Ascending threshold scan that reduces a metric instance to graphic ones."""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .model import GraphInstance, MetricInstance, Solution, verify_solution
from .skeleton import cap_truncate

log = logging.getLogger(__name__)

FACTORS = {"hard": 25, "soft": 25, "uniform": 23, "uniform-soft": 13}


def candidate_thresholds(inst: MetricInstance) -> List[float]:
    """Distinct finite client-facility distances, ascending."""
    if not inst.clients or not inst.facilities:
        return []
    d = inst.client_facility_matrix().ravel()
    d = d[np.isfinite(d)]
    return [float(t) for t in np.unique(d)]


def graph_at_threshold(inst: MetricInstance, tau: float, truncate: bool = True) -> GraphInstance:
    """Bipartite graph with an edge wherever d(client, facility) <= tau."""
    d = inst.client_facility_matrix()
    rows, cols = np.nonzero(d <= tau)
    edges = frozenset((inst.clients[i], inst.facilities[j]) for i, j in zip(rows, cols))
    g = GraphInstance(inst.clients, dict(inst.capacities), edges, inst.k, inst.p)
    return cap_truncate(g) if truncate else g


def infer_variant(inst: MetricInstance) -> str:
    if inst.soft:
        return "uniform-soft" if inst.uniform else "soft"
    return "uniform" if inst.uniform else "hard"


@dataclass
class SolveResult:
    solution: Solution
    threshold: float
    variant: str
    factor: int
    report: dict = field(default_factory=dict)


def solve_metric(
    inst: MetricInstance,
    variant: Optional[str] = None,
    *,
    exact_lp: bool = False,
    trace: Optional[list] = None,
    lp_dumps: Optional[list] = None,
    collect: Optional[list] = None,
) -> Optional[SolveResult]:
    """Run the approximation pipeline; ``None`` means no feasible solution exists.

    The returned radius is at most ``factor * tau`` where ``tau`` is the first
    threshold at which the graphic solver succeeds, and ``tau <= OPT``.
    """
    from . import variants
    from .pipeline import solve_graphic

    variant = variant or infer_variant(inst)
    if variant not in FACTORS:
        raise ValueError(f"unknown variant {variant!r}")
    if inst.mode == "center":
        inst = variants.center_to_supplier(inst)
    if variant == "soft":
        return variants.soft_solve(inst, exact_lp=exact_lp, trace=trace, lp_dumps=lp_dumps, collect=collect)
    if variant in ("uniform", "uniform-soft") and not inst.uniform:
        raise ValueError(f"variant {variant} needs uniform capacities")
    soft = variant == "uniform-soft"
    factor = FACTORS[variant]
    report = {"variant": variant, "thresholds": []}

    handled, sol = _degenerate(inst, soft)
    if handled:
        return SolveResult(sol, 0.0, variant, factor, report) if sol else None
    if inst.p > len(inst.clients) or (not soft and inst.k > len(inst.facilities)):
        return None

    for tau in candidate_thresholds(inst):
        g = graph_at_threshold(inst, tau, truncate=False)
        entry = {"tau": tau}
        report["thresholds"].append(entry)
        if trace is not None:
            trace.append({"event": "threshold", "tau": tau})
        out = solve_graphic(g, variant, exact_lp=exact_lp, trace=trace, report=entry, lp_dumps=lp_dumps, collect=collect)
        if out is None:
            continue
        radius = max((inst.dist(v, u) for v, u in out.assign.items()), default=0.0)
        sol = Solution(dict(out.assign), Counter(out.open), radius)
        problems = verify_solution(inst, sol, factor * tau, soft=soft)
        if problems:
            raise AssertionError(f"pipeline emitted an invalid solution at tau={tau}: {problems}")
        report["radius"] = radius
        return SolveResult(sol, tau, variant, factor, report)
    return None


def _degenerate(inst: MetricInstance, soft: bool):
    """Settle k=0 or p=0 directly.  Returns (handled, solution-or-None)."""
    if inst.k == 0:
        return True, (Solution({}, Counter(), 0.0) if inst.p == 0 else None)
    if inst.p == 0:
        ranked = sorted(inst.facilities, key=lambda u: (-inst.capacities[u], u))
        if not ranked or (not soft and inst.k > len(ranked)):
            return True, None
        opened = Counter({ranked[0]: inst.k}) if soft else Counter(ranked[: inst.k])
        return True, Solution({}, opened, 0.0)
    return False, None
