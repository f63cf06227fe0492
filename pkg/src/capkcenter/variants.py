"""Soft and uniform capacities, and moving between the supplier and center forms."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from .flow import FlowNetwork
from .model import MetricInstance, Solution, verify_solution
from .transfer import Key, RoundingTree, TransferError, verify_transfer


@dataclass
class ReductionWitness:
    """How ids of a transformed instance map back to the original one."""

    kind: str
    back: Dict[str, str] = field(default_factory=dict)  # transformed id -> original id
    params: Dict[str, int] = field(default_factory=dict)

    def original(self, a: str) -> str:
        return self.back.get(a, a)


def _fresh(base: str, tag: str, i: int, taken: set) -> str:
    name = f"{base}{tag}{i}"
    while name in taken:
        name += "_"
    taken.add(name)
    return name


def soft_to_hard(inst: MetricInstance, copies: Optional[int] = None) -> Tuple[MetricInstance, ReductionWitness]:
    """Replace every facility by ``copies`` co-located hard copies (default: one per client).

    Any soft solution opens a facility at most k times, so ``copies=k`` keeps
    every soft solution representable as well.
    """
    if not inst.soft:
        raise ValueError("soft_to_hard needs a soft-capacity instance")
    n = len(inst.clients) if copies is None else copies
    taken = set(inst.points)
    back: Dict[str, str] = {}
    rows: List[int] = list(range(len(inst.points)))
    points = list(inst.points)
    caps: Dict[str, int] = {}
    for u in inst.facilities:
        for i in range(n):
            c = _fresh(u, "#", i, taken)
            back[c] = u
            caps[c] = inst.capacities[u]
            points.append(c)
            rows.append(inst.index[u])
    m = inst.matrix[np.ix_(rows, rows)]
    out = MetricInstance(inst.clients, caps, tuple(points), m, inst.k, inst.p, mode="supplier", capacity_mode="hard")
    return out, ReductionWitness("soft-to-hard", back, {"copies": n})


def pull_back_copies(sol: Solution, witness: ReductionWitness) -> Solution:
    opened: Counter = Counter()
    for u, m in sol.open.items():
        opened[witness.original(u)] += m
    assign = {v: witness.original(u) for v, u in sol.assign.items()}
    return Solution(assign, opened, sol.radius)


def soft_solve(inst: MetricInstance, *, exact_lp: bool = False, trace: Optional[list] = None, copies: Optional[int] = None, lp_dumps: Optional[list] = None, collect: Optional[list] = None):
    """Soft capacities through the hard pipeline on the copied instance."""
    from .thresholding import FACTORS, SolveResult, solve_metric

    hard, witness = soft_to_hard(inst, copies=inst.k if copies is None else copies)
    res = solve_metric(hard, "hard", exact_lp=exact_lp, trace=trace, lp_dumps=lp_dumps, collect=collect)
    if res is None:
        return None
    sol = pull_back_copies(res.solution, witness)
    problems = verify_solution(inst, sol, FACTORS["soft"] * res.threshold, soft=True)
    if problems:
        raise AssertionError(f"pulled-back soft solution is invalid: {problems}")
    report = dict(res.report, variant="soft", copies=witness.params["copies"])
    return SolveResult(sol, res.threshold, "soft", FACTORS["soft"], report)


def uniform_soft_tree_transfer(rt: RoundingTree, y: Mapping[Key, Fraction]) -> Dict[Key, Fraction]:
    """Push fractional parts toward the root: y''_v = floor(Y_v) - sum over children of floor(Y_u).

    Y_v is the mass in the subtree of v.  Each node keeps the integer part of
    its subtree and passes the remainder (less than 1) to its parent, so the
    result is an integral distance-1 transfer on the tree.
    """
    if len(set(rt.capacity[a] for a in rt.nodes)) > 1:
        raise ValueError("push rounding needs uniform capacities")
    vals = {a: Fraction(y.get(a, 0)) for a in rt.nodes}
    if sum(vals.values()).denominator != 1:
        raise TransferError("total mass is not integral")
    if any(vals[rt.hub[s]] < 1 for s in rt.skeleton):
        raise TransferError("a hub holds less than one unit")
    if rt.root not in rt.hub.values():
        raise TransferError("tree must be rooted at a skeleton vertex")
    subtree: Dict[Key, Fraction] = {}
    for a in rt.postorder():
        subtree[a] = vals[a] + sum((subtree[b] for b in rt.children[a]), Fraction(0))
    out: Dict[Key, Fraction] = {}
    for a in rt.nodes:
        v = Fraction(int(subtree[a]) - sum(int(subtree[b]) for b in rt.children[a]))
        # what a sends up is its own fractional remainder; it never exceeds what a holds
        delta = subtree[a] - int(subtree[a])
        if v < 0 or delta > vals[a]:
            raise TransferError(f"push out of range at {a}")
        out[a] = v
    if not verify_transfer(rt.tdist, rt.capacity, vals, out, 1):
        raise TransferError("push result is not a distance-1 transfer")
    return out


def _require_uniform(inst: MetricInstance) -> None:
    if not inst.uniform:
        raise ValueError("instance capacities are not uniform")


def uniform_solve(inst: MetricInstance, **kw):
    """Hard uniform capacities; radius within 23 times the optimum."""
    from .thresholding import solve_metric

    _require_uniform(inst)
    if inst.soft:
        raise ValueError("uniform_solve handles hard capacities")
    return solve_metric(inst, "uniform", **kw)


def uniform_soft_solve(inst: MetricInstance, **kw):
    """Soft uniform capacities; radius within 13 times the optimum."""
    from .thresholding import solve_metric

    _require_uniform(inst)
    if not inst.soft:
        raise ValueError("uniform_soft_solve handles soft capacities")
    return solve_metric(inst, "uniform-soft", **kw)


def supplier_to_center(inst: MetricInstance) -> Tuple[MetricInstance, ReductionWitness]:
    """Center instance with N = |F| + 1 zero-capacity copies of every client.

    Copies sit at the client's distances to facilities; every other distance is
    the shortest-path closure of those values.  Facilities get N times their
    capacity and p grows by the factor N.
    """
    if inst.mode != "supplier":
        raise ValueError("supplier_to_center needs a supplier instance")
    F = inst.facilities
    N = len(F) + 1
    taken = set(inst.points)
    back: Dict[str, str] = {}
    copies: List[Tuple[str, str]] = []
    for v in inst.clients:
        for i in range(1, N + 1):
            c = _fresh(v, "@", i, taken)
            back[c] = v
            copies.append((c, v))
    points = tuple(c for c, _ in copies) + tuple(F)
    idx = {a: i for i, a in enumerate(points)}
    w = np.full((len(points), len(points)), np.inf)
    np.fill_diagonal(w, 0.0)
    for c, v in copies:
        for u in F:
            d = inst.dist(v, u)
            w[idx[c], idx[u]] = w[idx[u], idx[c]] = d
    m = _closure(w)
    caps = {c: 0 for c, _ in copies}
    caps.update({u: N * inst.capacities[u] for u in F})
    out = MetricInstance(points, caps, points, m, inst.k, inst.p * N, mode="center", capacity_mode=inst.capacity_mode)
    return out, ReductionWitness("supplier-to-center", back, {"N": N})


def _closure(w: np.ndarray) -> np.ndarray:
    """All-pairs shortest paths over the explicitly given values (inf = not given)."""
    d = w.copy()
    for k in range(len(d)):
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
    return d


def center_solution_to_supplier(
    original: MetricInstance, sol: Solution, witness: ReductionWitness, radius: float
) -> Optional[Solution]:
    """Recover a supplier solution from a center solution of the copied instance.

    Opened client copies carry no capacity; they are swapped for unused
    facilities.  Clients are then matched to the opened facilities within
    ``radius`` by max-flow, which succeeds whenever the center solution is
    valid at that radius.
    """
    F = original.facilities
    opened: Counter = Counter()
    for u, m in sol.open.items():
        if u in original.capacities and u not in witness.back:
            opened[u] += m
    ranked = sorted(F, key=lambda u: (-original.capacities[u], u))
    missing = original.k - sum(opened.values())
    if original.soft and missing > 0 and ranked:
        opened[ranked[0]] += missing
    else:
        for u in ranked:
            if missing <= 0:
                break
            if u not in opened:
                opened[u] = 1
                missing -= 1
    if sum(opened.values()) != original.k:
        return None
    net = FlowNetwork()
    src, top, snk = ("src",), ("top",), ("snk",)
    net.add_arc(src, top, original.p)
    arcs = []
    for u in sorted(opened):
        net.add_arc(top, ("f", u), original.capacities[u] * opened[u])
        for v in original.clients:
            if original.dist(v, u) <= radius:
                arcs.append((net.add_arc(("f", u), ("c", v), 1), v, u))
    for v in original.clients:
        net.add_arc(("c", v), snk, 1)
    net.node(snk)
    value, flows = net.max_flow(src, snk)
    if value < original.p:
        return None
    assign = {v: u for a, v, u in arcs if flows[a]}
    r = max((original.dist(v, u) for v, u in assign.items()), default=0.0)
    return Solution(assign, opened, r)


def center_to_supplier(inst: MetricInstance) -> MetricInstance:
    """Same points as both clients and facilities, same metric and capacities."""
    if inst.mode != "center":
        raise ValueError("center_to_supplier needs a center instance")
    return MetricInstance(
        tuple(inst.points), {a: inst.capacities.get(a, 0) for a in inst.points}, inst.points, inst.matrix, inst.k, inst.p,
        mode="supplier", capacity_mode=inst.capacity_mode,
    )


def solve_via_center(inst: MetricInstance, variant: Optional[str] = None, **kw):
    """Solve a supplier instance through its center image and map the answer back."""
    from .thresholding import SolveResult, solve_metric

    image, witness = supplier_to_center(inst)
    # client copies carry no capacity, so the image is never uniform
    general = {"uniform": "hard", "uniform-soft": "soft"}
    variant = general.get(variant, variant) if variant else ("soft" if inst.soft else "hard")
    res = solve_metric(image, variant, **kw)
    if res is None:
        return None
    sol = center_solution_to_supplier(inst, res.solution, witness, res.solution.radius)
    if sol is None:
        raise AssertionError("center solution could not be mapped back")
    problems = verify_solution(inst, sol, res.solution.radius, soft=inst.soft)
    if problems:
        raise AssertionError(f"mapped-back solution is invalid: {problems}")
    report = dict(res.report, reduction="supplier-to-center", N=witness.params["N"])
    return SolveResult(sol, res.threshold, res.variant, res.factor, report)
