"""Exact optimum by enumerating opened facility sets, for verification only."""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from .flow import FlowNetwork
from .model import MetricInstance, Solution, verify_solution
from .thresholding import candidate_thresholds

DEFAULT_BUDGET = 10**6


class OracleBudgetError(RuntimeError):
    """Enumeration would exceed the allowed number of flow computations."""


@dataclass
class OracleResult:
    opt: Optional[float]  # None when no solution exists
    witness: Optional[Solution]
    flows: int = 0
    subsets: int = 0

    @property
    def feasible(self) -> bool:
        return self.opt is not None


def max_served(
    inst: MetricInstance, opened: Mapping[str, int], r: float
) -> Tuple[int, Dict[str, str]]:
    """Most clients servable within ``r`` by the opened multiset, with an assignment."""
    net = FlowNetwork()
    src, snk = ("src",), ("snk",)
    net.node(src)
    arcs = []
    for u in sorted(opened):
        if not opened[u]:
            continue
        net.add_arc(src, ("f", u), inst.capacities[u] * opened[u])
        for v in inst.clients:
            if inst.dist(v, u) <= r:
                arcs.append((net.add_arc(("f", u), ("c", v), 1), v, u))
    for v in inst.clients:
        net.add_arc(("c", v), snk, 1)
    net.node(snk)
    value, flows = net.max_flow(src, snk)
    return value, {v: u for a, v, u in arcs if flows[a]}


def opening_sets(inst: MetricInstance, soft: bool) -> Tuple[List[str], int, int]:
    """Candidates, how many to pick, and how many zero-capacity fillers pad each pick.

    Zero-capacity facilities never serve anyone, so only positive-capacity
    facilities are enumerated; hard instances pad with zero-capacity ones.
    """
    useful = [u for u in inst.facilities if inst.capacities[u] > 0]
    if soft:
        return useful, inst.k, 0
    m = min(inst.k, len(useful))
    return useful, m, inst.k - m


def count_opening_sets(inst: MetricInstance, soft: bool = False) -> int:
    useful, m, _ = opening_sets(inst, soft)
    if soft:
        return math.comb(len(useful) + m - 1, m) if useful else int(m == 0)
    return math.comb(len(useful), m)


def exact_opt(inst: MetricInstance, soft: Optional[bool] = None, budget: int = DEFAULT_BUDGET) -> OracleResult:
    """Smallest threshold at which some k opened facilities serve p clients.

    Each opening set gets the smallest feasible threshold by binary search
    below the best found so far, so only strict improvements are searched.
    Witness ties go to the lexicographically first opening set.
    """
    if inst.mode == "center":
        from .variants import center_to_supplier

        inst = center_to_supplier(inst)
    soft = inst.soft if soft is None else soft
    if inst.k == 0:
        return OracleResult(0.0 if inst.p == 0 else None, Solution({}, Counter(), 0.0) if inst.p == 0 else None)
    if not soft and inst.k > len(inst.facilities):
        return OracleResult(None, None)
    if inst.p > len(inst.clients):
        return OracleResult(None, None)
    useful, m, pad = opening_sets(inst, soft)
    zero = [u for u in inst.facilities if inst.capacities[u] == 0][:pad]
    if inst.p == 0:
        if soft:
            ranked = sorted(inst.facilities, key=lambda u: (-inst.capacities[u], u))
            return OracleResult(0.0, Solution({}, Counter({ranked[0]: inst.k}), 0.0)) if ranked else OracleResult(None, None)
        return OracleResult(0.0, Solution({}, Counter(useful[:m] + zero), 0.0))
    if not useful:
        return OracleResult(None, None)

    n_sets = count_opening_sets(inst, soft)
    if n_sets > budget:
        raise OracleBudgetError(f"{n_sets} opening sets exceed the budget of {budget} flows")
    T = candidate_thresholds(inst)
    picks: Iterable = (
        itertools.combinations_with_replacement(useful, m) if soft else itertools.combinations(useful, m)
    )
    best_idx = len(T)
    best: Optional[Tuple[Counter, Dict[str, str]]] = None
    flows = 0
    for pick in picks:
        opened = Counter(pick) + Counter(zero)
        lo, hi = 0, best_idx - 1
        # feasibility at the largest allowed threshold first; skip if hopeless
        if hi < 0:
            break
        flows += 1
        if flows > budget:
            raise OracleBudgetError(f"more than {budget} flow computations needed")
        value, assign = max_served(inst, opened, T[hi])
        if value < inst.p:
            continue
        found = (hi, assign)
        while lo < hi:
            mid = (lo + hi) // 2
            flows += 1
            if flows > budget:
                raise OracleBudgetError(f"more than {budget} flow computations needed")
            value, assign = max_served(inst, opened, T[mid])
            if value >= inst.p:
                hi = mid
                found = (mid, assign)
            else:
                lo = mid + 1
        best_idx = found[0]
        best = (opened, found[1])
    if best is None:
        return OracleResult(None, None, flows, n_sets)
    opened, assign = best
    assign = _trim(assign, inst.p)
    radius = max((inst.dist(v, u) for v, u in assign.items()), default=0.0)
    sol = Solution(assign, opened, radius)
    problems = verify_solution(inst, sol, T[best_idx], soft=soft)
    if problems:
        raise AssertionError(f"oracle witness invalid: {problems}")
    return OracleResult(T[best_idx], sol, flows, n_sets)


def _trim(assign: Dict[str, str], p: int) -> Dict[str, str]:
    return dict(sorted(assign.items())[:p])


def feasible_at(inst: MetricInstance, r: float, soft: Optional[bool] = None, budget: int = DEFAULT_BUDGET) -> Tuple[bool, int]:
    """Does a solution of radius at most ``r`` exist?  Also returns the number of sets checked."""
    soft = inst.soft if soft is None else soft
    useful, m, pad = opening_sets(inst, soft)
    zero = [u for u in inst.facilities if inst.capacities[u] == 0][:pad]
    if count_opening_sets(inst, soft) > budget:
        raise OracleBudgetError("too many opening sets")
    picks = itertools.combinations_with_replacement(useful, m) if soft else itertools.combinations(useful, m)
    checked = 0
    for pick in picks:
        checked += 1
        if max_served(inst, Counter(pick) + Counter(zero), r)[0] >= inst.p:
            return True, checked
    return False, checked
