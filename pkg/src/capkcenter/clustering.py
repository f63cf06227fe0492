"""Prune far vertices, split into components, and split k and p across them."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .model import FACILITY, GraphInstance, Node, fnode, multi_source_distances

PRUNE_RADIUS = 5


@dataclass
class Component:
    graph: GraphInstance
    skeleton: Tuple[str, ...]

    @property
    def key(self) -> Tuple:
        return (self.graph.clients, self.graph.facilities, self.skeleton)


def prune_and_split(g: GraphInstance, S: Sequence[str]) -> List[Component]:
    """Connected components of the subgraph induced by vertices within 5 hops of S.

    Components are ordered by their smallest vertex.
    """
    dist = multi_source_distances(g, [fnode(s) for s in S])
    kept = {a for a in g.nodes if dist[a] <= PRUNE_RADIUS}
    adj = g.adjacency
    seen: set = set()
    groups: List[List[Node]] = []
    for a in g.nodes:
        if a not in kept or a in seen:
            continue
        comp = [a]
        seen.add(a)
        stack = [a]
        while stack:
            b = stack.pop()
            for c in adj[b]:
                if c in kept and c not in seen:
                    seen.add(c)
                    comp.append(c)
                    stack.append(c)
        groups.append(sorted(comp))
    groups.sort(key=lambda comp: comp[0])

    S_set = set(S)
    out = []
    for comp in groups:
        facs = [u for kind, u in comp if kind == FACILITY]
        cls = [v for kind, v in comp if kind != FACILITY]
        fs = set(facs)
        edges = frozenset((v, u) for v, u in g.edges if u in fs and (v in cls))
        sub = GraphInstance(tuple(cls), {u: g.capacities[u] for u in facs}, edges)
        out.append(Component(sub, tuple(s for s in S if s in fs)))
    assert all(c.skeleton for c in out) and sum(len(c.skeleton) for c in out) == len(S_set)
    return out


Feasibility = Callable[[int, int, int], bool]


def k_range(comp: Component, k: int, soft: bool = False) -> range:
    hi = k if soft else min(k, len(comp.graph.facilities))
    return range(len(comp.skeleton), hi + 1)


def p_bound(comp: Component, p: int, soft: bool = False) -> int:
    g = comp.graph
    hi = min(p, sum(1 for v in g.clients if g.adjacency[("C", v)]))
    if not soft:
        hi = min(hi, sum(g.capacities.values()))
    return hi


def partition_dp(
    dec: Sequence[Component],
    k: int,
    p: int,
    feas: Feasibility,
    soft: bool = False,
    p_upper: Optional[Sequence[int]] = None,
) -> Optional[List[Tuple[int, int]]]:
    """Per-component (k_i, p_i) summing to (k, p) with every ``feas(i, k_i, p_i)`` true.

    ``table[i]`` maps reachable (k', p') after the first i components to the
    (k_i, p_i) that reached it; the witness is read back from the last table.
    ``p_upper`` optionally tightens the per-component service bound.
    """
    n = len(dec)
    ranges = []
    for i, comp in enumerate(dec):
        hi = p_bound(comp, p, soft)
        if p_upper is not None:
            hi = min(hi, p_upper[i])
        ranges.append((k_range(comp, k, soft), hi))
    # cheap necessary conditions before any feasibility probe
    if sum(r.start for r, _ in ranges) > k or sum(r.stop - 1 for r, _ in ranges) < k:
        return None
    if sum(hi for _, hi in ranges) < p:
        return None

    memo: Dict[Tuple[int, int, int], bool] = {}

    def ok(i, ki, pi):
        key = (i, ki, pi)
        if key not in memo:
            memo[key] = bool(feas(i, ki, pi))
        return memo[key]

    table: List[Dict[Tuple[int, int], Tuple[int, int]]] = [{(0, 0): (0, 0)}]
    for i in range(n):
        krange, phi = ranges[i]
        # remaining components still need at least their skeleton sizes
        k_rest_min = sum(r.start for r, _ in ranges[i + 1:])
        p_rest_max = sum(h for _, h in ranges[i + 1:])
        nxt: Dict[Tuple[int, int], Tuple[int, int]] = {}
        for (kk, pp) in sorted(table[-1]):
            for ki in krange:
                if kk + ki + k_rest_min > k:
                    break
                for pi in range(0, min(phi, p - pp) + 1):
                    if pp + pi + p_rest_max < p:
                        continue
                    cell = (kk + ki, pp + pi)
                    if cell in nxt:
                        continue
                    if ok(i, ki, pi):
                        nxt[cell] = (ki, pi)
        table.append(nxt)
        if not nxt:
            return None
    if (k, p) not in table[-1]:
        return None
    parts: List[Tuple[int, int]] = []
    cell = (k, p)
    for i in range(n, 0, -1):
        ki, pi = table[i][cell]
        parts.append((ki, pi))
        cell = (cell[0] - ki, cell[1] - pi)
    parts.reverse()
    return parts
