"""Greedy construction of candidate skeletons on a graphic instance."""
from __future__ import annotations

import math
from dataclasses import replace
from typing import List, Tuple

from .model import GraphInstance, fnode, multi_source_distances

SEPARATION = 6


def cap_truncate(g: GraphInstance) -> GraphInstance:
    """Clamp every capacity to the facility's degree."""
    caps = {u: min(L, g.degree(u)) for u, L in g.capacities.items()}
    return replace(g, capacities=caps)


def skeleton_candidates(g: GraphInstance, k: int) -> List[Tuple[str, ...]]:
    """Prefix chain S1 < S2 < ... of far-apart, highest-capacity facilities.

    At each step the next facility is the highest-capacity one at hop distance
    at least 6 from everything chosen so far (ties: smallest id).  Every prefix
    is emitted; one of them is a skeleton whenever a distance-1 solution exists.
    """
    out: List[Tuple[str, ...]] = []
    S: List[str] = []
    dist = {fnode(u): math.inf for u in g.facilities}
    while len(S) < k:
        far = [u for u in g.facilities if dist[fnode(u)] >= SEPARATION]
        if not far:
            break
        s = min(far, key=lambda u: (-g.capacities[u], u))
        S.append(s)
        out.append(tuple(S))
        d = multi_source_distances(g, [fnode(s)])
        for u in g.facilities:
            dist[fnode(u)] = min(dist[fnode(u)], d[fnode(u)])
    return out
