import itertools
import random
from typing import Dict, Iterable, List, Tuple

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from capkcenter.model import GraphInstance, MetricInstance

settings.register_profile(
    "repo", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("repo")


def graph(edges: Iterable[Tuple[str, str]], caps: Dict[str, int], clients: Iterable[str] = (), k=0, p=0, **kw):
    """Bipartite graph from (client, facility) pairs; extra isolated clients allowed."""
    edges = list(edges)
    cs = sorted({v for v, _ in edges} | set(clients))
    return GraphInstance(tuple(cs), caps, frozenset(edges), k, p, **kw)


def path_graph(n_facilities: int, caps=None, k=0, p=0) -> GraphInstance:
    """f0 - c0 - f1 - c1 - ... - f{n-1}; facility f_i sits at hop 2i from f0."""
    edges = []
    for i in range(n_facilities - 1):
        edges += [(f"c{i}", f"f{i}"), (f"c{i}", f"f{i + 1}")]
    caps = caps or {f"f{i}": 1 for i in range(n_facilities)}
    return graph(edges, caps, k=k, p=p)


def matrix_instance(points: List[str], rows, clients, caps, k, p, **kw) -> MetricInstance:
    return MetricInstance(tuple(clients), caps, tuple(points), np.array(rows, dtype=float), k, p, **kw)


def brute_hall(supplies, demands, arcs) -> bool:
    """Every demand subset U must see at least demand(U) of supply."""
    reach = {b: {a for a, bb in arcs if bb == b} for b in demands}
    keys = [b for b in demands if demands[b]]
    for r in range(1, len(keys) + 1):
        for U in itertools.combinations(keys, r):
            nb = set().union(*(reach[b] for b in U))
            if sum(supplies.get(a, 0) for a in nb) < sum(demands[b] for b in U):
                return False
    return True


@pytest.fixture
def rng():
    return random.Random(12345)


def _matching_size(clients, slots, reach) -> int:
    """Maximum matching of clients into facility slots by augmenting paths."""
    owner: Dict = {}

    def augment(v, seen):
        for s in slots:
            if s in seen or not reach(v, s[0]):
                continue
            seen.add(s)
            if s not in owner or augment(owner[s], seen):
                owner[s] = v
                return True
        return False

    return sum(augment(v, set()) for v in clients)


def brute_opt(inst: MetricInstance, soft: bool = None):
    """Smallest pairwise distance r at which some k facilities serve p clients.

    Written independently of the package: every k-subset (k-multiset when
    soft) of facilities, zero-capacity ones included, and every distance in
    the matrix are tried in order.  Center instances use every point as both
    client and facility.  Returns None when no radius works.
    """
    soft = inst.soft if soft is None else soft
    center = inst.mode == "center"
    clients = list(inst.points) if center else list(inst.clients)
    facs = list(inst.points) if center else list(inst.capacities)
    cap = {u: inst.capacities.get(u, 0) for u in facs}
    pick = itertools.combinations_with_replacement if soft else itertools.combinations
    if inst.p == 0 and (soft or inst.k <= len(facs)) and (facs or inst.k == 0):
        return 0.0
    for r in sorted(set(float(x) for x in np.ravel(inst.matrix) if np.isfinite(x))):
        for F in pick(facs, inst.k):
            slots = [(u, i, j) for i, u in enumerate(F) for j in range(cap[u])]
            if len(slots) < inst.p:
                continue
            if _matching_size(clients, slots, lambda v, u: inst.dist(v, u) <= r) >= inst.p:
                return r
    return None
