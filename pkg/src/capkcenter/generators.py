"""Seeded instance generators, including the family where the LP has an unbounded gap."""
from __future__ import annotations

import random
from typing import Dict, List, Optional, Tuple, Union

from .model import GraphInstance, MetricInstance, metric_from_points


def gen_gap(r: int) -> Tuple[GraphInstance, Tuple[str, str]]:
    """Graph whose LP stays feasible although no distance-r solution exists.

    With N = 2r: a path of N+1 vertices from client c1 to client c2 whose
    interior alternates facility, client, ...; facilities f11, f12 next to c1
    and f21, f22 next to c2; 6N clients per side adjacent to both facilities
    of that side.  Every capacity is 4N, k = 3 and p = 12N.
    """
    if r < 2:
        raise ValueError("gap instances need r >= 2")
    N = 2 * r
    path = ["c1"] + [f"pf{i}" if i % 2 else f"pc{i}" for i in range(1, N)] + ["c2"]
    edges = set()
    for a, b in zip(path, path[1:]):
        edges.add((a, b) if not a.startswith("pf") else (b, a))
    clients = [a for a in path if not a.startswith("pf")]
    facilities = [a for a in path if a.startswith("pf")]
    for i in (1, 2):
        for j in (1, 2):
            f = f"f{i}{j}"
            facilities.append(f)
            edges.add((f"c{i}", f))
        for j in range(1, 6 * N + 1):
            v = f"c{i}_{j}"
            clients.append(v)
            edges.add((v, f"f{i}1"))
            edges.add((v, f"f{i}2"))
    caps = {u: 4 * N for u in facilities}
    return GraphInstance(tuple(clients), caps, frozenset(edges), k=3, p=12 * N), ("f11", "f21")


def _capacity(rng: random.Random, cap_range: Tuple[int, int], uniform_value: Optional[int]) -> int:
    return uniform_value if uniform_value is not None else rng.randint(*cap_range)


def gen_random(
    nC: int,
    nF: int,
    k: int,
    p: int,
    cap_range: Tuple[int, int] = (0, 5),
    model: str = "metric",
    seed: int = 0,
    *,
    grid: int = 20,
    density: float = 0.25,
    connected: bool = True,
    uniform: bool = False,
    capacity_mode: str = "hard",
    mode: str = "supplier",
) -> Union[MetricInstance, GraphInstance]:
    """Reproducible random instance.

    ``model="metric"`` places points on an integer grid and uses L1 distances,
    so the triangle inequality holds by construction.  ``model="graph"`` draws
    a bipartite graph, built around a random spanning tree when ``connected``.
    ``mode="center"`` makes every point both client and facility (metric only).
    """
    if min(nC, nF, k, p) < 0 or cap_range[0] < 0 or cap_range[0] > cap_range[1]:
        raise ValueError("negative size or bad capacity range")
    if mode == "center":
        if model != "metric" or nC != nF:
            raise ValueError("center instances are metric with nC == nF")
    if p > nC:
        raise ValueError(f"p={p} exceeds the {nC} clients")
    if capacity_mode == "hard" and k > nF:
        raise ValueError(f"k={k} exceeds the {nF} facilities")
    rng = random.Random(seed)
    uniform_value = rng.randint(max(1, cap_range[0]), max(1, cap_range[1])) if uniform else None

    if model == "metric":
        if mode == "center":
            ids = [f"v{i}" for i in range(nC)]
            caps = {a: _capacity(rng, cap_range, uniform_value) for a in ids}
            coords = {a: (rng.randint(0, grid), rng.randint(0, grid)) for a in ids}
            return metric_from_points(ids, caps, coords, k, p, mode="center", capacity_mode=capacity_mode)
        clients = [f"c{i}" for i in range(nC)]
        caps = {f"f{i}": _capacity(rng, cap_range, uniform_value) for i in range(nF)}
        coords = {a: (rng.randint(0, grid), rng.randint(0, grid)) for a in clients + list(caps)}
        return metric_from_points(clients, caps, coords, k, p, capacity_mode=capacity_mode)
    if model != "graph":
        raise ValueError(f"unknown model {model!r}")

    clients = [f"c{i}" for i in range(nC)]
    facilities = [f"f{i}" for i in range(nF)]
    caps = {u: _capacity(rng, cap_range, uniform_value) for u in facilities}
    edges = set()
    if connected and nC + nF > 1:
        if not nC or not nF:
            raise ValueError("a connected bipartite graph needs both sides")
        order = clients[1:] + facilities[1:]
        rng.shuffle(order)
        placed: Dict[str, List[str]] = {"c": [clients[0]], "f": [facilities[0]]}
        edges.add((clients[0], facilities[0]))
        for a in order:
            if a.startswith("c"):
                edges.add((a, rng.choice(placed["f"])))
                placed["c"].append(a)
            else:
                edges.add((rng.choice(placed["c"]), a))
                placed["f"].append(a)
    for v in clients:
        for u in facilities:
            if rng.random() < density:
                edges.add((v, u))
    return GraphInstance(tuple(clients), caps, frozenset(edges), k=k, p=p)
