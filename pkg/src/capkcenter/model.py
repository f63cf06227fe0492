"""Instances, solutions and hop distances shared by every stage of the solver."""
from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

Node = Tuple[str, str]

CLIENT = "C"
FACILITY = "F"

MODES = ("supplier", "center")
CAPACITY_MODES = ("hard", "soft")


def cnode(v: str) -> Node:
    return (CLIENT, v)


def fnode(u: str) -> Node:
    return (FACILITY, u)


@dataclass(frozen=True, eq=False)
class MetricInstance:
    """Capacitated k-supplier (or k-center) instance with outliers.

    ``points`` indexes the rows of ``matrix``; clients and facilities are
    subsets of it.  An id listed both as client and facility is one point, which
    is how center instances are stored.
    """

    clients: Tuple[str, ...]
    capacities: Mapping[str, int]
    points: Tuple[str, ...]
    matrix: np.ndarray
    k: int
    p: int
    mode: str = "supplier"
    capacity_mode: str = "hard"

    def __post_init__(self) -> None:
        object.__setattr__(self, "clients", tuple(sorted(self.clients)))
        object.__setattr__(
            self, "capacities", {u: int(self.capacities[u]) for u in sorted(self.capacities)}
        )
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))
        if self.matrix.shape != (len(self.points), len(self.points)):
            raise ValueError("metric matrix shape does not match the point list")
        if len(set(self.points)) != len(self.points):
            raise ValueError("duplicate point ids")
        missing = (set(self.clients) | set(self.capacities)) - set(self.points)
        if missing:
            raise ValueError(f"ids without metric rows: {sorted(missing)}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.capacity_mode not in CAPACITY_MODES:
            raise ValueError(f"unknown capacity mode {self.capacity_mode!r}")

    @cached_property
    def index(self) -> Dict[str, int]:
        return {a: i for i, a in enumerate(self.points)}

    @property
    def facilities(self) -> Tuple[str, ...]:
        return tuple(self.capacities)

    @property
    def uniform(self) -> bool:
        return len(set(self.capacities.values())) <= 1

    @property
    def soft(self) -> bool:
        return self.capacity_mode == "soft"

    def dist(self, a: str, b: str) -> float:
        return float(self.matrix[self.index[a], self.index[b]])

    def client_facility_matrix(self) -> np.ndarray:
        """Rows follow ``clients``, columns follow ``facilities``."""
        rows = [self.index[v] for v in self.clients]
        cols = [self.index[u] for u in self.facilities]
        return self.matrix[np.ix_(rows, cols)]


@dataclass(frozen=True, eq=False)
class GraphInstance:
    """Unweighted bipartite graph between clients and facilities."""

    clients: Tuple[str, ...]
    capacities: Mapping[str, int]
    edges: FrozenSet[Tuple[str, str]]
    k: int = 0
    p: int = 0
    capacity_mode: str = "hard"

    def __post_init__(self) -> None:
        object.__setattr__(self, "clients", tuple(sorted(self.clients)))
        object.__setattr__(
            self, "capacities", {u: int(self.capacities[u]) for u in sorted(self.capacities)}
        )
        object.__setattr__(self, "edges", frozenset(self.edges))
        cs = set(self.clients)
        for v, u in self.edges:
            if v not in cs or u not in self.capacities:
                raise ValueError(f"edge ({v}, {u}) is not client-facility")

    @property
    def facilities(self) -> Tuple[str, ...]:
        return tuple(self.capacities)

    @cached_property
    def nodes(self) -> Tuple[Node, ...]:
        return tuple(sorted([cnode(v) for v in self.clients] + [fnode(u) for u in self.facilities]))

    @cached_property
    def adjacency(self) -> Dict[Node, Tuple[Node, ...]]:
        adj: Dict[Node, List[Node]] = {a: [] for a in self.nodes}
        for v, u in self.edges:
            adj[cnode(v)].append(fnode(u))
            adj[fnode(u)].append(cnode(v))
        return {a: tuple(sorted(nb)) for a, nb in adj.items()}

    def degree(self, u: str) -> int:
        return len(self.adjacency[fnode(u)])

    def neighbors(self, u: str) -> Tuple[str, ...]:
        """Client ids adjacent to facility ``u``."""
        return tuple(v for _, v in self.adjacency[fnode(u)])

    @cached_property
    def facility_distances(self) -> Dict[str, Dict[str, float]]:
        """Hop distances between every pair of facilities."""
        out = {}
        for u in self.facilities:
            d = multi_source_distances(self, [fnode(u)])
            out[u] = {w: d[fnode(w)] for w in self.facilities}
        return out

    def ball(self, u: str, radius: int) -> Tuple[str, ...]:
        """Facilities within ``radius`` hops of facility ``u``."""
        du = self.facility_distances[u]
        return tuple(w for w in self.facilities if du[w] <= radius)


@dataclass
class Solution:
    assign: Dict[str, str]
    open: Counter
    radius: float = 0.0

    @property
    def served(self) -> FrozenSet[str]:
        return frozenset(self.assign)

    def to_json(self) -> dict:
        return {
            "radius": self.radius,
            "open": [{"id": u, "mult": int(m)} for u, m in sorted(self.open.items())],
            "assign": [[v, u] for v, u in sorted(self.assign.items())],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Solution":
        opened = Counter({o["id"]: int(o.get("mult", 1)) for o in data["open"]})
        return cls({v: u for v, u in data["assign"]}, opened, float(data.get("radius", 0.0)))


def multi_source_distances(g: GraphInstance, sources: Iterable[Node]) -> Dict[Node, float]:
    """Hop distance from the nearest source; ``math.inf`` where unreachable."""
    dist: Dict[Node, float] = {a: math.inf for a in g.nodes}
    queue = deque()
    for s in sources:
        if s not in dist:
            raise KeyError(f"unknown source {s}")
        if dist[s]:
            dist[s] = 0
            queue.append(s)
    adj = g.adjacency
    while queue:
        a = queue.popleft()
        for b in adj[a]:
            if dist[b] == math.inf:
                dist[b] = dist[a] + 1
                queue.append(b)
    return dist


def validate_metric(inst: MetricInstance, check_triangle: bool = True) -> List[str]:
    """List every violated metric or range constraint; empty means valid."""
    problems: List[str] = []
    m = inst.matrix
    n = len(inst.points)
    if np.isnan(m).any():
        problems.append("metric contains NaN")
    if (m < 0).any():
        problems.append("negative distance")
    diag = np.flatnonzero(np.diag(m) != 0)
    for i in diag:
        problems.append(f"d({inst.points[i]},{inst.points[i]}) != 0")
    asym = np.argwhere(np.triu(m != m.T, 1))
    for i, j in asym:
        problems.append(f"asymmetric pair ({inst.points[i]},{inst.points[j]})")
    if check_triangle and n:
        # d(a,c) <= d(a,b) + d(b,c) for every triple, one middle point at a time
        for b in range(n):
            via = m[:, b][:, None] + m[b, :][None, :]
            bad = np.argwhere(m > via)
            for a, c in bad:
                if a < c:
                    problems.append(
                        f"triangle violated: d({inst.points[a]},{inst.points[c]}) > "
                        f"d({inst.points[a]},{inst.points[b]}) + d({inst.points[b]},{inst.points[c]})"
                    )
    if any(L < 0 for L in inst.capacities.values()):
        problems.append("negative capacity")
    if not 0 <= inst.p <= len(inst.clients):
        problems.append(f"p={inst.p} outside [0, {len(inst.clients)}]")
    kmax = len(inst.facilities) + (len(inst.clients) if inst.soft else 0)
    if not 0 <= inst.k <= kmax:
        problems.append(f"k={inst.k} outside [0, {kmax}]")
    if inst.mode == "center" and set(inst.clients) != set(inst.facilities):
        problems.append("center instance must have identical client and facility sets")
    return problems


def verify_solution(
    inst: Union[MetricInstance, GraphInstance],
    sol: Solution,
    r: float,
    soft: Optional[bool] = None,
) -> List[str]:
    """Check every solution invariant plus ``radius <= r``; return the violations.

    For graph instances distances are hop counts.
    """
    if soft is None:
        soft = getattr(inst, "soft", False)
    problems: List[str] = []
    clients = set(inst.clients)
    caps = inst.capacities
    for v, u in sol.assign.items():
        if v not in clients:
            problems.append(f"unknown client {v}")
        if u not in caps:
            problems.append(f"unknown facility {u}")
    for u in sol.open:
        if u not in caps:
            problems.append(f"unknown facility {u}")
    if problems:
        return problems

    if len(sol.assign) != inst.p:
        problems.append(f"serves {len(sol.assign)} clients, expected p={inst.p}")
    total = sum(sol.open.values())
    if total != inst.k:
        problems.append(f"opens {total} facilities, expected k={inst.k}")
    for u, mult in sol.open.items():
        if mult < 0:
            problems.append(f"negative multiplicity at {u}")
        if mult > 1 and not soft:
            problems.append(f"facility {u} opened {mult} times under hard capacities")
    load = Counter(sol.assign.values())
    for u, n in load.items():
        if sol.open.get(u, 0) <= 0:
            problems.append(f"client assigned to closed facility {u}")
        elif n > caps[u] * sol.open[u]:
            problems.append(f"facility {u} serves {n} > capacity {caps[u] * sol.open[u]}")

    if isinstance(inst, GraphInstance):
        by_fac: Dict[str, Dict[Node, float]] = {}
        radius = 0.0
        for v, u in sol.assign.items():
            if u not in by_fac:
                by_fac[u] = multi_source_distances(inst, [fnode(u)])
            radius = max(radius, by_fac[u][cnode(v)])
    else:
        radius = max((inst.dist(v, u) for v, u in sol.assign.items()), default=0.0)
    if radius > r:
        problems.append(f"radius {radius} exceeds {r}")
    if not math.isclose(radius, sol.radius) and not (radius == sol.radius):
        problems.append(f"reported radius {sol.radius} differs from actual {radius}")
    return problems


def hop_metric(g: GraphInstance, mode: str = "supplier") -> MetricInstance:
    """Metric instance whose distances are hop counts in ``g`` (ids must not collide)."""
    if set(g.clients) & set(g.facilities):
        raise ValueError("client and facility ids must be distinct")
    points = tuple(sorted(list(g.clients) + list(g.facilities)))
    idx = {a: i for i, a in enumerate(points)}
    m = np.full((len(points), len(points)), math.inf)
    for a in g.nodes:
        d = multi_source_distances(g, [a])
        for b, dv in d.items():
            m[idx[a[1]], idx[b[1]]] = dv
    return MetricInstance(g.clients, dict(g.capacities), points, m, g.k, g.p, mode=mode, capacity_mode=g.capacity_mode)


def metric_from_points(
    clients: Sequence[str],
    capacities: Mapping[str, int],
    coords: Mapping[str, Sequence[float]],
    k: int,
    p: int,
    norm: int = 1,
    **kw,
) -> MetricInstance:
    """Metric induced by coordinates under the L1 (default) or L2 norm."""
    points = tuple(sorted(coords))
    X = np.array([coords[a] for a in points], dtype=float)
    diff = X[:, None, :] - X[None, :, :]
    if norm == 1:
        m = np.abs(diff).sum(axis=2)
    else:
        m = np.sqrt((diff ** 2).sum(axis=2))
    return MetricInstance(tuple(clients), dict(capacities), points, m, k, p, **kw)

