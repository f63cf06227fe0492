"""Distance transfers of fractional openings and the trees that steer rounding.

Transfer vectors are dicts from node keys to ``Fraction``.  Keys are
``("F", u)`` for a facility ``u`` and ``("D", s)`` for the duplicate of skeleton
vertex ``s`` introduced by the rounding tree.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from .flow import transportation_feasible
from .model import GraphInstance

Key = Tuple[str, str]

BACKBONE_EDGE_MAX = 10
ATTACH_MAX = 4


class TransferError(RuntimeError):
    """A construction broke a bound that its preconditions guarantee."""


def fkey(u: str) -> Key:
    return ("F", u)


def dkey(s: str) -> Key:
    return ("D", s)


@dataclass(frozen=True)
class TransferCheck:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def verify_transfer(
    dist: Callable[[Hashable, Hashable], float],
    capacity: Mapping[Hashable, int],
    y: Mapping[Hashable, object],
    y2: Mapping[Hashable, object],
    r: float,
) -> TransferCheck:
    """Is ``y2`` a distance-``r`` transfer of ``y``?

    Sums must agree, and the transportation problem with supply L(v)*y2[v],
    demand L(u)*y[u] and arcs between nodes at distance <= r must be feasible.
    By max-flow/min-cut this is exactly the all-subsets neighbourhood
    condition.  Values are scaled to a common integer denominator first.
    """
    y = {a: _frac(v) for a, v in y.items() if v}
    y2 = {a: _frac(v) for a, v in y2.items() if v}
    if any(v < 0 for v in y.values()) or any(v < 0 for v in y2.values()):
        return TransferCheck(False, "negative value")
    if sum(y.values()) != sum(y2.values()):
        return TransferCheck(False, "condition 1 violated")
    den = 1
    for v in itertools.chain(y.values(), y2.values()):
        den = den * v.denominator // math.gcd(den, v.denominator)
    supplies = {a: int(capacity[a] * v * den) for a, v in y2.items()}
    demands = {b: int(capacity[b] * v * den) for b, v in y.items()}
    arcs = [(a, b) for a in supplies for b in demands if dist(a, b) <= r]
    if transportation_feasible(supplies, demands, arcs):
        return TransferCheck(True)
    return TransferCheck(False, "condition 2 violated")


@dataclass
class TransferStep:
    name: str
    host: str
    distance: int
    stretch: int = 1
    verified: Optional[bool] = None

    @property
    def bound(self) -> int:
        return self.distance * self.stretch


def reinterpret_metric(distance: int, stretch: int) -> int:
    """Distance bound after mapping a host metric into one that is ``stretch`` times longer."""
    return distance * stretch


def compose_transfers(steps: Iterable[TransferStep]) -> int:
    """Distances of consecutive transfers add up."""
    return sum(reinterpret_metric(s.distance, s.stretch) for s in steps)


@dataclass
class BackboneTree:
    nodes: Tuple[str, ...]
    edges: List[Tuple[str, str, int]]  # (tree endpoint, newly attached, hop length)


def build_backbone_tree(g: GraphInstance, S: Sequence[str]) -> BackboneTree:
    """Spanning tree on S whose edges join vertices at most 10 hops apart.

    Grown one leaf at a time by attaching the skeleton vertex nearest to the
    current tree (ties: smallest id on both ends).
    """
    if not S:
        return BackboneTree((), [])
    fd = g.facility_distances
    order = sorted(S)
    tree = [order[0]]
    edges = []
    rest = set(order[1:])
    while rest:
        s, t, length = min(
            ((s, t, fd[t][s]) for s in rest for t in tree), key=lambda e: (e[2], e[0], e[1])
        )
        if length > BACKBONE_EDGE_MAX:
            raise TransferError(f"skeleton vertex {s} is {length} hops from the tree")
        edges.append((t, s, int(length)))
        tree.append(s)
        rest.discard(s)
    return BackboneTree(tuple(order), edges)


@dataclass
class RoundingTree:
    """Tree over facilities (with skeleton duplicates) whose internal nodes are hubs."""

    g: GraphInstance
    skeleton: Tuple[str, ...]
    nodes: Tuple[Key, ...]
    edges: List[Tuple[Key, Key]]
    root: Key
    hub: Dict[str, Key]
    anchor: Dict[str, str]
    attach: Dict[Key, Key]
    capacity: Dict[Key, int]

    def facility_of(self, a: Key) -> str:
        return a[1]

    def gdist(self, a: Key, b: Key) -> float:
        """Distance in the graph extended by duplicates.

        A duplicate shares its original's neighbours, so it is 2 hops from the
        original and as far as the original from everything else.
        """
        if a == b:
            return 0
        if a[1] == b[1]:
            return 2 if self.g.degree(a[1]) else math.inf
        return self.g.facility_distances[a[1]][b[1]]

    @cached_property
    def adjacency(self) -> Dict[Key, List[Key]]:
        adj: Dict[Key, List[Key]] = {a: [] for a in self.nodes}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return {a: sorted(nb) for a, nb in adj.items()}

    @cached_property
    def tree_distances(self) -> Dict[Key, Dict[Key, int]]:
        out = {}
        for a in self.nodes:
            d = {a: 0}
            queue = deque([a])
            while queue:
                b = queue.popleft()
                for c in self.adjacency[b]:
                    if c not in d:
                        d[c] = d[b] + 1
                        queue.append(c)
            out[a] = d
        return out

    def tdist(self, a: Key, b: Key) -> float:
        return self.tree_distances[a].get(b, math.inf)

    @cached_property
    def children(self) -> Dict[Key, List[Key]]:
        kids: Dict[Key, List[Key]] = {a: [] for a in self.nodes}
        seen = {self.root}
        queue = deque([self.root])
        while queue:
            a = queue.popleft()
            for b in self.adjacency[a]:
                if b not in seen:
                    seen.add(b)
                    kids[a].append(b)
                    queue.append(b)
        return kids

    @cached_property
    def parent(self) -> Dict[Key, Optional[Key]]:
        par: Dict[Key, Optional[Key]] = {self.root: None}
        for a, kids in self.children.items():
            for b in kids:
                par[b] = a
        return par

    def postorder(self) -> List[Key]:
        out: List[Key] = []
        stack = [(self.root, False)]
        while stack:
            a, done = stack.pop()
            if done:
                out.append(a)
                continue
            stack.append((a, True))
            for b in reversed(self.children[a]):
                stack.append((b, False))
        return out


def build_rounding_tree(
    g: GraphInstance,
    S: Sequence[str],
    bt: BackboneTree,
    capacities: Optional[Mapping[str, int]] = None,
    anchors_at_skeleton: bool = False,
) -> RoundingTree:
    """Hub every skeleton vertex and hang the remaining facilities off the nearest hub.

    By default each s gets a duplicate hub s' carrying the capacity of the
    largest-capacity facility m_s within 2 hops of s; the anchors m_s leave the
    tree.  With ``anchors_at_skeleton`` (uniform capacities) s is its own hub
    and anchor.
    """
    L = dict(capacities if capacities is not None else g.capacities)
    S = tuple(sorted(S))
    hub: Dict[str, Key] = {}
    anchor: Dict[str, str] = {}
    capacity: Dict[Key, int] = {fkey(u): L[u] for u in g.facilities}
    for s in S:
        if anchors_at_skeleton:
            anchor[s] = s
            hub[s] = fkey(s)
        else:
            ball = g.ball(s, 2)
            anchor[s] = min(ball, key=lambda u: (-L[u], u))
            hub[s] = dkey(s)
            capacity[dkey(s)] = L[anchor[s]]
    if len(set(anchor.values())) != len(anchor):
        raise TransferError("anchors are not distinct; skeleton not 6-separated")

    anchors = set(anchor.values()) if not anchors_at_skeleton else set()
    hubs = set(hub.values())
    members = [fkey(u) for u in g.facilities if u not in anchors and fkey(u) not in hubs]
    nodes = tuple(sorted(hubs)) + tuple(members)
    edges: List[Tuple[Key, Key]] = [(hub[t], hub[s]) for t, s, _ in bt.edges]
    attach: Dict[Key, Key] = {}
    fd = g.facility_distances
    for a in members:
        s = min(S, key=lambda s: (fd[a[1]][s], s))
        if fd[a[1]][s] > ATTACH_MAX:
            raise TransferError(f"facility {a[1]} is {fd[a[1]][s]} hops from the skeleton")
        attach[a] = hub[s]
        edges.append((hub[s], a))
    return RoundingTree(g, S, nodes, edges, hub[S[0]], hub, anchor, attach, capacity)


def gather_step(rt: RoundingTree, y: Mapping[Key, Fraction], everything: bool = False) -> Dict[Key, Fraction]:
    """Pull one unit (or everything) from each 2-hop ball into that ball's hub.

    Mass is drawn from the anchor first, then from the rest of the ball by
    decreasing capacity (ties: smallest id).
    """
    g = rt.g
    balls = {s: g.ball(s, 2) for s in rt.skeleton}
    seen: set = set()
    for s, ball in balls.items():
        if seen & set(ball):
            raise TransferError("2-hop balls of skeleton vertices overlap")
        seen |= set(ball)
    out: Dict[Key, Fraction] = {a: _frac(v) for a, v in y.items()}
    for s in rt.skeleton:
        out.setdefault(rt.hub[s], Fraction(0))
    for s, ball in balls.items():
        mass = sum((out.get(fkey(u), Fraction(0)) for u in ball), Fraction(0))
        if mass < 1:
            raise TransferError(f"ball around {s} holds only {mass} < 1")
        m = rt.anchor[s]
        order = [m] + sorted((u for u in ball if u != m), key=lambda u: (-rt.capacity[fkey(u)], u))
        need = mass if everything else Fraction(1)
        taken = Fraction(0)
        for u in order:
            if taken == need:
                break
            have = out.get(fkey(u), Fraction(0))
            take = min(have, need - taken)
            out[fkey(u)] = have - take
            taken += take
        out[rt.hub[s]] += taken
    return out


@dataclass
class TreeRounding:
    opened: frozenset
    stage: str  # "integral" | "greedy" | "floor-ceil" | "extended"
    tried: int = 0


def tree_transfer(rt: RoundingTree, y: Mapping[Key, Fraction]) -> TreeRounding:
    """Integral distance-2 transfer on the rounding tree.

    Internal nodes carry value 1.  Sibling leaves share their 2-hop
    neighbourhood, so within a sibling group opening the highest-capacity
    leaves dominates every other choice of the same size; only the per-group
    counts are searched.  Stages, in order: keep internals open with
    floor/ceil counts chosen greedily by residual demand; all floor/ceil
    combinations; finally any counts with any internals closed.  Every
    candidate is accepted only if the distance-2 flow check passes.
    """
    y = {a: _frac(y.get(a, 0)) for a in rt.nodes}
    total = sum(y.values())
    if total.denominator != 1:
        raise TransferError(f"total mass {total} is not integral")
    if any(v < 0 or v > 1 for v in y.values()):
        raise TransferError("values outside [0, 1]")
    internal = [a for a in rt.nodes if rt.children[a]]
    if any(y[a] != 1 for a in internal):
        raise TransferError("internal node with value below 1")
    cap = rt.capacity
    tried = 0

    def check(opened) -> bool:
        nonlocal tried
        tried += 1
        return bool(verify_transfer(rt.tdist, cap, y, {a: 1 for a in opened}, 2))

    if all(v.denominator == 1 for v in y.values()):
        opened = frozenset(a for a, v in y.items() if v == 1)
        if not check(opened):
            raise TransferError("identity transfer failed verification")
        return TreeRounding(opened, "integral", tried)

    groups = [
        sorted((b for b in rt.children[a] if not rt.children[b]), key=lambda b: (-cap[b], b))
        for a in internal
    ]
    groups = [grp for grp in groups if grp]
    mass = [sum((y[b] for b in grp), Fraction(0)) for grp in groups]
    leaf_budget = int(total) - len(internal)

    def build(counts, closed=()):
        opened = set(a for a in internal if a not in closed)
        for grp, n in zip(groups, counts):
            opened.update(grp[:n])
        return frozenset(opened)

    base = [math.floor(s) for s in mass]
    extra = leaf_budget - sum(base)
    frac = [i for i, s in enumerate(mass) if s.denominator != 1]

    if 0 <= extra <= len(frac):
        residual = {
            i: sum((cap[b] * y[b] for b in groups[i]), Fraction(0)) - sum(cap[b] for b in groups[i][: base[i]])
            for i in frac
        }
        pick = sorted(frac, key=lambda i: (-residual[i], i))[:extra]
        counts = [base[i] + (1 if i in pick else 0) for i in range(len(groups))]
        opened = build(counts)
        if check(opened):
            return TreeRounding(opened, "greedy", tried)
        for pick in itertools.combinations(frac, extra):
            counts = [base[i] + (1 if i in pick else 0) for i in range(len(groups))]
            opened = build(counts)
            if check(opened):
                return TreeRounding(opened, "floor-ceil", tried)

    for n_closed in range(len(internal) + 1):
        for closed in itertools.combinations(internal, n_closed):
            for counts in _bounded_compositions(leaf_budget + n_closed, [len(grp) for grp in groups]):
                opened = build(counts, closed)
                if check(opened):
                    return TreeRounding(opened, "extended", tried)
    raise TransferError("no integral distance-2 transfer found on the rounding tree")


def _bounded_compositions(total: int, bounds: Sequence[int]):
    """Vectors n with 0 <= n[i] <= bounds[i] and sum(n) == total."""
    if not bounds:
        if total == 0:
            yield ()
        return
    rest = sum(bounds[1:])
    for first in range(min(bounds[0], total), -1, -1):
        if total - first > rest:
            break
        for tail in _bounded_compositions(total - first, bounds[1:]):
            yield (first,) + tail


def finalize_transfer(opened: Iterable[Key], rt: RoundingTree) -> frozenset:
    """Swap each opened duplicate for its anchor; returns facility ids."""
    out = []
    for a in opened:
        out.append(rt.anchor[a[1]] if a[0] == "D" else a[1])
    if len(set(out)) != len(out):
        raise TransferError("finalised facility set has collisions")
    return frozenset(out)
