"""Exact integral max-flow (Dinic) and transportation feasibility."""
from __future__ import annotations

from collections import deque
from typing import Dict, Hashable, Iterable, List, Mapping, Tuple

# Capacities must fit a signed 64-bit word; Python ints never overflow, the cap
# exists so results stay portable to fixed-width implementations.
MAX_CAPACITY = 2**63 - 1


class FlowOverflowError(ValueError):
    pass


class FlowNetwork:
    """Directed network with integer arc capacities.

    Nodes are arbitrary hashable labels; arcs are numbered in insertion order,
    which also fixes the augmenting order and hence the flow decomposition.
    """

    def __init__(self) -> None:
        self.labels: List[Hashable] = []
        self.index: Dict[Hashable, int] = {}
        self._out: List[List[int]] = []
        self._head: List[int] = []
        self._cap: List[int] = []

    def node(self, label: Hashable) -> int:
        i = self.index.get(label)
        if i is None:
            i = len(self.labels)
            self.labels.append(label)
            self.index[label] = i
            self._out.append([])
        return i

    def add_arc(self, tail: Hashable, head: Hashable, capacity: int) -> int:
        if not isinstance(capacity, int) or capacity < 0:
            raise ValueError(f"capacity must be a nonnegative integer, got {capacity!r}")
        if capacity > MAX_CAPACITY:
            raise FlowOverflowError(f"capacity {capacity} exceeds 64-bit range")
        a, b = self.node(tail), self.node(head)
        arc = len(self._head)
        self._head += [b, a]
        self._cap += [capacity, 0]
        self._out[a].append(arc)
        self._out[b].append(arc + 1)
        return arc // 2

    @property
    def arc_count(self) -> int:
        return len(self._head) // 2

    def arc(self, i: int) -> Tuple[Hashable, Hashable, int]:
        return (self.labels[self._head[2 * i + 1]], self.labels[self._head[2 * i]], self._cap[2 * i] + self._cap[2 * i + 1])

    def max_flow(self, source: Hashable, sink: Hashable) -> Tuple[int, List[int]]:
        """Return the max-flow value and the flow on every arc (by arc id)."""
        s, t = self.node(source), self.node(sink)
        n = len(self.labels)
        head, out = self._head, self._out
        res = list(self._cap)
        total = 0
        if s == t:
            raise ValueError("source and sink coincide")
        while True:
            level = [-1] * n
            level[s] = 0
            queue = deque([s])
            while queue:
                a = queue.popleft()
                for e in out[a]:
                    if res[e] and level[head[e]] < 0:
                        level[head[e]] = level[a] + 1
                        queue.append(head[e])
            if level[t] < 0:
                break
            it = [0] * n
            while True:
                pushed = self._augment(s, t, level, it, res)
                if not pushed:
                    break
                total += pushed
        flows = [res[2 * i + 1] for i in range(self.arc_count)]
        return total, flows

    def _augment(self, s: int, t: int, level: List[int], it: List[int], res: List[int]) -> int:
        # iterative DFS along the level graph; returns the bottleneck pushed
        head, out = self._head, self._out
        path: List[int] = []
        a = s
        while True:
            if a == t:
                f = min(res[e] for e in path)
                for e in path:
                    res[e] -= f
                    res[e ^ 1] += f
                return f
            edges = out[a]
            while it[a] < len(edges):
                e = edges[it[a]]
                if res[e] and level[head[e]] == level[a] + 1:
                    break
                it[a] += 1
            else:
                if not path:
                    return 0
                level[a] = -1
                e = path.pop()
                a = head[e ^ 1]
                it[a] += 1
                continue
            path.append(e)
            a = head[e]


def max_flow(net: FlowNetwork, source: Hashable, sink: Hashable) -> Tuple[int, List[int]]:
    return net.max_flow(source, sink)


def transportation_feasible(
    supplies: Mapping[Hashable, int],
    demands: Mapping[Hashable, int],
    arcs: Iterable[Tuple[Hashable, Hashable]],
) -> bool:
    """Can every demand be met from supplies along the allowed (supply, demand) arcs?"""
    need = sum(demands.values())
    if need == 0:
        return True
    net = FlowNetwork()
    src, snk = ("src",), ("snk",)
    net.node(src)
    for a, q in supplies.items():
        if q:
            net.add_arc(src, ("s", a), int(q))
    for a, b in arcs:
        if supplies.get(a) and demands.get(b):
            net.add_arc(("s", a), ("d", b), need)
    for b, q in demands.items():
        if q:
            net.add_arc(("d", b), snk, int(q))
    net.node(snk)
    value, _ = net.max_flow(src, snk)
    return value == need
