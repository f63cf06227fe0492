"""Round one component's fractional point to an integral solution, then merge components."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .flow import FlowNetwork
from .model import GraphInstance, Solution, cnode, fnode, multi_source_distances
from .relaxation import FractionalPoint
from .transfer import (
    RoundingTree,
    TransferError,
    TransferStep,
    build_backbone_tree,
    build_rounding_tree,
    compose_transfers,
    finalize_transfer,
    fkey,
    gather_step,
    tree_transfer,
    verify_transfer,
)

# grid for turning solver floats into exact fractions
REPAIR_DENOMINATOR = 2**30
REPAIR_TOLERANCE = 1e-6

CHAIN_BOUND = {"hard": 24, "uniform": 22, "uniform-soft": 12}


class RoundingError(RuntimeError):
    """A rounding stage failed although its guarantee says it cannot."""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


def match_clients(
    g: GraphInstance, F: Mapping[str, int] | Iterable[str], r: int, p: int
) -> Optional[Dict[str, str]]:
    """Assign exactly ``p`` clients to open facilities within ``r + 1`` hops.

    ``F`` is a set of facility ids or a multiplicity map.  A facility with
    multiplicity m takes at most L(u) * m clients.  Returns ``None`` when the
    max-flow falls short of ``p``.
    """
    mult = Counter(F) if not isinstance(F, Mapping) else Counter({u: m for u, m in F.items() if m})
    if p == 0:
        return {}
    net = FlowNetwork()
    src, top, snk = ("src",), ("top",), ("snk",)
    net.add_arc(src, top, p)
    link_arcs = []
    for u in sorted(mult):
        net.add_arc(top, ("f", u), g.capacities[u] * mult[u])
        d = multi_source_distances(g, [fnode(u)])
        for v in g.clients:
            if d[cnode(v)] <= r + 1:
                link_arcs.append((net.add_arc(("f", u), ("c", v), 1), v, u))
    for v in g.clients:
        net.add_arc(("c", v), snk, 1)
    net.node(snk)
    value, flows = net.max_flow(src, snk)
    if value < p:
        return None
    return {v: u for arc, v, u in link_arcs if flows[arc]}


def exact_openings(
    g: GraphInstance,
    S: Sequence[str],
    k: int,
    y: Mapping[str, object],
    bounded: bool = True,
    denominator: int = REPAIR_DENOMINATOR,
) -> Dict[str, Fraction]:
    """Snap a solver's y to fractions that satisfy the opening constraints exactly.

    Values land on a 1/denominator grid, are clipped to [0, 1] (or [0, inf)
    when unbounded), every 2-hop ball around S is topped up to 1 and the total
    is fixed to exactly ``k``.  Moves larger than ``REPAIR_TOLERANCE`` mean the
    input was not a near-feasible point and raise.
    """
    if all(isinstance(v, Fraction) for v in y.values()):
        out = {u: Fraction(y.get(u, 0)) for u in g.facilities}
    else:
        out = {u: Fraction(round(float(y.get(u, 0)) * denominator), denominator) for u in g.facilities}
    ub = Fraction(1) if bounded else None
    for u, v in out.items():
        out[u] = max(Fraction(0), v if ub is None else min(ub, v))

    def room(u):
        return math.inf if ub is None else ub - out[u]

    balls = {s: g.ball(s, 2) for s in S}
    in_ball = {u for b in balls.values() for u in b}
    for s in S:
        deficit = 1 - sum(out[u] for u in balls[s])
        for u in sorted(balls[s], key=lambda u: (-out[u], u)):
            if deficit <= 0:
                break
            add = min(deficit, room(u))
            out[u] += add
            deficit -= add
        if deficit > 0:
            raise RoundingError("repair", f"ball around {s} cannot reach 1")

    diff = k - sum(out.values())
    if diff > 0:
        for u in sorted(out, key=lambda u: (-out[u], u)):
            add = min(diff, room(u))
            out[u] += add
            diff -= add
            if diff == 0:
                break
    elif diff < 0:
        need = -diff
        for u in sorted((u for u in out if u not in in_ball), key=lambda u: (out[u], u)):
            take = min(need, out[u])
            out[u] -= take
            need -= take
        for s in S:
            if need == 0:
                break
            surplus = sum(out[u] for u in balls[s]) - 1
            for u in sorted(balls[s], key=lambda u: (out[u], u)):
                take = min(need, surplus, out[u])
                out[u] -= take
                need -= take
                surplus -= take
        diff = -need
    if diff != 0:
        raise RoundingError("repair", f"total opening cannot be fixed to k={k}")
    drift = max((abs(float(out[u]) - float(y.get(u, 0))) for u in out), default=0.0)
    if drift > REPAIR_TOLERANCE:
        raise RoundingError("repair", f"point needed a correction of {drift:.3g}")
    return out


@dataclass
class ComponentSolution:
    open: Counter
    assign: Dict[str, str]
    radius: int
    chain: List[TransferStep] = field(default_factory=list)
    stage: str = ""  # how the tree rounding succeeded
    tree: Optional[RoundingTree] = None
    # (step, input vector, output vector) for every step, plus the composite
    vectors: List[Tuple[TransferStep, Dict, Dict]] = field(default_factory=list)

    @property
    def k(self) -> int:
        return sum(self.open.values())

    @property
    def p(self) -> int:
        return len(self.assign)


def _moved(before: Mapping, after: Mapping) -> float:
    keys = set(before) | set(after)
    return float(sum(max(Fraction(0), Fraction(before.get(a, 0)) - Fraction(after.get(a, 0))) for a in keys))


def _step(steps, vectors, trace, name, host, distance, stretch, check, before, after):
    step = TransferStep(name, host, distance, stretch, bool(check))
    steps.append(step)
    vectors.append((step, dict(before), dict(after)))
    if trace is not None:
        trace.append(
            {
                "event": "transfer",
                "step": name,
                "host": host,
                "distance": step.bound,
                "mass_moved": _moved(before, after),
                "verified": step.verified,
            }
        )
    if not check:
        raise RoundingError(name, f"transfer failed verification at distance {step.bound}: {check.reason}")


def round_component(
    g: GraphInstance,
    S: Sequence[str],
    k: int,
    p: int,
    point: FractionalPoint,
    variant: str = "hard",
    trace: Optional[list] = None,
) -> ComponentSolution:
    """Turn a fractional point on one component into a solution within the variant's radius.

    Every transfer in the chain is checked by the flow verifier at its stated
    distance, and so is the composed transfer from the LP openings to the
    final integral ones.
    """
    soft = variant == "uniform-soft"
    anchors_at_skeleton = variant in ("uniform", "uniform-soft")
    try:
        y = exact_openings(g, S, k, point.y, bounded=not soft)
        bt = build_backbone_tree(g, S)
        rt = build_rounding_tree(g, S, bt, anchors_at_skeleton=anchors_at_skeleton)
    except TransferError as exc:
        raise RoundingError("trees", str(exc)) from exc
    cap = rt.capacity
    y0 = {fkey(u): v for u, v in y.items() if v}
    steps: List[TransferStep] = []
    vectors: List[Tuple[TransferStep, Dict, Dict]] = []

    try:
        y1 = gather_step(rt, y0, everything=soft)
    except TransferError as exc:
        raise RoundingError("gather", str(exc)) from exc
    _step(steps, vectors, trace, "gather", "G'", 2, 1, verify_transfer(rt.gdist, cap, y0, y1, 2), y0, y1)

    stage = ""
    if soft:
        from .variants import uniform_soft_tree_transfer

        y2 = uniform_soft_tree_transfer(rt, y1)
        on_tree = verify_transfer(rt.tdist, cap, y1, y2, 1)
        _step(steps, vectors, trace, "push", "T'", 1, 10, on_tree and verify_transfer(rt.gdist, cap, y1, y2, 10), y1, y2)
        opened = Counter({a[1]: int(v) for a, v in y2.items() if v})
        stage = "push"
    else:
        y1t = {a: v for a, v in y1.items() if a in set(rt.nodes)}
        if any(v for a, v in y1.items() if a not in y1t):
            raise RoundingError("gather", "anchor kept mass after gathering")
        try:
            tr = tree_transfer(rt, y1t)
        except TransferError as exc:
            raise RoundingError("tree", str(exc)) from exc
        stage = tr.stage
        y2 = {a: Fraction(1) for a in tr.opened}
        on_tree = verify_transfer(rt.tdist, cap, y1t, y2, 2)
        _step(steps, vectors, trace, "tree", "T'", 2, 10, on_tree and verify_transfer(rt.gdist, cap, y1t, y2, 20), y1t, y2)
        if anchors_at_skeleton:
            opened = Counter(a[1] for a in tr.opened)
        else:
            F = finalize_transfer(tr.opened, rt)
            y3 = {fkey(u): Fraction(1) for u in F}
            _step(steps, vectors, trace, "finalize", "G'", 2, 1, verify_transfer(rt.gdist, cap, y2, y3, 2), y2, y3)
            opened = Counter(F)

    total = compose_transfers(steps)
    if total > CHAIN_BOUND[variant]:
        raise RoundingError("compose", f"chain totals {total} > {CHAIN_BOUND[variant]}")
    final = {fkey(u): Fraction(m) for u, m in opened.items()}
    composite = verify_transfer(rt.gdist, cap, y0, final, total)
    if trace is not None:
        trace.append({"event": "chain", "total": total, "verified": bool(composite), "tree_stage": stage})
    vectors.append((TransferStep("composite", "G'", total, 1, bool(composite)), dict(y0), final))
    if not composite:
        raise RoundingError("compose", f"composite transfer fails at distance {total}")
    if sum(opened.values()) != k:
        raise RoundingError("compose", f"opened {sum(opened.values())} facilities, expected {k}")

    assign = match_clients(g, opened, total, p)
    if assign is None:
        raise RoundingError("match", f"cannot serve {p} clients within {total + 1} hops")
    radius = 0
    for u in set(assign.values()):
        d = multi_source_distances(g, [fnode(u)])
        radius = max(radius, max(int(d[cnode(v)]) for v, w in assign.items() if w == u))
    return ComponentSolution(opened, assign, radius, steps, stage, rt, vectors)


def assemble(parts: Sequence[ComponentSolution]) -> Solution:
    """Disjoint union of component solutions."""
    opened: Counter = Counter()
    assign: Dict[str, str] = {}
    for part in parts:
        if set(part.open) & set(opened):
            raise ValueError("components share a facility")
        if set(part.assign) & set(assign):
            raise ValueError("components share a client")
        opened.update(part.open)
        assign.update(part.assign)
    radius = max((part.radius for part in parts), default=0)
    return Solution(assign, opened, radius)
