"""The strengthened LP relaxation with one neighbourhood constraint per skeleton vertex."""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from . import simplex
from .model import GraphInstance

EPS_FEAS = 1e-7

Var = Tuple  # ("y", u) or ("x", v, u)


class LPSolverError(RuntimeError):
    pass


@dataclass
class Constraint:
    name: str
    coefs: Dict[int, float]
    sense: str
    rhs: float


@dataclass
class LPModel:
    """Sparse constraint system over named variables, all implicitly >= 0."""

    variables: List[Var]
    constraints: List[Constraint]
    upper: Dict[int, float] = field(default_factory=dict)
    objective: Optional[Dict[int, float]] = None  # minimised when present

    @property
    def column(self) -> Dict[Var, int]:
        return {v: j for j, v in enumerate(self.variables)}

    def dump(self) -> str:
        """Human-readable listing, one constraint per line."""

        def term(j, a):
            name = _var_name(self.variables[j])
            return name if a == 1 else f"-{name}" if a == -1 else f"{a:g}*{name}"

        lines = [f"# {len(self.variables)} variables, {len(self.constraints)} constraints"]
        if self.objective:
            lines.append("minimise " + " + ".join(term(j, a) for j, a in sorted(self.objective.items())))
        for c in self.constraints:
            lhs = " + ".join(term(j, a) for j, a in sorted(c.coefs.items())) or "0"
            lines.append(f"{c.name}: {lhs} {c.sense} {c.rhs:g}")
        for j, var in enumerate(self.variables):
            ub = self.upper.get(j)
            bound = f"<= {ub:g}" if ub is not None else ("<= 1 (via once)" if var[0] == "x" else "")
            lines.append(f"bound: 0 <= {_var_name(var)} {bound}".rstrip())
        return "\n".join(lines)

    def residual(self, values: Sequence[float]) -> float:
        """Largest constraint or bound violation of a point (0 when feasible)."""
        worst = 0.0
        for v in values:
            worst = max(worst, -float(v))
        for j, ub in self.upper.items():
            worst = max(worst, float(values[j]) - ub)
        for c in self.constraints:
            lhs = sum(a * values[j] for j, a in c.coefs.items())
            gap = float(lhs - c.rhs)
            if c.sense == "<=":
                worst = max(worst, gap)
            elif c.sense == ">=":
                worst = max(worst, -gap)
            else:
                worst = max(worst, abs(gap))
        return worst


def _var_name(var: Var) -> str:
    return f"y[{var[1]}]" if var[0] == "y" else f"x[{var[2]},{var[1]}]"


@dataclass
class FractionalPoint:
    y: Dict[str, float]
    x: Dict[Tuple[str, str], float]  # keyed by (client, facility)
    residual: float = 0.0


def build_lp(
    g: GraphInstance,
    S: Sequence[str],
    k: int,
    p: Optional[int],
    y_upper: bool = True,
    maximise_service: bool = False,
) -> LPModel:
    """Assemble the relaxation for opening ``k`` facilities that serve ``p`` clients.

    x variables exist only for graph edges, so non-edges are fixed at zero by
    construction.  With ``p=None`` the service equality is dropped, which
    together with ``maximise_service`` gives the largest fractional service.
    ``y_upper=False`` drops the y <= 1 bound (soft capacities).
    """
    variables: List[Var] = [("y", u) for u in g.facilities]
    edges = sorted(g.edges)
    variables += [("x", v, u) for v, u in edges]
    col = {var: j for j, var in enumerate(variables)}
    cons: List[Constraint] = []

    cons.append(Constraint("open", {col["y", u]: 1 for u in g.facilities}, "=", k))
    xs = {col["x", v, u]: 1 for v, u in edges}
    if p is not None:
        cons.append(Constraint("serve", dict(xs), "=", p))
    for v, u in edges:
        cons.append(Constraint(f"link[{v},{u}]", {col["x", v, u]: 1, col["y", u]: -1}, "<=", 0))
    by_fac: Dict[str, List[int]] = {u: [] for u in g.facilities}
    by_client: Dict[str, List[int]] = {v: [] for v in g.clients}
    for v, u in edges:
        by_fac[u].append(col["x", v, u])
        by_client[v].append(col["x", v, u])
    for u in g.facilities:
        row = {j: 1 for j in by_fac[u]}
        row[col["y", u]] = -g.capacities[u]
        cons.append(Constraint(f"cap[{u}]", row, "<=", 0))
    for v in g.clients:
        if by_client[v]:
            cons.append(Constraint(f"once[{v}]", {j: 1 for j in by_client[v]}, "<=", 1))
    for s in S:
        cons.append(Constraint(f"near[{s}]", {col["y", u]: 1 for u in g.ball(s, 2)}, ">=", 1))
    upper = {col["y", u]: 1.0 for u in g.facilities} if y_upper else {}
    objective = {j: -1 for j in xs} if maximise_service else None
    return LPModel(variables, cons, upper, objective)


def _standard_rows(m: LPModel):
    rows = [c.coefs for c in m.constraints]
    senses = [c.sense for c in m.constraints]
    rhs = [c.rhs for c in m.constraints]
    for j, ub in m.upper.items():
        rows.append({j: 1})
        senses.append("<=")
        rhs.append(ub)
    return rows, senses, rhs


def _solve(m: LPModel, exact: bool) -> simplex.LPResult:
    rows, senses, rhs = _standard_rows(m)
    c = None
    if m.objective is not None:
        c = [0] * len(m.variables)
        for j, a in m.objective.items():
            c[j] = a
    try:
        return simplex.solve(c, rows, senses, rhs, len(m.variables), exact=exact)
    except simplex.SimplexError as exc:
        raise LPSolverError(str(exc)) from exc


def _point(m: LPModel, values: Sequence) -> FractionalPoint:
    y, x = {}, {}
    for var, val in zip(m.variables, values):
        if var[0] == "y":
            y[var[1]] = val
        else:
            x[var[1], var[2]] = val
    return FractionalPoint(y, x, m.residual(values))


def lp_feasible(m: LPModel, exact: bool = False) -> Optional[FractionalPoint]:
    """Feasible point of ``m`` or ``None`` when the model is infeasible.

    Float mode accepts points whose worst residual is at most ``EPS_FEAS``;
    ``exact=True`` runs the same simplex over rationals.
    """
    res = _solve(LPModel(m.variables, m.constraints, m.upper, None), exact)
    if res.status == "infeasible":
        return None
    if res.status != "optimal":
        raise LPSolverError(f"phase one ended with status {res.status}")
    pt = _point(m, res.x)
    if pt.residual > (0 if exact else EPS_FEAS):
        raise LPSolverError(f"solver point violates the model by {pt.residual:.3g}")
    return pt


def max_service(
    g: GraphInstance, S: Sequence[str], k: int, y_upper: bool = True, exact: bool = False
) -> Optional[Tuple[float, FractionalPoint]]:
    """Largest total fractional service with exactly ``k`` (fractional) openings.

    The feasible service levels for fixed ``k`` form the interval ``[0, max]``:
    scaling x down keeps every constraint, so this single solve answers all
    feasibility queries for that ``k``.
    """
    m = build_lp(g, S, k, None, y_upper=y_upper, maximise_service=True)
    res = _solve(m, exact)
    if res.status == "infeasible":
        return None
    if res.status != "optimal":
        raise LPSolverError(f"service maximisation ended with status {res.status}")
    pt = _point(m, res.x)
    if pt.residual > (0 if exact else EPS_FEAS):
        raise LPSolverError(f"solver point violates the model by {pt.residual:.3g}")
    return -res.objective, pt


def scale_service(pt: FractionalPoint, p: float) -> FractionalPoint:
    """Shrink the x part of a max-service point to total ``p``."""
    total = sum(pt.x.values())
    f = (p / total) if total else 0
    return FractionalPoint(dict(pt.y), {e: v * f for e, v in pt.x.items()}, pt.residual)


class FeasibilityCache:
    """Thread-safe memo of service maxima keyed by (component, skeleton, k)."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._data: Dict[Hashable, Optional[Tuple[float, FractionalPoint]]] = {}
        self.solves = 0

    def max_service(self, key: Hashable, g: GraphInstance, S, k: int, y_upper: bool = True, exact: bool = False):
        full = (key, tuple(S), k, y_upper, exact)
        with self._lock:
            if full in self._data:
                return self._data[full]
        out = max_service(g, S, k, y_upper=y_upper, exact=exact)
        with self._lock:
            self._data[full] = out
            self.solves += 1
        return out
