"""Dense two-phase simplex with Bland's rule.

The same tableau code runs on float64 arrays or on object arrays of
``fractions.Fraction``; the latter is exact and serves as a test oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Mapping, Optional, Sequence

import numpy as np

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7


class SimplexError(RuntimeError):
    """Raised when the iteration limit is hit (never reported as infeasible)."""


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: Optional[list] = None
    objective: Optional[object] = None
    pivots: int = 0


def _as(value, exact: bool):
    if exact:
        return value if isinstance(value, Fraction) else Fraction(value)
    return float(value)


class _Tableau:
    def __init__(self, T: np.ndarray, basis: List[int], exact: bool, max_pivots: int):
        self.T = T
        self.basis = basis
        self.exact = exact
        self.tol = 0 if exact else PIVOT_TOL
        self.pivots = 0
        self.max_pivots = max_pivots

    def pivot(self, r: int, j: int, obj: np.ndarray) -> None:
        T = self.T
        T[r] = T[r] / T[r, j]
        col = T[:, j].copy()
        col[r] = 0
        nz = np.flatnonzero(col != 0)
        if len(nz):
            T[nz] -= np.outer(col[nz], T[r])
        if obj[j] != 0:
            obj -= obj[j] * T[r]
        if not self.exact:
            T[np.abs(T) < 1e-13] = 0.0
        self.basis[r] = j
        self.pivots += 1
        if self.pivots > self.max_pivots:
            raise SimplexError(f"simplex exceeded {self.max_pivots} pivots")

    def run(self, obj: np.ndarray, allowed: np.ndarray) -> str:
        """Minimise with reduced-cost row ``obj`` (last entry holds -value)."""
        T = self.T
        tol = self.tol
        while True:
            candidates = np.flatnonzero((obj[:-1] < -tol) & allowed)
            if not len(candidates):
                return "optimal"
            j = int(candidates[0])  # Bland: smallest index enters
            colj = T[:, j]
            rows = np.flatnonzero(colj > tol)
            if not len(rows):
                return "unbounded"
            ratios = T[rows, -1] / colj[rows]
            best = min(ratios)
            tied = rows[ratios == best] if self.exact else rows[ratios <= best + 1e-12]
            r = int(min(tied, key=lambda i: self.basis[i]))  # Bland: smallest basic leaves
            self.pivot(r, j, obj)


def solve(
    c: Optional[Sequence],
    rows: Sequence[Mapping[int, object]],
    senses: Sequence[str],
    rhs: Sequence,
    n: int,
    exact: bool = False,
    max_pivots: Optional[int] = None,
) -> LPResult:
    """Minimise ``c @ x`` subject to ``rows[i] . x (senses[i]) rhs[i]`` and ``x >= 0``.

    ``rows`` are sparse ``{column: coefficient}`` maps.  With ``c=None`` only
    feasibility is decided (phase one).
    """
    m = len(rows)
    coefs = []
    norm_senses = []
    b = []
    for row, sense, r in zip(rows, senses, rhs):
        r = _as(r, exact)
        row = {j: _as(a, exact) for j, a in row.items() if a != 0}
        if r < 0:
            row = {j: -a for j, a in row.items()}
            r = -r
            sense = {"<=": ">=", ">=": "<=", "=": "="}[sense]
        coefs.append(row)
        norm_senses.append(sense)
        b.append(r)

    n_slack = sum(1 for s in norm_senses if s != "=")
    art_rows = [i for i, s in enumerate(norm_senses) if s != "<="]
    ncol = n + n_slack + len(art_rows)
    dtype = object if exact else float
    zero = Fraction(0) if exact else 0.0
    T = np.full((m, ncol + 1), zero, dtype=dtype)
    basis = [-1] * m
    slack = n
    art = n + n_slack
    for i, (row, sense) in enumerate(zip(coefs, norm_senses)):
        for j, a in row.items():
            T[i, j] = a
        T[i, -1] = b[i]
        if sense == "<=":
            T[i, slack] = _as(1, exact)
            basis[i] = slack
            slack += 1
        elif sense == ">=":
            T[i, slack] = _as(-1, exact)
            slack += 1
    for i in art_rows:
        T[i, art] = _as(1, exact)
        basis[i] = art
        art += 1

    if max_pivots is None:
        max_pivots = 50 * (m + ncol) + 1000
    tab = _Tableau(T, basis, exact, max_pivots)
    is_art = np.zeros(ncol, dtype=bool)
    is_art[n + n_slack:] = True

    # phase one: minimise the sum of artificials
    obj = np.full(ncol + 1, zero, dtype=dtype)
    for i in art_rows:
        obj = obj - T[i]
    obj[is_art.nonzero()[0]] = zero
    if art_rows:
        tab.run(obj, np.ones(ncol, dtype=bool))
        infeas = -obj[-1]
        if infeas > (0 if exact else FEAS_TOL):
            return LPResult("infeasible", pivots=tab.pivots)
        # drive zero-level artificials out of the basis; drop redundant rows
        keep = []
        for i in range(m):
            if is_art[tab.basis[i]]:
                nz = np.flatnonzero((np.abs(T[i, :ncol]) > tab.tol) & ~is_art) if not exact else np.flatnonzero((T[i, :ncol] != 0) & ~is_art)
                if len(nz):
                    tab.pivot(i, int(nz[0]), obj)
                    keep.append(i)
            else:
                keep.append(i)
        if len(keep) < m:
            tab.T = T = T[keep]
            tab.basis = [tab.basis[i] for i in keep]

    if c is None:
        x = _extract(tab, n, exact)
        return LPResult("optimal", x=x, objective=zero, pivots=tab.pivots)

    allowed = ~is_art
    cost = np.full(ncol + 1, zero, dtype=dtype)
    for j, cj in enumerate(c):
        cost[j] = _as(cj, exact)
    obj = cost.copy()
    for i, j in enumerate(tab.basis):
        if cost[j] != 0:
            obj = obj - cost[j] * tab.T[i]
    status = tab.run(obj, allowed)
    if status != "optimal":
        return LPResult(status, pivots=tab.pivots)
    x = _extract(tab, n, exact)
    value = sum((_as(cj, exact) * xj for cj, xj in zip(c, x)), zero)
    return LPResult("optimal", x=x, objective=value, pivots=tab.pivots)


def _extract(tab: _Tableau, n: int, exact: bool) -> list:
    zero = Fraction(0) if exact else 0.0
    x = [zero] * n
    for i, j in enumerate(tab.basis):
        if j < n:
            x[j] = tab.T[i, -1]
    if not exact:
        x = [max(0.0, float(v)) for v in x]
    return x
