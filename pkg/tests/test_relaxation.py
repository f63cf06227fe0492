import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from capkcenter import simplex
from capkcenter.generators import gen_gap, gen_random
from capkcenter.oracle import exact_opt
from capkcenter.model import MetricInstance, hop_metric
from capkcenter.relaxation import (
    EPS_FEAS,
    Constraint,
    FeasibilityCache,
    LPModel,
    LPSolverError,
    build_lp,
    lp_feasible,
    max_service,
    scale_service,
)
from capkcenter.skeleton import cap_truncate, skeleton_candidates

from conftest import graph


def test_single_facility_model_forces_ones():
    g = graph([("c", "f")], {"f": 1})
    m = build_lp(g, ["f"], 1, 1)
    assert len(m.variables) == 2
    pt = lp_feasible(m, exact=True)
    assert pt.y == {"f": 1} and pt.x == {("c", "f"): 1}


def test_empty_skeleton_has_no_ball_rows():
    g = graph([("c", "f")], {"f": 1})
    m = build_lp(g, [], 1, 1)
    assert not any(c.name.startswith("near") for c in m.constraints)


def test_gap_model_and_explicit_point():
    g, S = gen_gap(2)
    m = build_lp(g, S, 3, 48)
    assert sum(1 for v in m.variables if v[0] == "y") == 6
    point = []
    for var in m.variables:
        if var[0] == "y":
            point.append(Fraction(3, 4) if var[1].startswith("f") else Fraction(0))
        else:
            _, v, u = var
            side = u[1] if u.startswith("f") else None
            point.append(Fraction(1, 2) if side and v.startswith(f"c{side}_") else Fraction(0))
    assert m.residual(point) == 0
    assert lp_feasible(m) is not None


def test_capacity_makes_infeasible():
    g = graph([("c", "f"), ("d", "f")], {"f": 1})
    assert lp_feasible(build_lp(g, ["f"], 1, 2)) is None
    assert lp_feasible(build_lp(g, ["f"], 1, 2), exact=True) is None


def test_zero_model_is_feasible():
    g = graph([("c", "f"), ("d", "g")], {"f": 1, "g": 2})
    pt = lp_feasible(build_lp(g, [], 0, 0))
    assert all(v == 0 for v in pt.y.values()) and all(v == 0 for v in pt.x.values())


def test_uncapped_y_for_soft():
    g = graph([("c", "f"), ("d", "f")], {"f": 1})
    assert lp_feasible(build_lp(g, ["f"], 2, 2, y_upper=False)) is not None
    assert lp_feasible(build_lp(g, ["f"], 2, 2, y_upper=True)) is None


def test_dump_lists_every_constraint():
    g = graph([("c", "f")], {"f": 3})
    m = build_lp(g, ["f"], 1, 1)
    text = m.dump()
    for c in m.constraints:
        assert f"{c.name}:" in text
    assert "cap[f]: -3*y[f] + x[f,c] <= 0" in text


def test_pivot_limit_surfaces_as_error(monkeypatch):
    with pytest.raises(simplex.SimplexError):
        simplex.solve([1, 1], [{0: 1, 1: 1}], [">="], [1], 2, max_pivots=0)
    g = graph([("c", "f")], {"f": 1})
    m = build_lp(g, ["f"], 1, 1)
    original = simplex.solve
    monkeypatch.setattr(simplex, "solve", lambda *a, **k: original(*a, **dict(k, max_pivots=0)))
    with pytest.raises(LPSolverError):
        lp_feasible(m)


def test_simplex_small_optimum():
    # max x + y s.t. x + 2y <= 4, 3x + y <= 6
    res = simplex.solve([-1, -1], [{0: 1, 1: 2}, {0: 3, 1: 1}], ["<=", "<="], [4, 6], 2, exact=True)
    assert res.status == "optimal" and res.x == [Fraction(8, 5), Fraction(6, 5)]


def random_model(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 12)
    cons = []
    for i in range(rng.randint(1, 8)):
        coefs = {j: rng.randint(-3, 3) for j in rng.sample(range(n), rng.randint(1, n))}
        sense = rng.choice(["<=", ">=", "="])
        cons.append(Constraint(f"r{i}", coefs, sense, rng.randint(-4, 6)))
    upper = {j: float(rng.randint(1, 3)) for j in range(n) if rng.random() < 0.5}
    return LPModel([("y", str(j)) for j in range(n)], cons, upper)


def scipy_feasible(m: LPModel) -> bool:
    n = len(m.variables)
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for c in m.constraints:
        row = np.zeros(n)
        for j, a in c.coefs.items():
            row[j] = a
        if c.sense == "<=":
            A_ub.append(row), b_ub.append(c.rhs)
        elif c.sense == ">=":
            A_ub.append(-row), b_ub.append(-c.rhs)
        else:
            A_eq.append(row), b_eq.append(c.rhs)
    bounds = [(0, m.upper.get(j)) for j in range(n)]
    res = linprog(
        np.zeros(n),
        A_ub=np.array(A_ub) if A_ub else None,
        b_ub=b_ub or None,
        A_eq=np.array(A_eq) if A_eq else None,
        b_eq=b_eq or None,
        bounds=bounds,
        method="highs",
    )
    return res.status == 0


@given(seed=st.integers(0, 10**6))
def test_float_exact_and_highs_agree(seed):
    m = random_model(seed)
    f = lp_feasible(m)
    e = lp_feasible(m, exact=True)
    assert (f is None) == (e is None) == (not scipy_feasible(m))
    if f is not None:
        assert f.residual <= EPS_FEAS and e.residual == 0


@pytest.mark.parametrize("seed", range(25))
def test_service_maximum_decides_feasibility(seed):
    """Feasible service levels for fixed k are exactly [0, max]."""
    rng = random.Random(seed)
    g = cap_truncate(gen_random(rng.randint(2, 9), rng.randint(2, 5), 1, 1, (0, 4), "graph", seed, density=0.3))
    S = skeleton_candidates(g, 2)[-1]
    for k in range(len(S), len(g.facilities) + 1):
        best = max_service(g, S, k, exact=True)
        for p in range(0, len(g.clients) + 1):
            feasible = lp_feasible(build_lp(g, S, k, p), exact=True) is not None
            assert feasible == (best is not None and best[0] >= p)
        if best is not None and best[0] > 0:
            scaled = scale_service(best[1], Fraction(int(best[0])))
            assert sum(scaled.x.values()) == int(best[0])


@pytest.mark.parametrize("seed", range(20))
def test_integral_witness_is_feasible(seed):
    """A distance-1 solution hitting every 2-ball around S is an LP point."""
    rng = random.Random(seed)
    g = gen_random(rng.randint(3, 10), rng.randint(2, 5), 0, 0, (1, 4), "graph", seed, density=0.3)
    inst = hop_metric(g)
    checked = 0
    for k in range(1, len(g.facilities) + 1):
        for p in range(1, len(g.clients) + 1):
            res = exact_opt(MetricInstance(inst.clients, inst.capacities, inst.points, inst.matrix, k, p))
            if res.opt != 1:
                continue
            F = sorted(res.witness.open)
            S = F[:1]
            m = build_lp(g, S, k, p)
            col = m.column
            point = [Fraction(0)] * len(m.variables)
            for u in F:
                point[col["y", u]] = Fraction(1)
            for v, u in res.witness.assign.items():
                point[col["x", v, u]] = Fraction(1)
            assert m.residual(point) == 0
            checked += 1
    assert checked >= 1  # k = p = 1 always has a distance-1 solution here


def test_cache_counts_solves():
    g = graph([("c", "f"), ("d", "g")], {"f": 1, "g": 1})
    cache = FeasibilityCache()
    a = cache.max_service("key", g, ["f"], 1)
    b = cache.max_service("key", g, ["f"], 1)
    assert a is b and cache.solves == 1
