import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from capkcenter.formats import instance_to_json
from capkcenter.generators import gen_gap, gen_random
from capkcenter.model import hop_metric, validate_metric, verify_solution
from capkcenter.oracle import OracleBudgetError, count_opening_sets, exact_opt, feasible_at
from capkcenter.relaxation import build_lp, lp_feasible
from capkcenter.thresholding import candidate_thresholds

from conftest import brute_opt, matrix_instance


def test_single_client_at_five():
    inst = matrix_instance(["c", "f"], [[0, 5], [5, 0]], ["c"], {"f": 1}, 1, 1)
    res = exact_opt(inst)
    assert res.opt == 5 and res.witness.assign == {"c": "f"}


def test_p_zero_is_radius_zero():
    inst = matrix_instance(["c", "f"], [[0, 5], [5, 0]], ["c"], {"f": 1}, 1, 0)
    assert exact_opt(inst).opt == 0


def test_infeasible_reports_none():
    inst = matrix_instance(["c", "d", "f"], [[0, 1, 1], [1, 0, 1], [1, 1, 0]], ["c", "d"], {"f": 1}, 1, 2)
    res = exact_opt(inst)
    assert not res.feasible and res.witness is None


def test_zero_capacity_padding():
    inst = matrix_instance(["c", "f", "z"], [[0, 2, 1], [2, 0, 1], [1, 1, 0]], ["c"], {"f": 1, "z": 0}, 2, 1)
    res = exact_opt(inst)
    assert res.opt == 2 and set(res.witness.open) == {"f", "z"}


def test_gap_facts():
    g, S = gen_gap(2)
    assert (g.k, g.p) == (3, 48)
    assert set(g.capacities.values()) == {16} and len(g.facilities) == 6
    assert S == ("f11", "f21") and g.facility_distances["f11"]["f21"] == 6
    assert len(g.clients) == 48 + 3  # two sides of 24 plus c1, pc2, c2 on the path


def test_gap_lp_point_and_no_distance_two_solution():
    g, S = gen_gap(2)
    m = build_lp(g, S, 3, 48)
    assert lp_feasible(m) is not None and lp_feasible(m, exact=True) is not None
    inst = hop_metric(g)
    ok, checked = feasible_at(inst, 2)
    assert not ok and checked == 20


def test_gap_three():
    g, _ = gen_gap(3)
    assert (g.p, len(g.facilities)) == (72, 7)
    ok, checked = feasible_at(hop_metric(g), 3)
    assert not ok and checked == 35


def test_gap_needs_r_two():
    with pytest.raises(ValueError):
        gen_gap(1)


def test_generators_are_deterministic():
    a = gen_random(6, 4, 2, 3, (0, 4), "metric", 11)
    b = gen_random(6, 4, 2, 3, (0, 4), "metric", 11)
    assert instance_to_json(a) == instance_to_json(b)
    g1 = gen_random(6, 4, 2, 3, (0, 4), "graph", 11)
    g2 = gen_random(6, 4, 2, 3, (0, 4), "graph", 11)
    assert g1.edges == g2.edges and g1.capacities == g2.capacities


@given(seed=st.integers(0, 10**6))
def test_metric_model_is_valid(seed):
    inst = gen_random(5, 4, 2, 3, (0, 4), "metric", seed)
    assert validate_metric(inst) == []


@given(seed=st.integers(0, 10**6))
def test_connected_graph_model(seed):
    g = gen_random(6, 4, 1, 1, (0, 4), "graph", seed, density=0.0)
    inst = hop_metric(g)
    assert np.isfinite(inst.matrix).all()


def test_eight_choose_three():
    inst = gen_random(4, 8, 3, 2, (1, 4), "metric", 0)
    assert count_opening_sets(inst) == 56


def test_budget_refusal():
    inst = gen_random(4, 8, 3, 2, (1, 4), "metric", 0)
    with pytest.raises(OracleBudgetError):
        exact_opt(inst, budget=10)
    with pytest.raises(OracleBudgetError):
        feasible_at(inst, 5, budget=10)


@pytest.mark.parametrize("bad", [dict(p=9), dict(k=9), dict(cap_range=(3, 1))])
def test_generator_rejects_bad_parameters(bad):
    args = dict(nC=4, nF=3, k=2, p=2, cap_range=(0, 3))
    args.update(bad)
    with pytest.raises(ValueError):
        gen_random(**args)


@pytest.mark.parametrize("seed", range(40))
def test_oracle_against_brute_force(seed):
    rng = random.Random(seed)
    soft = rng.random() < 0.4
    nC, nF = rng.randint(1, 5), rng.randint(1, 3)
    k = rng.randint(0, 3) if soft else rng.randint(0, nF)
    inst = gen_random(nC, nF, k, rng.randint(0, nC), (0, 3), "metric", seed, grid=9,
                      capacity_mode="soft" if soft else "hard")
    res = exact_opt(inst)
    assert res.opt == brute_opt(inst)
    if res.feasible:
        assert verify_solution(inst, res.witness, res.opt, soft=soft) == []
        T = candidate_thresholds(inst)
        smaller = [t for t in T if t < res.opt]
        if smaller:
            assert not feasible_at(inst, smaller[-1])[0]
