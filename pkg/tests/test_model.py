import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from capkcenter.formats import instance_to_json, parse_instance
from capkcenter.generators import gen_gap, gen_random
from capkcenter.model import (
    GraphInstance,
    Solution,
    cnode,
    fnode,
    hop_metric,
    multi_source_distances,
    validate_metric,
    verify_solution,
)

from conftest import graph, matrix_instance


def test_symmetric_pair_is_valid():
    inst = matrix_instance(["a", "b"], [[0, 3], [3, 0]], ["a"], {"b": 1}, 1, 1)
    assert validate_metric(inst) == []


def test_triangle_violation_reported():
    rows = [[0, 1, 5], [1, 0, 1], [5, 1, 0]]
    inst = matrix_instance(["a", "b", "c"], rows, ["a"], {"c": 1}, 1, 1)
    problems = validate_metric(inst)
    assert any("triangle" in p for p in problems)


@pytest.mark.parametrize(
    "rows, needle",
    [
        ([[0, -1], [-1, 0]], "negative"),
        ([[0, 2], [3, 0]], "asymmetric"),
        ([[1, 2], [2, 0]], "!= 0"),
        ([[0, float("nan")], [float("nan"), 0]], "NaN"),
    ],
)
def test_metric_defects(rows, needle):
    inst = matrix_instance(["a", "b"], rows, ["a"], {"b": 1}, 1, 1)
    assert any(needle in p for p in validate_metric(inst, check_triangle=False))


def test_gap_instance_metric_is_valid():
    g, _ = gen_gap(2)
    assert validate_metric(hop_metric(g)) == []


def test_range_checks():
    inst = matrix_instance(["a", "b"], [[0, 1], [1, 0]], ["a"], {"b": 1}, 2, 3)
    problems = validate_metric(inst)
    assert any("p=3" in p for p in problems) and any("k=2" in p for p in problems)


def _single():
    return graph([("c", "f")], {"f": 1}, k=1, p=1)


def test_single_assignment_valid_at_one():
    sol = Solution({"c": "f"}, Counter({"f": 1}), 1)
    assert verify_solution(_single(), sol, 1) == []


def test_zero_capacity_violation():
    g = graph([("c", "f")], {"f": 0}, k=1, p=1)
    sol = Solution({"c": "f"}, Counter({"f": 1}), 1)
    assert any("capacity" in p for p in verify_solution(g, sol, 1))


def test_cardinality_violation():
    g = graph([("c", "f"), ("d", "f")], {"f": 2}, k=1, p=2)
    sol = Solution({"c": "f"}, Counter({"f": 1}), 1)
    assert any("expected p=2" in p for p in verify_solution(g, sol, 1))


def test_unknown_ids_reported():
    sol = Solution({"zz": "f"}, Counter({"f": 1}), 1)
    assert any("unknown client" in p for p in verify_solution(_single(), sol, 1))


def test_hard_multiplicity_and_radius():
    g = graph([("c", "f"), ("c", "g"), ("d", "g")], {"f": 1, "g": 1}, k=2, p=1)
    sol = Solution({"d": "g"}, Counter({"f": 2}), 1)
    problems = verify_solution(g, sol, 1)
    assert any("opened 2 times" in p for p in problems)
    assert any("closed facility" in p for p in problems)
    far = Solution({"d": "f"}, Counter({"f": 1, "g": 1}), 3)
    assert any("exceeds" in p for p in verify_solution(g, far, 1))


def test_path_distances():
    g = graph([("c", "f"), ("c2", "f")], {"f": 1})
    d = multi_source_distances(g, [fnode("f")])
    assert d[cnode("c")] == 1 and d[cnode("c2")] == 1 and d[fnode("f")] == 0


def test_disconnected_is_infinite_and_empty_source():
    g = graph([("c", "f")], {"f": 1, "lonely": 1})
    assert multi_source_distances(g, [fnode("f")])[fnode("lonely")] == math.inf
    assert all(v == math.inf for v in multi_source_distances(g, []).values())


def test_star_leaves_at_one():
    g = graph([(f"c{i}", "f") for i in range(7)], {"f": 1})
    d = multi_source_distances(g, [fnode("f")])
    assert all(d[cnode(f"c{i}")] == 1 for i in range(7))


@given(seed=st.integers(0, 10**6), n_src=st.integers(1, 4))
def test_multi_source_is_min_of_single(seed, n_src):
    g = gen_random(12, 8, 1, 1, (1, 3), "graph", seed, density=0.15, connected=False)
    sources = [fnode(u) for u in g.facilities[:n_src]]
    multi = multi_source_distances(g, sources)
    singles = [multi_source_distances(g, [s]) for s in sources]
    assert all(multi[a] == min(d[a] for d in singles) for a in g.nodes)


def test_instance_json_roundtrip():
    inst = gen_random(5, 3, 2, 3, (0, 4), "metric", 7)
    back = parse_instance(instance_to_json(inst))
    assert back.clients == inst.clients and back.capacities == inst.capacities
    assert np.array_equal(back.matrix, inst.matrix)
    g, _ = gen_gap(2)
    gb = parse_instance(instance_to_json(g))
    assert isinstance(gb, GraphInstance) and gb.edges == g.edges and (gb.k, gb.p) == (3, 48)


def test_solution_json_roundtrip():
    sol = Solution({"a": "f", "b": "g"}, Counter({"f": 2, "g": 1}), 4.5)
    back = Solution.from_json(sol.to_json())
    assert back.assign == sol.assign and back.open == sol.open and back.radius == 4.5
