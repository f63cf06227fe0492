"""JSON reading and writing of instances and solutions."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Dict, Mapping, Union

import numpy as np

from .model import GraphInstance, MetricInstance, Solution, hop_metric

Instance = Union[MetricInstance, GraphInstance]


class InstanceFormatError(ValueError):
    """The JSON document does not describe a valid instance or solution."""


def _number(x: Any, where: str) -> float:
    if isinstance(x, str) and x.lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InstanceFormatError(f"{where}: expected a number, got {x!r}")
    return float(x)


def _int(x: Any, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise InstanceFormatError(f"{where}: expected an integer, got {x!r}")
    return x


def parse_instance(data: Mapping[str, Any]) -> Instance:
    """Build an instance from the decoded JSON object.

    Graph metrics give a ``GraphInstance`` whose k and p come from the file and
    whose ids must not be shared between clients and facilities.
    """
    if not isinstance(data, Mapping):
        raise InstanceFormatError("instance must be a JSON object")
    try:
        mode = data.get("mode", "supplier")
        cap_mode = data.get("capacity_mode", "hard")
        k = _int(data["k"], "k")
        p = _int(data["p"], "p")
        clients = [str(v) for v in data["clients"]]
        caps = {}
        for i, f in enumerate(data["facilities"]):
            caps[str(f["id"])] = _int(f["cap"], f"facilities[{i}].cap")
        metric = data["metric"]
        kind = metric["type"]
    except KeyError as exc:
        raise InstanceFormatError(f"missing field {exc.args[0]!r}") from exc
    except TypeError as exc:
        raise InstanceFormatError(f"malformed instance: {exc}") from exc
    if len(set(clients)) != len(clients):
        raise InstanceFormatError("duplicate client ids")
    if len(caps) != len(data["facilities"]):
        raise InstanceFormatError("duplicate facility ids")

    if kind == "graph":
        if mode != "supplier" or cap_mode not in ("hard", "soft"):
            raise InstanceFormatError("graph metrics support supplier mode only")
        try:
            edges = frozenset((str(v), str(u)) for v, u in metric["edges"])
            return GraphInstance(tuple(clients), caps, edges, k, p, capacity_mode=cap_mode)
        except (ValueError, TypeError) as exc:
            raise InstanceFormatError(f"metric.edges: {exc}") from exc
    if kind != "matrix":
        raise InstanceFormatError(f"unknown metric type {kind!r}")
    order = [str(a) for a in metric.get("order", [])]
    values = metric.get("values")
    if not isinstance(values, list) or len(values) != len(order):
        raise InstanceFormatError("metric.values must be a square list matching metric.order")
    m = np.empty((len(order), len(order)))
    for i, row in enumerate(values):
        if not isinstance(row, list) or len(row) != len(order):
            raise InstanceFormatError(f"metric.values[{i}] has the wrong length")
        for j, x in enumerate(row):
            m[i, j] = _number(x, f"metric.values[{i}][{j}]")
    try:
        return MetricInstance(tuple(clients), caps, tuple(order), m, k, p, mode=mode, capacity_mode=cap_mode)
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from exc


def as_metric(inst: Instance) -> MetricInstance:
    """Metric view of an instance; graphs become their hop-distance metric."""
    if isinstance(inst, MetricInstance):
        return inst
    if set(inst.clients) & set(inst.facilities):
        raise InstanceFormatError("graph instances need distinct client and facility ids")
    return hop_metric(inst)


def instance_to_json(inst: Instance) -> Dict[str, Any]:
    if isinstance(inst, GraphInstance):
        return {
            "mode": "supplier",
            "capacity_mode": inst.capacity_mode,
            "k": inst.k,
            "p": inst.p,
            "clients": list(inst.clients),
            "facilities": [{"id": u, "cap": L} for u, L in inst.capacities.items()],
            "metric": {"type": "graph", "edges": [[v, u] for v, u in sorted(inst.edges)]},
        }
    values = [[_encode(x) for x in row] for row in inst.matrix.tolist()]
    return {
        "mode": inst.mode,
        "capacity_mode": inst.capacity_mode,
        "k": inst.k,
        "p": inst.p,
        "clients": list(inst.clients),
        "facilities": [{"id": u, "cap": L} for u, L in inst.capacities.items()],
        "metric": {"type": "matrix", "order": list(inst.points), "values": values},
    }


def _encode(x: float):
    if not math.isfinite(x):
        return "inf"
    return int(x) if x.is_integer() else x


def parse_solution(data: Mapping[str, Any]) -> Solution:
    try:
        return Solution.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"malformed solution: {exc}") from exc


def read_json(path: Union[str, Path]) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def load_instance(path: Union[str, Path]) -> Instance:
    return parse_instance(read_json(path))


def load_solution(path: Union[str, Path]) -> Solution:
    return parse_solution(read_json(path))


def write_json(obj: Any, path: Union[str, Path, None]) -> str:
    text = json.dumps(obj, indent=2, sort_keys=False)
    if path is not None and str(path) != "-":
        Path(path).write_text(text + "\n")
    return text
