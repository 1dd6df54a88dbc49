"""JSON serialization of instances and result reports."""

from __future__ import annotations

import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from .errors import NetworkFormatError
from .network import CachingNetwork

__all__ = [
    "NETWORK_SCHEMA",
    "REPORT_SCHEMA",
    "network_from_dict",
    "network_to_dict",
    "load_network",
    "dump_network",
    "to_jsonable",
    "dumps",
]

_ID = {"type": ["string", "integer"]}
_NUM = {"type": "number"}

NETWORK_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["nodes", "edges", "items", "capacities", "servers", "rates"],
    "properties": {
        "meta": {"type": "object"},
        "nodes": {"type": "array", "items": _ID},
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["from", "to", "cost"],
                "properties": {"from": _ID, "to": _ID, "cost": _NUM},
            },
        },
        "items": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id"],
                "properties": {"id": _ID, "size": _NUM},
            },
        },
        "capacities": {"type": "object", "additionalProperties": _NUM},
        "servers": {
            "type": "object",
            "additionalProperties": {"type": "array", "items": _ID, "minItems": 1},
        },
        "rates": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["node", "item", "lambda"],
                "properties": {"node": _ID, "item": _ID, "lambda": _NUM},
            },
        },
        "paths": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["node", "item", "path"],
                "properties": {
                    "node": _ID,
                    "item": _ID,
                    "path": {"type": "array", "items": _ID, "minItems": 1},
                },
            },
        },
    },
}

_OPT_NUM = {"type": ["number", "null"]}
_FLAG = {"enum": ["satisfied", "violated", "not_applicable", "not_checkable"]}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": [
        "welfare_ne_worst", "welfare_ne_best", "n_equilibria", "equilibria_source",
        "welfare_opt_exact", "welfare_opt_upper", "poa_exact", "ratio_upper",
        "poa_lower_bound_thm5", "poa_lower_bound_thm6", "poa_lower_bound_thm8",
        "delta_g", "delta_defined", "alpha", "beta", "properties", "bound_flags",
    ],
    "properties": {
        "welfare_ne_worst": _OPT_NUM,
        "welfare_ne_best": _OPT_NUM,
        "n_equilibria": {"type": "integer", "minimum": 0},
        "equilibria_source": {"type": "string"},
        "welfare_opt_exact": _OPT_NUM,
        "welfare_opt_upper": _NUM,
        "poa_exact": _OPT_NUM,
        "ratio_upper": _OPT_NUM,
        "poa_lower_bound_thm5": _NUM,
        "poa_lower_bound_thm6": _NUM,
        "poa_lower_bound_thm8": _NUM,
        "delta_g": {"type": "number", "minimum": 0, "maximum": 1},
        "delta_defined": {"type": "boolean"},
        "alpha": {"type": "integer", "minimum": 1},
        "beta": {"type": "number", "minimum": 1},
        "properties": {"type": "object", "additionalProperties": {"type": "boolean"}},
        "bound_flags": {"type": "object", "additionalProperties": _FLAG},
    },
}


def _num(x):
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2**53 else x


def network_to_dict(net: CachingNetwork, meta: dict | None = None) -> dict:
    """Plain-JSON form of ``net``; every path is written out explicitly."""
    N, It = net.nodes, net.items
    d = {}
    if meta:
        d["meta"] = meta
    d.update({
        "nodes": list(N),
        "edges": [{"from": N[u], "to": N[v], "cost": _num(w)} for (u, v), w in net.edges.items()],
        "items": [{"id": It[i], "size": _num(net.sizes[i])} for i in range(net.n_items)],
        "capacities": {N[s]: _num(c) for s, c in enumerate(net.capacities)},
        "servers": {It[i]: sorted((N[v] for v in ds), key=N.index) for i, ds in enumerate(net.servers)},
        "rates": [
            {"node": N[s], "item": It[i], "lambda": _num(net.rates[s, i])}
            for s in range(net.n_nodes) for i in range(net.n_items) if net.rates[s, i] != 0
        ],
        "paths": [
            {"node": N[s], "item": It[i], "path": [N[v] for v in p]}
            for (s, i), p in sorted(net.paths.items())
        ],
    })
    return d


def network_from_dict(data: dict) -> CachingNetwork:
    try:
        jsonschema.validate(data, NETWORK_SCHEMA)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise NetworkFormatError(f"{loc}: {exc.message}") from None
    for key, value in _numbers(data):
        if not math.isfinite(value):
            raise NetworkFormatError(f"{key}: non-finite number")
    paths = None
    if "paths" in data:
        paths = {(p["node"], p["item"]): p["path"] for p in data["paths"]}
    return CachingNetwork.from_ids(
        nodes=data["nodes"],
        edges=[(e["from"], e["to"], e["cost"]) for e in data["edges"]],
        items=[it["id"] for it in data["items"]],
        servers=data["servers"],
        rates={(r["node"], r["item"]): r["lambda"] for r in data["rates"]},
        capacities=data["capacities"],
        sizes={it["id"]: it.get("size", 1.0) for it in data["items"]},
        paths=paths,
    )


def _numbers(obj, key="<root>"):
    if isinstance(obj, float):
        yield key, obj
    elif isinstance(obj, dict):
        for k, v in obj.items():
            yield from _numbers(v, f"{key}/{k}")
    elif isinstance(obj, list):
        for k, v in enumerate(obj):
            yield from _numbers(v, f"{key}/{k}")


def load_network(path) -> CachingNetwork:
    """Read and schema-check a network file."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"{path}: invalid JSON ({exc})") from None
    return network_from_dict(data)


def dump_network(net: CachingNetwork, path=None, meta: dict | None = None) -> str:
    text = dumps(network_to_dict(net, meta))
    if path is not None:
        Path(path).write_text(text)
    return text


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays, tuples and sets to JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(to_jsonable(v) for v in obj)
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2) + "\n"
