"""Routing costs, caching gains, deviation weights and social welfare.

All evaluators accept capacity-infeasible profiles; use :func:`is_feasible`
to gate game play. Batch variants operate on a stack of placements of
shape ``(P, V, I)`` and are what the exhaustive searches use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .network import CachingNetwork

__all__ = [
    "StrategyProfile",
    "is_feasible",
    "request_cost",
    "node_cost",
    "caching_gain",
    "social_welfare",
    "deviation_weight",
    "deviation_weights",
    "gain_decomposition",
    "fractional_welfare",
    "surrogate_welfare",
    "node_gains_batch",
    "welfare_batch",
    "deviation_weights_batch",
]


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    """Binary placement ``x[s, i]``: does node ``s`` cache item ``i``."""

    placement: np.ndarray

    def __post_init__(self):
        x = np.array(self.placement, dtype=bool)
        if x.ndim != 2:
            raise ValueError("placement must be a (nodes, items) matrix")
        x.setflags(write=False)
        object.__setattr__(self, "placement", x)

    @classmethod
    def empty(cls, net: CachingNetwork) -> "StrategyProfile":
        return cls(np.zeros((net.n_nodes, net.n_items), dtype=bool))

    @classmethod
    def full(cls, net: CachingNetwork) -> "StrategyProfile":
        return cls(np.ones((net.n_nodes, net.n_items), dtype=bool))

    @classmethod
    def from_sets(cls, net: CachingNetwork, sets: Mapping) -> "StrategyProfile":
        """Build from ``{node: items}``; ids or indices both work."""
        x = np.zeros((net.n_nodes, net.n_items), dtype=bool)
        for s, items in sets.items():
            si = net.node_index(s)
            for i in items:
                x[si, net.item_index(i)] = True
        return cls(x)

    def cached(self, s: int) -> tuple:
        """``Z_s`` as sorted item indices."""
        return tuple(int(i) for i in np.flatnonzero(self.placement[s]))

    def with_node(self, s: int, items: Iterable[int]) -> "StrategyProfile":
        x = self.placement.copy()
        x[s, :] = False
        x[s, list(items)] = True
        return StrategyProfile(x)

    def to_sets(self, net: CachingNetwork) -> dict:
        return {net.nodes[s]: [net.items[i] for i in self.cached(s)] for s in range(net.n_nodes)}

    def key(self) -> tuple:
        return tuple(self.cached(s) for s in range(self.placement.shape[0]))

    def __eq__(self, other):
        if not isinstance(other, StrategyProfile):
            return NotImplemented
        return np.array_equal(self.placement, other.placement)

    def __hash__(self):
        return hash(self.placement.tobytes())

    def __repr__(self):
        return f"StrategyProfile({self.key()})"


def _x(profile):
    return profile.placement if isinstance(profile, StrategyProfile) else np.asarray(profile)


def is_feasible(net: CachingNetwork, profile) -> bool:
    """Every node's cached size fits its capacity."""
    used = _x(profile).astype(float) @ net.sizes
    return bool(np.all(used <= net.capacities + 1e-9))


def request_cost(net: CachingNetwork, profile, s: int, i: int) -> float:
    """``h_(s,i)``: sum over hops of ``w_{p_{k+1}p_k}`` times prod of ``1 - x``.

    Hop ``k`` is paid only if none of ``p_1..p_k`` caches the item.
    """
    path = net.path(s, i)
    x = _x(profile)[list(path), i].astype(float)
    survive = np.cumprod(1.0 - x)[:-1]
    return float(net.path_costs(s, i) @ survive)


def node_cost(net: CachingNetwork, profile, s: int) -> float:
    x = _x(profile)
    total = 0.0
    for r in net.requests_by_node[s]:
        survive = np.cumprod(1.0 - x[r.path, r.item].astype(float))[:-1]
        total += r.rate * float(r.costs @ survive)
    return total


def caching_gain(net: CachingNetwork, profile, s: int) -> float:
    """``g_s = h_s(0) - h_s(x)``."""
    return float(net.baseline_costs[s]) - node_cost(net, profile, s)


def social_welfare(net: CachingNetwork, profile) -> float:
    return float(sum(caching_gain(net, profile, s) for s in range(net.n_nodes)))


def deviation_weight(net: CachingNetwork, profile, s: int, i: int) -> float:
    """``q_si``: what request ``(s, i)`` costs if ``s`` itself does not cache ``i``.

    Only the intermediate nodes' placements matter; ``x_si`` is ignored.
    """
    lam = float(net.rates[s, i])
    if lam == 0:
        return 0.0
    path = net.path(s, i)
    mid = _x(profile)[list(path[1:-1]), i].astype(float)
    costs = net.path_costs(s, i)
    survive = np.concatenate(([1.0], np.cumprod(1.0 - mid)))[:len(costs)]
    return lam * float(costs @ survive)


def deviation_weights(net: CachingNetwork, profile, s: int) -> np.ndarray:
    """Vector of ``q_si`` over all items."""
    x = _x(profile)
    q = np.zeros(net.n_items)
    for r in net.requests_by_node[s]:
        mid = x[r.path[1:-1], r.item].astype(float)
        survive = np.concatenate(([1.0], np.cumprod(1.0 - mid)))[:len(r.costs)]
        q[r.item] = r.rate * float(r.costs @ survive)
    return q


def gain_decomposition(net: CachingNetwork, profile, s: int) -> tuple:
    """Split ``g_s`` into the part fixed by ``x_{-s}`` and the ``x_s`` part.

    Returns ``(constant, per_item)`` where ``per_item[i] = x_si * q_si``.
    """
    x = _x(profile)
    const = 0.0
    per_item = np.zeros(net.n_items)
    for r in net.requests_by_node[s]:
        mid = x[r.path[1:-1], r.item].astype(float)
        survive = np.concatenate(([1.0], np.cumprod(1.0 - mid)))[:len(r.costs)]
        const += r.rate * float(r.costs @ (1.0 - survive))
        per_item[r.item] = float(x[s, r.item]) * r.rate * float(r.costs @ survive)
    return const, per_item


def fractional_welfare(net: CachingNetwork, phi) -> float:
    """``G(phi)``: the welfare formula with caching probabilities in place of x."""
    phi = np.asarray(phi, dtype=float)
    total = 0.0
    for r in net.requests:
        survive = np.cumprod(1.0 - phi[r.path[:-1], r.item])
        total += r.rate * float(r.costs @ (1.0 - survive))
    return total


def surrogate_welfare(net: CachingNetwork, phi) -> float:
    """``L(phi)``: concave surrogate with ``min(1, prefix sum of phi)`` per hop."""
    phi = np.asarray(phi, dtype=float)
    total = 0.0
    for r in net.requests:
        covered = np.minimum(1.0, np.cumsum(phi[r.path[:-1], r.item]))
        total += r.rate * float(r.costs @ covered)
    return total


# batch evaluators ---------------------------------------------------------

def node_gains_batch(net: CachingNetwork, X: np.ndarray) -> np.ndarray:
    """``g_s`` for a stack of placements: ``(P, V, I) -> (P, V)``."""
    X = np.asarray(X)
    out = np.zeros((X.shape[0], net.n_nodes))
    for r in net.requests:
        cached = X[:, r.path[:-1], r.item]
        survive = np.cumprod(~cached, axis=1, dtype=float)
        out[:, r.node] += r.rate * ((1.0 - survive) @ r.costs)
    return out


def welfare_batch(net: CachingNetwork, X: np.ndarray) -> np.ndarray:
    return node_gains_batch(net, X).sum(axis=1)


def deviation_weights_batch(net: CachingNetwork, X: np.ndarray) -> np.ndarray:
    """``q_si`` for a stack of placements: ``(P, V, I) -> (P, V, I)``."""
    X = np.asarray(X)
    q = np.zeros((X.shape[0], net.n_nodes, net.n_items))
    for r in net.requests:
        P = X.shape[0]
        mid = X[:, r.path[1:-1], r.item]
        survive = np.ones((P, len(r.costs)))
        if mid.shape[1]:
            survive[:, 1:] = np.cumprod(~mid, axis=1, dtype=float)
        q[:, r.node, r.item] = r.rate * (survive @ r.costs)
    return q
