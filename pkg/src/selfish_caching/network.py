"""Game instances: directed caching graphs with items, requests and paths.

Node and item identifiers are strings on the outside and dense indices
inside. Every loop that matters for tie-breaking runs in index order.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import MissingPathError, NetworkFormatError

__all__ = [
    "CachingNetwork",
    "Request",
    "shortest_path_routes",
    "validate_network",
]


@dataclass(frozen=True)
class Request:
    """A positive-rate request with its path and per-hop response costs.

    ``costs[k]`` is the cost of carrying the item back from ``path[k+1]``
    to ``path[k]``.
    """

    node: int
    item: int
    rate: float
    path: np.ndarray
    costs: np.ndarray


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CachingNetwork:
    """Immutable selfish caching game instance.

    Attributes
    ----------
    nodes, items : tuple of str
        External identifiers; position is the internal index.
    edges : mapping (u, v) -> float
        Directed edge costs ``w_uv``. Responses travel against the request
        direction, so a path hop ``(a, b)`` is charged ``w_ba``.
    sizes : ndarray, shape (I,)
    capacities : ndarray, shape (V,)
    servers : tuple of frozenset of int
        Designated server nodes per item.
    rates : ndarray, shape (V, I)
    paths : mapping (s, i) -> tuple of int
    """

    nodes: tuple
    items: tuple
    edges: Mapping
    sizes: np.ndarray
    capacities: np.ndarray
    servers: tuple
    rates: np.ndarray
    paths: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(str(n) for n in self.nodes))
        object.__setattr__(self, "items", tuple(str(i) for i in self.items))
        object.__setattr__(self, "edges", MappingProxyType(
            {(int(u), int(v)): float(w) for (u, v), w in dict(self.edges).items()}))
        object.__setattr__(self, "sizes", _frozen(self.sizes))
        object.__setattr__(self, "capacities", _frozen(self.capacities))
        object.__setattr__(self, "servers", tuple(frozenset(int(v) for v in d) for d in self.servers))
        object.__setattr__(self, "rates", _frozen(self.rates))
        object.__setattr__(self, "paths", MappingProxyType(
            {(int(s), int(i)): tuple(int(v) for v in p) for (s, i), p in dict(self.paths).items()}))
        V, I = len(self.nodes), len(self.items)
        if len(set(self.nodes)) != V or len(set(self.items)) != I:
            raise NetworkFormatError("duplicate node or item identifier")
        if self.sizes.shape != (I,) or self.capacities.shape != (V,):
            raise NetworkFormatError("sizes/capacities do not match item/node counts")
        if self.rates.shape != (V, I):
            raise NetworkFormatError(f"rates must have shape ({V}, {I})")
        if len(self.servers) != I:
            raise NetworkFormatError("need one designated server set per item")

    # construction ---------------------------------------------------------

    @classmethod
    def from_ids(
        cls,
        nodes: Sequence,
        edges: Iterable[tuple],
        items: Sequence,
        servers: Mapping,
        rates: Mapping | None = None,
        capacities: Mapping | None = None,
        sizes: Mapping | None = None,
        paths: Mapping | None = None,
    ) -> "CachingNetwork":
        """Build an instance from external identifiers.

        ``edges`` holds ``(u, v, cost)`` triples, ``rates`` maps
        ``(node, item)`` to a rate, ``paths`` maps ``(node, item)`` to a
        node sequence. Missing rates and capacities are zero, missing sizes
        are one. Without ``paths`` the shortest-path routes are generated.
        """
        nodes = [str(n) for n in nodes]
        items = [str(i) for i in items]
        nidx = {n: k for k, n in enumerate(nodes)}
        iidx = {i: k for k, i in enumerate(items)}

        def node(n):
            try:
                return nidx[str(n)]
            except KeyError:
                raise NetworkFormatError(f"unknown node {n!r}") from None

        def item(i):
            try:
                return iidx[str(i)]
            except KeyError:
                raise NetworkFormatError(f"unknown item {i!r}") from None

        E = {}
        for u, v, w in edges:
            E[(node(u), node(v))] = float(w)
        srv = [set() for _ in items]
        for i, ds in (servers or {}).items():
            srv[item(i)].update(node(d) for d in ds)
        lam = np.zeros((len(nodes), len(items)))
        for (s, i), r in (rates or {}).items():
            lam[node(s), item(i)] = float(r)
        cap = np.zeros(len(nodes))
        for s, c in (capacities or {}).items():
            cap[node(s)] = float(c)
        L = np.ones(len(items))
        for i, size in (sizes or {}).items():
            L[item(i)] = float(size)
        if paths is None:
            P = shortest_path_routes(len(nodes), E, srv)
        else:
            P = {(node(s), item(i)): tuple(node(v) for v in p) for (s, i), p in paths.items()}
        return cls(tuple(nodes), tuple(items), E, L, cap, tuple(srv), lam, P)

    def replace(self, **changes) -> "CachingNetwork":
        """Copy with some fields swapped out (see :func:`dataclasses.replace`)."""
        return replace(self, **changes)

    def with_rates(self, rates) -> "CachingNetwork":
        return replace(self, rates=np.asarray(rates, dtype=float))

    def with_capacities(self, capacities) -> "CachingNetwork":
        cap = np.broadcast_to(np.asarray(capacities, dtype=float), (self.n_nodes,))
        return replace(self, capacities=cap.copy())

    # lookups --------------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_items(self) -> int:
        return len(self.items)

    @cached_property
    def _node_index(self):
        return {n: k for k, n in enumerate(self.nodes)}

    @cached_property
    def _item_index(self):
        return {i: k for k, i in enumerate(self.items)}

    def node_index(self, node) -> int:
        if isinstance(node, (int, np.integer)) and not isinstance(node, bool):
            return int(node)
        return self._node_index[str(node)]

    def item_index(self, item) -> int:
        if isinstance(item, (int, np.integer)) and not isinstance(item, bool):
            return int(item)
        return self._item_index[str(item)]

    @property
    def equal_sizes(self) -> bool:
        return bool(np.all(self.sizes == self.sizes[0])) if self.n_items else True

    def path(self, s: int, i: int) -> tuple:
        try:
            return self.paths[(s, i)]
        except KeyError:
            raise MissingPathError(self.nodes[s], self.items[i]) from None

    def path_costs(self, s: int, i: int) -> np.ndarray:
        """Response cost of each hop of ``p^(s,i)``: ``w_{p_{k+1} p_k}``."""
        p = self.path(s, i)
        return np.array([self.edges[(p[k + 1], p[k])] for k in range(len(p) - 1)], dtype=float)

    @cached_property
    def requests(self) -> tuple:
        """Positive-rate requests in (node, item) index order."""
        out = []
        for s in range(self.n_nodes):
            for i in range(self.n_items):
                lam = float(self.rates[s, i])
                if lam > 0:
                    p = np.array(self.path(s, i), dtype=np.intp)
                    out.append(Request(s, i, lam, p, self.path_costs(s, i)))
        return tuple(out)

    @cached_property
    def requests_by_node(self) -> tuple:
        by = [[] for _ in range(self.n_nodes)]
        for r in self.requests:
            by[r.node].append(r)
        return tuple(tuple(rs) for rs in by)

    @cached_property
    def baseline_costs(self) -> np.ndarray:
        """``h_s(0)`` for every node: total cost with no caching at all."""
        h = np.zeros(self.n_nodes)
        for r in self.requests:
            h[r.node] += r.rate * r.costs.sum()
        h.setflags(write=False)
        return h

    def intermediate_nodes(self, s: int, i: int) -> frozenset:
        """``V_(s,i)``: path nodes other than the source and item servers."""
        p = self.paths.get((s, i))
        if p is None:
            return frozenset()
        return frozenset(v for v in p if v != s and v not in self.servers[i])


def shortest_path_routes(n_nodes: int, edges: Mapping, servers: Sequence) -> dict:
    """Shortest request forwarding paths toward each item's server set.

    Path length is the response cost ``sum w_{p_{k+1} p_k}``. Among equally
    short paths the lexicographically smallest node sequence wins, which
    makes routing a function of (current node, item) alone, so every
    generated path set has the path overlap property.
    """
    # incoming[v] = [(u, w_vu)] : a request may hop u -> v, response pays w_vu
    into = [[] for _ in range(n_nodes)]
    out = [[] for _ in range(n_nodes)]
    for (u, v), _ in edges.items():
        if (v, u) in edges:
            into[v].append((u, edges[(v, u)]))
            out[u].append((v, edges[(v, u)]))
    for lst in out:
        lst.sort()
    routes = {}
    cache = {}
    for i, ds in enumerate(servers):
        key = frozenset(ds)
        if key not in cache:
            cache[key] = _distances_to(n_nodes, into, key)
        dist = cache[key]
        for s in range(n_nodes):
            if math.isinf(dist[s]):
                continue
            path = [s]
            seen = {s}
            cur = s
            while cur not in key:
                nxt = None
                for v, w in out[cur]:
                    if v not in seen and math.isclose(dist[cur], w + dist[v], rel_tol=1e-12, abs_tol=1e-12):
                        nxt = v
                        break
                if nxt is None:  # only zero-cost cycles could cause this
                    path = None
                    break
                path.append(nxt)
                seen.add(nxt)
                cur = nxt
            if path is not None:
                routes[(s, i)] = tuple(path)
    return routes


def _distances_to(n_nodes, into, targets):
    dist = [math.inf] * n_nodes
    heap = []
    for t in targets:
        dist[t] = 0.0
        heap.append((0.0, t))
    heapq.heapify(heap)
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        for u, w in into[v]:
            nd = d + w
            if nd < dist[u]:
                dist[u] = nd
                heapq.heappush(heap, (nd, u))
    return dist


def validate_network(net: CachingNetwork) -> list:
    """Every invariant violation of ``net`` as a readable string.

    An empty list means the instance is valid.
    """
    out = []
    N, It = net.nodes, net.items
    for i, ds in enumerate(net.servers):
        if not ds:
            out.append(f"item {It[i]}: no designated server")
    for (u, v), w in net.edges.items():
        if not (w >= 0 and math.isfinite(w)):
            out.append(f"edge ({N[u]},{N[v]}): cost {w} must be finite and >= 0")
    for i, size in enumerate(net.sizes):
        if not (size > 0 and math.isfinite(size)):
            out.append(f"item {It[i]}: size {size} must be > 0")
    for s, c in enumerate(net.capacities):
        if not (c >= 0 and math.isfinite(c)):
            out.append(f"node {N[s]}: capacity {c} must be >= 0")
    for s in range(net.n_nodes):
        for i in range(net.n_items):
            lam = net.rates[s, i]
            if not (lam >= 0 and math.isfinite(lam)):
                out.append(f"rate ({N[s]},{It[i]}): {lam} must be >= 0")
            elif lam > 0 and (s, i) not in net.paths:
                out.append(f"request ({N[s]},{It[i]}): missing path")
    for (s, i), p in sorted(net.paths.items()):
        where = f"path ({','.join(N[v] for v in p)}) of request ({N[s]},{It[i]})"
        if not p:
            out.append(f"{where}: empty")
            continue
        if p[0] != s:
            out.append(f"{where}: does not start at its source")
        if p[-1] not in net.servers[i]:
            out.append(f"{where}: does not end at a designated server of the item")
        if len(set(p)) != len(p):
            out.append(f"{where}: path not simple")
        for v in p[:-1]:
            if v in net.servers[i]:
                out.append(f"{where}: non-terminal node {N[v]} is a designated server")
        for a, b in zip(p, p[1:]):
            if (a, b) not in net.edges:
                out.append(f"{where}: missing edge ({N[a]},{N[b]})")
            elif (b, a) not in net.edges:
                out.append(f"{where}: missing reverse edge ({N[b]},{N[a]}) for the response")
    return out
