"""Structural properties of an instance: loops, overlap, cloud, tiers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import CachingNetwork

__all__ = [
    "PropertyReport",
    "traversed_edges",
    "detect_mixed_request_loop",
    "traversed_two_cycles",
    "check_properties",
]


def traversed_edges(net: CachingNetwork) -> set:
    """Request-direction edges used by at least one positive-rate path."""
    T = set()
    for r in net.requests:
        p = r.path
        T.update((int(p[k]), int(p[k + 1])) for k in range(len(p) - 1))
    return T


def _find_long_cycle(n, adj):
    # Cycles are enumerated rooted at their smallest node, neighbours in
    # ascending order; the first one with >= 3 nodes is returned.
    for start in range(n):
        stack = [(start, iter(adj[start]))]
        on_path = [start]
        in_path = {start}
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                in_path.discard(on_path.pop())
                continue
            if nxt == start:
                if len(on_path) >= 3:
                    return on_path + [start]
                continue
            if nxt < start or nxt in in_path:
                continue
            on_path.append(nxt)
            in_path.add(nxt)
            stack.append((nxt, iter(adj[nxt])))
    return None


def detect_mixed_request_loop(net: CachingNetwork):
    """Look for a mixed request loop.

    Returns ``(found, witness)`` where the witness is the closed node
    sequence (external ids), starting and ending at its smallest node.
    Directed 2-cycles do not count; see :func:`traversed_two_cycles`.
    """
    T = traversed_edges(net)
    adj = [[] for _ in range(net.n_nodes)]
    for u, v in sorted(T):
        adj[u].append(v)
    cyc = _find_long_cycle(net.n_nodes, adj)
    if cyc is None:
        return False, None
    return True, tuple(net.nodes[v] for v in cyc)


def traversed_two_cycles(net: CachingNetwork) -> list:
    """Pairs ``(u, v)`` with both directions traversed by requests."""
    T = traversed_edges(net)
    return sorted((net.nodes[u], net.nodes[v]) for u, v in T if u < v and (v, u) in T)


@dataclass
class PropertyReport:
    has_mixed_request_loop: bool
    loop_witness: tuple | None
    two_cycles: list
    homogeneous_requests: bool
    path_overlap: bool
    overlap_witness: dict | None
    cloud_property: bool
    alpha: int
    intermediate_sets: dict = field(repr=False)
    request_intermediates: dict = field(repr=False)
    tiers: dict = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "has_mixed_request_loop": self.has_mixed_request_loop,
            "loop_witness": list(self.loop_witness) if self.loop_witness else None,
            "two_cycles": [list(c) for c in self.two_cycles],
            "homogeneous_requests": self.homogeneous_requests,
            "path_overlap": self.path_overlap,
            "overlap_witness": self.overlap_witness,
            "cloud_property": self.cloud_property,
            "alpha": self.alpha,
            "intermediate_sets": {k: sorted(v) for k, v in self.intermediate_sets.items()},
            "request_intermediates": [
                {"node": s, "item": i, "intermediates": sorted(v)}
                for (s, i), v in self.request_intermediates.items()
            ],
            "tiers": self.tiers,
        }


def is_homogeneous(net: CachingNetwork) -> bool:
    return bool(np.all(net.rates == net.rates[:1, :]))


def overlap_violation(net: CachingNetwork):
    """First ``(requester, node, item)`` breaking path overlap, or None.

    For every path ``p^(v,i)`` and every non-terminal node ``s`` on it, the
    suffix from ``s`` must equal ``p^(s,i)`` whenever the latter exists.
    """
    for (v, i), p in sorted(net.paths.items()):
        for k in range(1, len(p) - 1):
            s = p[k]
            own = net.paths.get((s, i))
            if own is not None and own != p[k:]:
                return v, s, i
    return None


def cloud_holds(net: CachingNetwork) -> bool:
    if not net.n_items:
        return True
    first = net.servers[0]
    if len(first) != 1 or any(d != first for d in net.servers):
        return False
    for s in range(net.n_nodes):
        own = {p for (v, _), p in net.paths.items() if v == s}
        if len(own) > 1:
            return False
    return True


def compute_alpha(net: CachingNetwork) -> int:
    longest = max((len(r.path) for r in net.requests), default=1)
    return max(1, longest - 1)


def check_properties(net: CachingNetwork) -> PropertyReport:
    loop, witness = detect_mixed_request_loop(net)
    viol = overlap_violation(net)
    N, It = net.nodes, net.items
    req_sets = {}
    node_sets = {s: set() for s in range(net.n_nodes)}
    for (s, i) in sorted(net.paths):
        vs = net.intermediate_nodes(s, i)
        req_sets[(N[s], It[i])] = {N[v] for v in vs}
        node_sets[s].update(vs)
    return PropertyReport(
        has_mixed_request_loop=loop,
        loop_witness=witness,
        two_cycles=traversed_two_cycles(net),
        homogeneous_requests=is_homogeneous(net),
        path_overlap=viol is None,
        overlap_witness=None if viol is None else {
            "requester": N[viol[0]], "node": N[viol[1]], "item": It[viol[2]]},
        cloud_property=cloud_holds(net),
        alpha=compute_alpha(net),
        intermediate_sets={N[s]: {N[v] for v in vs} for s, vs in node_sets.items()},
        request_intermediates=req_sets,
        tiers={N[s]: len(vs) for s, vs in node_sets.items()},
    )
