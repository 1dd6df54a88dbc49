"""Built-in instances: small hand-made examples and simulation topologies.

Every builder is deterministic in its parameters (random draws use
``numpy.random.default_rng(seed)``) and returns a validated
:class:`~selfish_caching.network.CachingNetwork`. Node and item ids are
the strings ``"1"``, ``"2"``, ...
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .equilibrium import brute_force_psne
from .errors import ScenarioError
from .network import CachingNetwork, validate_network
from .properties import detect_mixed_request_loop

__all__ = [
    "SCENARIOS",
    "build",
    "apply_type2_nodes",
    "extend_network",
    "extend_abilene",
    "ABILENE_RELAY_SCHEDULE",
    "random_instance",
]


def _sym(pairs):
    """``(u, v, w)`` triples for both directions of each undirected edge."""
    out = []
    for u, v, w in pairs:
        out += [(u, v, w), (v, u, w)]
    return out


def _ids(n):
    return [str(k) for k in range(1, n + 1)]


def _checked(net, allow_loop=False):
    problems = validate_network(net)
    if problems:
        raise ScenarioError("built instance is invalid: " + "; ".join(problems))
    if not allow_loop:
        loop, witness = detect_mixed_request_loop(net)
        if loop:
            raise ScenarioError(f"built instance has a mixed request loop {witness}")
    return net


# figure-scale examples ----------------------------------------------------

def fig1(lam=(1.0, 1.0), capacity=1):
    """Eight nodes, two items; node 4 serves item 1 and node 7 serves item 2.

    Costs make shortest-path routing give ``p(5,1) = (5,6,4)`` and
    ``p(3,2) = (3,6,5,7)``.
    """
    edges = _sym([
        ("1", "2", 1), ("1", "3", 2), ("2", "4", 2), ("3", "6", 1), ("6", "4", 1),
        ("5", "6", 1), ("5", "7", 1), ("6", "8", 3), ("8", "7", 1),
    ])
    nodes = _ids(8)
    rates = {(n, i): lam[i - 1] for n in nodes for i in (1, 2)}
    net = CachingNetwork.from_ids(
        nodes, edges, ["1", "2"], {"1": ["4"], "2": ["7"]}, rates,
        {n: capacity for n in nodes})
    return _checked(net)


# Response costs for the no-equilibrium example. Notation: w(a->b) is the
# cost of carrying an item from a back to b. The costs were picked by
# walking the best-response cycle around the loop by hand (every node of
# 1, 2, 3 must prefer the item its loop successor does not hold) and then
# confirmed with the brute-force equilibrium enumerator, which the builder
# re-runs on every call.
_FIG2_COSTS = {
    ("1", "2"): 1, ("1", "3"): 1, ("2", "3"): 2, ("2", "4"): 2,
    ("1", "4"): 2, ("3", "5"): 2, ("4", "5"): 1,
}

_FIG2_PATHS = {
    ("3", "1"): ("3", "2", "4"), ("2", "1"): ("2", "4"), ("1", "1"): ("1", "4"),
    ("5", "1"): ("5", "4"), ("4", "1"): ("4",),
    ("2", "2"): ("2", "1", "3", "5"), ("1", "2"): ("1", "3", "5"), ("3", "2"): ("3", "5"),
    ("4", "2"): ("4", "5"), ("5", "2"): ("5",),
}


def _fig2_net(paths, lam1=10.0, lam2=14.0):
    nodes = _ids(5)
    edges = _sym((u, v, w) for (u, v), w in _FIG2_COSTS.items())
    rates = {(n, i): (lam1 if i == "1" else lam2) for n in nodes for i in ("1", "2")}
    return CachingNetwork.from_ids(
        nodes, edges, ["1", "2"], {"1": ["4"], "2": ["5"]}, rates,
        {n: 1 for n in nodes}, paths=paths)


def fig2_triangle():
    """Five nodes, unit caches, rates 10/14, no pure equilibrium.

    Requests for item 2 go 2 -> 1 -> 3 while node 3 fetches item 1 via
    node 2, closing the loop 1 -> 3 -> 2 -> 1.
    """
    net = _checked(_fig2_net(_FIG2_PATHS), allow_loop=True)
    if brute_force_psne(net):
        raise ScenarioError("fig2_triangle certification failed: an equilibrium exists")
    return net


def fig3_no_loop():
    """The five-node example rerouted through ``p(3,1) = (3,1,2,4)``; loop-free."""
    paths = dict(_FIG2_PATHS)
    paths[("3", "1")] = ("3", "1", "2", "4")
    return _checked(_fig2_net(paths))


def fig4_poa_chain(I=10, eps=0.01, w21=1.0, w32=100.0):
    """Chain 1 - 2 - 3 with node 3 serving items 1..I.

    Only node 1 requests: rate 1 for item 1 and ``1 - eps`` for the rest.
    Node 1 holds one item, node 2 holds ``I - 1``.
    """
    I = int(I)
    if I < 2 or not 0 < eps < 1:
        raise ScenarioError("fig4_poa_chain needs I >= 2 and 0 < eps < 1")
    items = _ids(I)
    rates = {("1", i): (1.0 if i == "1" else 1.0 - eps) for i in items}
    net = CachingNetwork.from_ids(
        _ids(3), _sym([("1", "2", w21), ("2", "3", w32)]), items,
        {i: ["3"] for i in items}, rates, {"1": 1, "2": I - 1, "3": 0})
    return _checked(net)


def fig5_paradox_pair(lam1=2.0, lam2=1.0, w31=1.0, w23=1.0):
    """Two-node network and the same network with a relay splitting its edge.

    Left: node 1 fetches both items from server 2 over one edge of cost
    ``w31 + w23``. Right: a zero-rate cache node 3 sits in the middle.
    """
    rates = {("1", "1"): lam1, ("1", "2"): lam2}
    servers = {"1": ["2"], "2": ["2"]}
    left = CachingNetwork.from_ids(
        _ids(2), _sym([("1", "2", w31 + w23)]), ["1", "2"], servers, rates, {"1": 1, "2": 0})
    right = CachingNetwork.from_ids(
        _ids(3), _sym([("1", "3", w31), ("3", "2", w23)]), ["1", "2"], servers, rates,
        {"1": 1, "2": 0, "3": 1})
    return _checked(left), _checked(right)


def fig6_overlap(I=2, lam=1.0, w21=1.0, w32=1.0, capacity=1):
    """Chain with ``p(2,1) = (2,3)`` and ``p(1,1) = (1,2,3)``; path overlap holds."""
    items = _ids(int(I))
    rates = {(n, i): lam for n in _ids(3) for i in items}
    net = CachingNetwork.from_ids(
        _ids(3), _sym([("1", "2", w21), ("2", "3", w32)]), items,
        {i: ["3"] for i in items}, rates, {"1": capacity, "2": capacity, "3": 0})
    return _checked(net)


def fig7_curvature(w21=1.0, w32=1.0, I=2, lam=None):
    """Chain 1 - 2 - 3, server 3, homogeneous rates; only node 1 has a cache.

    The curvature is then ``w32 / (w21 + w32)``.
    """
    items = _ids(int(I))
    lam = [1.0] * len(items) if lam is None else list(lam)
    rates = {(n, i): lam[k] for n in _ids(3) for k, i in enumerate(items)}
    net = CachingNetwork.from_ids(
        _ids(3), _sym([("1", "2", w21), ("2", "3", w32)]), items,
        {i: ["3"] for i in items}, rates, {"1": 1, "2": 0, "3": 0})
    return _checked(net)


# simulation topologies ------------------------------------------------------

def _abilene_data():
    return json.loads(resources.files(__package__).joinpath("data/abilene.json").read_text())


def _rates(rng, V, I, homogeneous, hi=10.0):
    if homogeneous:
        return np.broadcast_to(rng.uniform(0.0, hi, I), (V, I)).copy()
    return rng.uniform(0.0, hi, (V, I))


def abilene(capacity=1, seed=0, n_type2=0, homogeneous=False, unequal_sizes=False,
            extra_nodes=0):
    """Eleven-node Abilene backbone with ten items.

    Node 1 serves items 1-6 and node 2 serves items 7-10; rates are
    uniform on [0, 10]. With ``unequal_sizes`` item ``k`` has size
    ``0.2 k`` and node 1 serves everything. Type-II nodes are chosen with
    the same seed, then ``extra_nodes`` relays are spliced in.
    """
    data = _abilene_data()
    nodes = [str(n) for n in data["nodes"]]
    edges = [(e["from"], e["to"], e["cost"]) for e in data["edges"]]
    items = _ids(10)
    if unequal_sizes:
        servers = {i: ["1"] for i in items}
        sizes = {i: round(0.2 * k, 1) for k, i in enumerate(items, 1)}
    else:
        servers = {i: ["1"] if int(i) <= 6 else ["2"] for i in items}
        sizes = None
    rng = np.random.default_rng(seed)
    lam = _rates(rng, len(nodes), len(items), homogeneous)
    rates = {(n, i): lam[a, b] for a, n in enumerate(nodes) for b, i in enumerate(items)}
    net = CachingNetwork.from_ids(
        nodes, edges, items, servers, rates, {n: capacity for n in nodes}, sizes)
    net = apply_type2_nodes(net, n_type2, seed)
    net = extend_abilene(net, extra_nodes, capacity=capacity)
    return _checked(net)


def abilene_extended(extra_nodes=10, **params):
    """Abilene with ``extra_nodes`` (default all ten) relay caches."""
    return abilene(extra_nodes=extra_nodes, **params)


# 22-node stand-in for the GEANT backbone. Nodes are national PoPs plus a
# transatlantic one; the link list is a hand-made sketch of the pan-European
# mesh, not a copy of any published map.
GEANT_NODES = (
    "UK", "FR", "DE", "NL", "BE", "LU", "CH", "IT", "ES", "PT", "AT",
    "CZ", "PL", "SK", "HU", "SI", "HR", "SE", "IE", "GR", "IL", "NY",
)
GEANT_LINKS = (
    ("UK", "FR"), ("UK", "NL"), ("UK", "IE"), ("UK", "NY"), ("UK", "SE"), ("UK", "PT"),
    ("FR", "DE"), ("FR", "CH"), ("FR", "ES"), ("FR", "BE"), ("FR", "LU"),
    ("DE", "NL"), ("DE", "CH"), ("DE", "AT"), ("DE", "CZ"), ("DE", "SE"), ("DE", "IT"),
    ("DE", "PL"), ("DE", "LU"), ("DE", "NY"), ("NL", "BE"), ("NL", "IL"),
    ("CH", "IT"), ("IT", "GR"), ("IT", "AT"), ("IT", "IL"), ("ES", "PT"),
    ("AT", "SI"), ("AT", "SK"), ("AT", "HU"), ("CZ", "SK"), ("CZ", "PL"),
    ("SI", "HR"), ("HU", "HR"), ("SE", "PL"), ("GR", "HU"),
)


def geant(capacity=1, seed=0, n_type2=0, homogeneous=False):
    """22-node GEANT stand-in with 20 items and edge costs uniform on [1, 100].

    DE (node 3) serves items 1-10 and UK (node 1) serves items 11-20.
    """
    rng = np.random.default_rng(seed)
    idx = {name: str(k) for k, name in enumerate(GEANT_NODES, 1)}
    costs = rng.uniform(1.0, 100.0, len(GEANT_LINKS))
    edges = _sym((idx[a], idx[b], w) for (a, b), w in zip(GEANT_LINKS, costs))
    nodes, items = _ids(len(GEANT_NODES)), _ids(20)
    lam = _rates(rng, len(nodes), len(items), homogeneous)
    rates = {(n, i): lam[a, b] for a, n in enumerate(nodes) for b, i in enumerate(items)}
    servers = {i: ["3"] if int(i) <= 10 else ["1"] for i in items}
    net = CachingNetwork.from_ids(nodes, edges, items, servers, rates, {n: capacity for n in nodes})
    return _checked(apply_type2_nodes(net, n_type2, seed))


def grid(capacity=1, seed=0, n_type2=0, homogeneous=False, side=4):
    """``side x side`` grid, ``side**2`` items, edge costs uniform on [1, 100].

    Nodes are numbered row by row. The top-left corner serves the first
    half of the items and the bottom-right corner the second half.
    """
    side = int(side)
    rng = np.random.default_rng(seed)
    links = []
    for r in range(side):
        for c in range(side):
            v = r * side + c + 1
            if c + 1 < side:
                links.append((str(v), str(v + 1)))
            if r + 1 < side:
                links.append((str(v), str(v + side)))
    costs = rng.uniform(1.0, 100.0, len(links))
    edges = _sym((a, b, w) for (a, b), w in zip(links, costs))
    n = side * side
    nodes, items = _ids(n), _ids(n)
    lam = _rates(rng, n, n, homogeneous)
    rates = {(s, i): lam[a, b] for a, s in enumerate(nodes) for b, i in enumerate(items)}
    servers = {i: ["1"] if int(i) <= n // 2 else [str(n)] for i in items}
    net = CachingNetwork.from_ids(nodes, edges, items, servers, rates, {s: capacity for s in nodes})
    return _checked(apply_type2_nodes(net, n_type2, seed))


def random_instance(seed=0, n_nodes=5, n_items=3, max_capacity=2, extra_edge_prob=0.3,
                    homogeneous=False, cloud=False, unequal_sizes=False, max_tries=100):
    """Seeded random connected instance with shortest-path routing.

    A random spanning tree plus extra edges with probability
    ``extra_edge_prob``; symmetric costs uniform on [1, 100]; rates uniform
    on [0, 10]. ``cloud`` puts every item on one server. With
    ``unequal_sizes`` sizes are uniform on [0.2, 2] and capacities on
    [0, max_capacity]; otherwise capacities are integers in
    ``0..max_capacity``. Draws that route into a mixed request loop are
    discarded and redrawn from the same generator.
    """
    rng = np.random.default_rng(seed)
    V, I = int(n_nodes), int(n_items)
    if V < 1 or I < 1:
        raise ScenarioError("random instance needs at least one node and one item")
    nodes, items = _ids(V), _ids(I)
    for _ in range(max_tries):
        order = rng.permutation(V)
        links = set()
        for k in range(1, V):
            a, b = int(order[k]), int(order[rng.integers(k)])
            links.add((min(a, b), max(a, b)))
        for a in range(V):
            for b in range(a + 1, V):
                if (a, b) not in links and rng.random() < extra_edge_prob:
                    links.add((a, b))
        links = sorted(links)
        costs = rng.uniform(1.0, 100.0, len(links))
        edges = _sym((nodes[a], nodes[b], w) for (a, b), w in zip(links, costs))
        if cloud:
            srv = nodes[int(rng.integers(V))]
            servers = {i: [srv] for i in items}
        else:
            servers = {i: [nodes[int(rng.integers(V))]] for i in items}
        lam = _rates(rng, V, I, homogeneous)
        rates = {(n, i): lam[a, b] for a, n in enumerate(nodes) for b, i in enumerate(items)}
        if unequal_sizes:
            sizes = dict(zip(items, rng.uniform(0.2, 2.0, I)))
            caps = dict(zip(nodes, rng.uniform(0.0, max_capacity, V)))
        else:
            sizes = None
            caps = dict(zip(nodes, rng.integers(0, int(max_capacity) + 1, V)))
        net = CachingNetwork.from_ids(nodes, edges, items, servers, rates, caps, sizes)
        if not detect_mixed_request_loop(net)[0]:
            return _checked(net)
    raise ScenarioError(f"no loop-free draw within {max_tries} tries")


# derived instances ------------------------------------------------------------

def apply_type2_nodes(net: CachingNetwork, n_type2: int, seed=0) -> CachingNetwork:
    """Zero the request rates of ``n_type2`` randomly chosen nodes.

    The nodes are the first ``n_type2`` of a seeded permutation, so for a
    fixed seed the chosen sets are nested as ``n_type2`` grows.
    """
    n_type2 = int(n_type2)
    if not 0 <= n_type2 <= net.n_nodes:
        raise ScenarioError(f"n_type2 must be in 0..{net.n_nodes}")
    if n_type2 == 0:
        return net
    chosen = np.random.default_rng(seed).permutation(net.n_nodes)[:n_type2]
    rates = np.array(net.rates)
    rates[chosen] = 0.0
    return net.with_rates(rates)


def extend_network(net: CachingNetwork, splits, capacity=None) -> CachingNetwork:
    """Insert one zero-rate relay per ``(u, v)`` link in ``splits``.

    Each relay halves the cost of the link it splits in both directions
    and is spliced into every path using the link, so existing routes keep
    their cost. A relay's own path for an item follows the traffic that
    crosses it, or the cheaper endpoint when no request does.
    """
    nodes = list(net.nodes)
    edges = dict(net.edges)
    paths = dict(net.paths)
    caps = list(net.capacities)
    for u_id, v_id in splits:
        u, v = nodes.index(str(u_id)), nodes.index(str(v_id))
        if (u, v) not in edges or (v, u) not in edges:
            raise ScenarioError(f"cannot split missing link ({u_id},{v_id})")
        r = len(nodes)
        nodes.append(str(len(nodes) + 1))
        caps.append(float(caps[u] if capacity is None else capacity))
        wuv, wvu = edges.pop((u, v)), edges.pop((v, u))
        edges.update({(u, r): wuv / 2, (r, v): wuv / 2, (v, r): wvu / 2, (r, u): wvu / 2})
        toward = {}
        for key, p in paths.items():
            for k in range(len(p) - 1):
                if {p[k], p[k + 1]} == {u, v}:
                    toward[key[1]] = p[k + 1]
                    paths[key] = p[:k + 1] + (r,) + p[k + 1:]
                    break
        for i in range(net.n_items):
            if i in toward:
                end = toward[i]
            else:
                ends = [e for e in (u, v) if (e, i) in paths]
                if not ends:
                    continue
                end = min(ends, key=lambda e: (_route_cost(edges, paths[(e, i)]), e))
            paths[(r, i)] = (r,) + paths[(end, i)]
    rates = np.vstack([net.rates, np.zeros((len(nodes) - net.n_nodes, net.n_items))])
    return CachingNetwork(tuple(nodes), net.items, edges, net.sizes, np.array(caps),
                          net.servers, rates, paths)


def _route_cost(edges, p):
    return sum(edges[(p[k + 1], p[k])] for k in range(len(p) - 1))


# Links split by the relays 12, 13, ..., 21, in insertion order (Abilene
# node ids; names in data/abilene.json). Short, central links come first.
ABILENE_RELAY_SCHEDULE = (
    ("1", "3"), ("2", "1"), ("2", "11"), ("11", "8"), ("10", "3"),
    ("10", "11"), ("7", "8"), ("9", "8"), ("5", "4"), ("6", "5"),
)


def extend_abilene(net: CachingNetwork, k: int, capacity=None) -> CachingNetwork:
    """Splice the first ``k`` relays of :data:`ABILENE_RELAY_SCHEDULE` into ``net``."""
    k = int(k)
    if not 0 <= k <= len(ABILENE_RELAY_SCHEDULE):
        raise ScenarioError(f"extra_nodes must be in 0..{len(ABILENE_RELAY_SCHEDULE)}")
    if k == 0:
        return net
    return extend_network(net, ABILENE_RELAY_SCHEDULE[:k], capacity)


SCENARIOS = {
    "fig1": fig1,
    "fig2_triangle": fig2_triangle,
    "fig3_no_loop": fig3_no_loop,
    "fig4_poa_chain": fig4_poa_chain,
    "fig5_paradox_pair": fig5_paradox_pair,
    "fig6_overlap": fig6_overlap,
    "fig7_curvature": fig7_curvature,
    "abilene": abilene,
    "abilene_extended": abilene_extended,
    "geant": geant,
    "grid": grid,
    "random": random_instance,
}


def build(name: str, **params):
    """Build the named scenario; ``fig5_paradox_pair`` returns a pair."""
    try:
        fn = SCENARIOS[name]
    except KeyError:
        raise ScenarioError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
    try:
        return fn(**params)
    except TypeError as exc:
        raise ScenarioError(f"invalid parameters for {name}: {exc}") from None
