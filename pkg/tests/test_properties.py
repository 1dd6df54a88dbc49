import networkx as nx
import numpy as np
from hypothesis import given, settings

from conftest import small_networks
from selfish_caching.network import CachingNetwork
from selfish_caching.properties import (
    check_properties,
    detect_mixed_request_loop,
    traversed_edges,
    traversed_two_cycles,
)
from selfish_caching.scenarios import build


def test_fig2_loop_witness():
    found, witness = detect_mixed_request_loop(build("fig2_triangle"))
    assert found
    assert witness == ("1", "3", "2", "1")


def test_fig3_is_loop_free_but_has_two_cycles():
    net = build("fig3_no_loop")
    assert detect_mixed_request_loop(net) == (False, None)
    assert ("1", "2") in traversed_two_cycles(net)


def test_zero_rate_paths_do_not_count():
    net = build("fig2_triangle")
    rates = np.array(net.rates)
    rates[1, 1] = 0.0  # node 2 stops requesting item 2, so 2 -> 1 is unused
    assert not detect_mixed_request_loop(net.with_rates(rates))[0]


@settings(max_examples=60, deadline=None)
@given(small_networks(max_nodes=6, extra_edge_prob=0.6))
def test_loop_detector_matches_networkx(net):
    g = nx.DiGraph(list(traversed_edges(net)))
    expected = any(len(c) >= 3 for c in nx.simple_cycles(g))
    assert detect_mixed_request_loop(net)[0] == expected


def test_loop_detector_on_crafted_cycle():
    # each request goes two hops clockwise around a 4-cycle
    nodes = ["1", "2", "3", "4"]
    edges = []
    for k in range(4):
        u, v = nodes[k], nodes[(k + 1) % 4]
        edges += [(u, v, 1), (v, u, 1)]
    items = nodes
    servers = {i: [nodes[(k + 2) % 4]] for k, i in enumerate(items)}
    paths = {(nodes[k], nodes[k]): (nodes[k], nodes[(k + 1) % 4], nodes[(k + 2) % 4]) for k in range(4)}
    rates = {(n, n): 1 for n in nodes}
    net = CachingNetwork.from_ids(nodes, edges, items, servers, rates, paths=paths)
    found, witness = detect_mixed_request_loop(net)
    assert found and witness == ("1", "2", "3", "4", "1")


def test_fig1_properties():
    rep = check_properties(build("fig1"))
    assert rep.path_overlap and not rep.has_mixed_request_loop
    assert rep.request_intermediates[("5", "1")] == {"6"}
    assert rep.request_intermediates[("3", "2")] == {"6", "5"}


def test_overlap_witness():
    rep = check_properties(build("fig3_no_loop"))
    assert not rep.path_overlap
    assert rep.overlap_witness == {"requester": "3", "node": "1", "item": "1"}


def test_cloud_and_alpha():
    rep = check_properties(build("fig4_poa_chain"))
    assert rep.cloud_property and rep.alpha == 2
    assert not rep.homogeneous_requests
    assert not check_properties(build("fig1")).cloud_property


def test_tiers():
    rep = check_properties(build("fig6_overlap"))
    assert rep.tiers == {"1": 1, "2": 0, "3": 0}
    assert rep.intermediate_sets["1"] == {"2"}


def test_alpha_ignores_zero_rate_requests():
    net = build("fig5_paradox_pair")[1]
    assert check_properties(net).alpha == 2


def test_report_serializes():
    d = check_properties(build("fig2_triangle")).to_dict()
    assert d["loop_witness"] == ["1", "3", "2", "1"]
    assert isinstance(d["request_intermediates"], list)
