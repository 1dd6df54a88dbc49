import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from conftest import all_profiles, node_choices, small_networks, walk_welfare
from selfish_caching.costs import StrategyProfile, fractional_welfare, surrogate_welfare
from selfish_caching.equilibrium import scan_psne
from selfish_caching.io import REPORT_SCHEMA
from selfish_caching.metrics import (
    brute_force_optimum,
    certify_bounds,
    check_alpha_scalability,
    curvature_details,
    discrete_curvature,
    lp_upper_bound,
)
from selfish_caching.network import CachingNetwork
from selfish_caching.scenarios import build, extend_network


def scipy_lp_value(net):
    """max L(phi) written directly from the paths and solved with HiGHS."""
    V, I = net.n_nodes, net.n_items
    n_phi = V * I
    rows, obj = [], []
    for s, i in sorted(net.paths):
        lam = net.rates[s, i]
        if lam <= 0:
            continue
        p = net.paths[(s, i)]
        for k in range(len(p) - 1):
            obj.append(lam * net.edges[(p[k + 1], p[k])])
            rows.append([p[j] * I + i for j in range(k + 1)])
    n = n_phi + len(rows)
    A, b = [], []
    for t, cols in enumerate(rows):
        a = np.zeros(n)
        a[n_phi + t] = 1
        a[cols] -= 1
        A.append(a)
        b.append(0.0)
    for s in range(V):
        a = np.zeros(n)
        for i in range(I):
            a[s * I + i] = net.sizes[i]
        A.append(a)
        b.append(net.capacities[s])
    c = np.concatenate([np.zeros(n_phi), obj])
    res = linprog(-c, A_ub=np.array(A), b_ub=b, bounds=[(0, 1)] * n)
    assert res.status == 0
    return -res.fun


def curvature_oracle(net):
    """Curvature straight from its definition using path walks."""
    V, I = net.n_nodes, net.n_items
    ones = np.ones((V, I), dtype=bool)
    best = 0.0
    for s in range(V):
        for z in node_choices(net, s):
            if not z:
                continue
            only = np.zeros((V, I), dtype=bool)
            only[s, list(z)] = True
            m0 = walk_welfare(net, only)
            if m0 <= 1e-9:
                continue
            rest = ones.copy()
            rest[s, list(z)] = False
            m1 = walk_welfare(net, ones) - walk_welfare(net, rest)
            best = max(best, (m0 - m1) / m0)
    return best


class TestOptimum:
    def test_fig4(self):
        net = build("fig4_poa_chain", I=10)
        x, v = brute_force_optimum(net)
        assert v == pytest.approx(992.0)
        assert x.to_sets(net) == {"1": ["1"], "2": [str(k) for k in range(2, 11)], "3": []}

    def test_fig5_right(self):
        net = build("fig5_paradox_pair")[1]
        x, v = brute_force_optimum(net)
        assert v == pytest.approx(5.0)
        assert x.to_sets(net) == {"1": ["1"], "2": [], "3": ["2"]}

    def test_zero_capacity(self):
        net = build("fig1", capacity=0)
        x, v = brute_force_optimum(net)
        assert v == 0.0 and x == StrategyProfile.empty(net)

    @settings(max_examples=25, deadline=None)
    @given(small_networks(max_nodes=4, max_items=2))
    def test_matches_exhaustive_oracle(self, net):
        want = max(walk_welfare(net, x) for x in all_profiles(net))
        assert brute_force_optimum(net)[1] == pytest.approx(want)


class TestUpperBound:
    def test_zero_capacity(self):
        assert lp_upper_bound(build("fig1", capacity=0))[1] == 0.0

    def test_unbounded_capacity_saturates(self):
        net = build("fig1", capacity=5)
        phi, v = lp_upper_bound(net)
        assert v == pytest.approx(float(net.baseline_costs.sum()))

    def test_fig4_at_least_optimum(self):
        assert lp_upper_bound(build("fig4_poa_chain", I=10))[1] >= 992.0 - 1e-6

    @settings(max_examples=30, deadline=None)
    @given(small_networks(max_nodes=6, max_items=4))
    def test_matches_scipy(self, net):
        phi, v = lp_upper_bound(net)
        assert v == pytest.approx(scipy_lp_value(net), rel=1e-6, abs=1e-6)
        assert np.all(phi >= 0) and np.all(phi <= 1)
        assert np.all(phi @ net.sizes <= net.capacities + 1e-9)

    def test_abilene_matches_scipy(self):
        net = build("abilene", capacity=2, seed=4)
        assert lp_upper_bound(net)[1] == pytest.approx(scipy_lp_value(net), rel=1e-6)

    @settings(max_examples=30, deadline=None)
    @given(small_networks(max_nodes=4, max_items=3), st.integers(0, 10**6))
    def test_surrogate_sandwich(self, net, seed):
        _, opt = brute_force_optimum(net)
        phi_star, upper = lp_upper_bound(net)
        assert opt <= upper + 1e-6
        rng = np.random.default_rng(seed)
        for _ in range(20):
            phi = rng.random((net.n_nodes, net.n_items))
            load = phi @ net.sizes
            scale = np.where(load > net.capacities, net.capacities / np.maximum(load, 1e-12), 1.0)
            phi = phi * scale[:, None]
            G, L = fractional_welfare(net, phi), surrogate_welfare(net, phi)
            assert (1 - 1 / math.e) * L - 1e-9 <= G <= L + 1e-9


class TestCurvature:
    @pytest.mark.parametrize("w21, w32", [(1, 1), (1, 3), (5, 2), (0.1, 10)])
    def test_fig7_closed_form(self, w21, w32):
        net = build("fig7_curvature", w21=w21, w32=w32)
        assert discrete_curvature(net) == pytest.approx(1 / (1 + w21 / w32), abs=1e-9)

    def test_single_node(self):
        net = CachingNetwork.from_ids(["1", "2"], [("1", "2", 1), ("2", "1", 1)], ["a"],
                                      {"a": ["2"]}, {("1", "a"): 1}, {"1": 1})
        # node 1 is the only cache; there is nobody else to absorb its gain
        assert discrete_curvature(net) == 0.0
        assert curvature_details(net).defined

    def test_undefined_when_no_positive_marginal(self):
        det = curvature_details(build("fig1", capacity=0))
        assert det.delta == 0.0 and not det.defined

    @settings(max_examples=30, deadline=None)
    @given(small_networks(max_nodes=4, max_items=3))
    def test_matches_definition(self, net):
        d = discrete_curvature(net)
        assert 0.0 <= d <= 1.0 + 1e-12
        assert d == pytest.approx(curvature_oracle(net), abs=1e-9)


class TestCertify:
    def test_fig4(self):
        rep = certify_bounds(build("fig4_poa_chain", I=10))
        assert rep.poa_exact == pytest.approx(101 / 992)
        assert rep.bound_flags["thm5"] == "not_applicable"
        assert rep.bound_flags["lemma3"] == "satisfied"

    def test_fig5_pair(self):
        left, right = build("fig5_paradox_pair")
        assert certify_bounds(left).poa_exact == pytest.approx(1.0)
        assert certify_bounds(right).poa_exact == pytest.approx(2 * 2 / (2 * 2 + 1 * 1), abs=1e-9)

    def test_bounds_ordered(self):
        rep = certify_bounds(build("fig7_curvature", w21=1, w32=3))
        assert rep.poa_lower_bound_thm6 >= rep.poa_lower_bound_thm5
        assert rep.bound_flags["thm5"] == "satisfied"
        assert rep.bound_flags["thm6"] == "satisfied"

    def test_supplied_equilibria(self):
        net = build("fig5_paradox_pair")[1]
        x = StrategyProfile.from_sets(net, {"1": ["1"], "3": ["2"]})
        rep = certify_bounds(net, equilibria=[x])
        assert rep.equilibria_source == "supplied" and rep.welfare_ne_worst == pytest.approx(5.0)

    def test_without_exact_optimum(self):
        rep = certify_bounds(build("fig7_curvature", I=3), limit=1)
        assert rep.welfare_opt_exact is None
        assert rep.bound_flags["thm5"] == "not_checkable"
        assert rep.bound_flags["lemma3"] == "not_checkable"

    def test_unequal_sizes_use_approximate_equilibrium(self):
        net = build("abilene", unequal_sizes=True, capacity=1, n_type2=0)
        rep = certify_bounds(net, limit=1)
        assert rep.equilibria_source == "approx_sequential" and rep.beta == 2.0
        assert rep.poa_lower_bound_thm8 == pytest.approx(1 / (1 + 2 * rep.alpha))

    def test_report_matches_schema(self):
        import jsonschema

        from selfish_caching.io import to_jsonable

        for name in ["fig4_poa_chain", "fig2_triangle", "fig7_curvature"]:
            jsonschema.validate(to_jsonable(certify_bounds(build(name)).to_dict()), REPORT_SCHEMA)

    @pytest.mark.parametrize("seed", range(10))
    def test_homogeneous_chains(self, seed):
        rng = np.random.default_rng(seed)
        I = 3
        w = rng.uniform(1, 10, 2)
        lam = rng.uniform(0, 10, I)
        nodes = ["1", "2", "3"]
        edges = [("1", "2", w[0]), ("2", "1", w[0]), ("2", "3", w[1]), ("3", "2", w[1])]
        items = [str(k) for k in range(I)]
        rates = {(n, i): lam[k] for n in nodes for k, i in enumerate(items)}
        caps = dict(zip(nodes, rng.integers(0, 3, 3)))
        net = CachingNetwork.from_ids(nodes, edges, items, {i: ["3"] for i in items}, rates, caps)
        rep = certify_bounds(net)
        assert rep.alpha == 2
        assert rep.poa_exact >= 1 / 3 - 1e-9


def star(n_leaves=3, lam=1.0, w=1.0):
    """Leaves route through hub "h" to server "srv"; one item, homogeneous rates."""
    leaves = [f"l{k}" for k in range(n_leaves)]
    nodes = ["h", "srv", *leaves]
    edges = [("h", "srv", w), ("srv", "h", w)]
    for leaf in leaves:
        edges += [(leaf, "h", w), ("h", leaf, w)]
    rates = {(v, "a"): lam for v in nodes}
    return CachingNetwork.from_ids(nodes, edges, ["a"], {"a": ["srv"]}, rates, {"h": 1})


def test_star_breaks_alpha_scalability():
    # The hub caching the item gains lam*w itself but adds (n+1)*lam*w to
    # welfare while alpha is 2, so the inequality fails for n >= 2.
    net = star(3)
    chk = check_alpha_scalability(net)
    assert chk.alpha == 2 and chk.violations == 1
    assert chk.witness["node"] == "h"
    assert chk.witness["payoff"] == pytest.approx(1.0)
    assert chk.witness["scaled_marginal"] == pytest.approx(4.0 / 2)
    assert check_alpha_scalability(star(1)).violations == 0


@settings(max_examples=20, deadline=None)
@given(small_networks(max_nodes=4, max_items=2), st.data())
def test_relay_never_helps_worst_equilibrium(net, data):
    links = sorted({tuple(sorted(e)) for e in net.edges})
    u, v = data.draw(st.sampled_from(links))
    bigger = extend_network(net, [(net.nodes[u], net.nodes[v])], capacity=1)
    before, after = scan_psne(net), scan_psne(bigger)
    if before.count:
        assert after.worst_welfare <= before.worst_welfare + 1e-9
    assert brute_force_optimum(bigger)[1] >= brute_force_optimum(net)[1] - 1e-9
    # the relay keeps every old route's cost
    for (s, i), p in net.paths.items():
        assert bigger.path_costs(s, i).sum() == pytest.approx(net.path_costs(s, i).sum())


def test_paradox_relay_lowers_poa():
    left, right = build("fig5_paradox_pair")
    l_rep, r_rep = certify_bounds(left), certify_bounds(right)
    assert r_rep.welfare_ne_worst <= l_rep.welfare_ne_worst
    assert r_rep.welfare_opt_exact > l_rep.welfare_opt_exact
    assert r_rep.poa_exact < l_rep.poa_exact
