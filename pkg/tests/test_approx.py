import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import node_choices, small_networks, walk_gain
from selfish_caching.approx import (
    find_beta_psne,
    knapsack_exact,
    knapsack_half_approx,
    verify_beta_psne,
)
from selfish_caching.costs import StrategyProfile
from selfish_caching.errors import PropertyViolationError
from selfish_caching.scenarios import build


def brute_knapsack(q, L, c):
    best, best_set = 0.0, ()
    for k in range(len(q) + 1):
        for z in itertools.combinations(range(len(q)), k):
            if sum(L[i] for i in z) <= c + 1e-12:
                v = sum(q[i] for i in z)
                if v > best + 1e-12:
                    best, best_set = v, z
    return best, best_set


knapsacks = st.integers(1, 10).flatmap(lambda n: st.tuples(
    st.lists(st.floats(0, 10), min_size=n, max_size=n),
    st.lists(st.floats(0.1, 5), min_size=n, max_size=n),
    st.floats(0, 12),
))


@settings(max_examples=200, deadline=None)
@given(knapsacks)
def test_exact_knapsack_matches_enumeration(inst):
    q, L, c = inst
    sol = knapsack_exact(q, L, c)
    best, _ = brute_knapsack(q, L, c)
    assert sol.value == pytest.approx(best, abs=1e-9)
    assert sum(L[i] for i in sol.chosen) <= c + 1e-9
    assert sol.value == pytest.approx(sum(q[i] for i in sol.chosen))


@settings(max_examples=200, deadline=None)
@given(knapsacks)
def test_half_approx_guarantee(inst):
    q, L, c = inst
    sol = knapsack_half_approx(q, L, c)
    best, _ = brute_knapsack(q, L, c)
    assert sum(L[i] for i in sol.chosen) <= c + 1e-9
    assert sol.value >= 0.5 * best - 1e-9


def test_exact_tie_break_prefers_low_indices():
    assert knapsack_exact([1, 1, 1], [1, 1, 1], 2).chosen == (0, 1)


def test_half_approx_fractional_item_wins():
    # greedy packs item 0 (ratio 2), item 1 is fractional and worth more
    sol = knapsack_half_approx([2, 9], [1, 10], 10)
    assert sol.lp_integral == (0,) and sol.lp_fractional == (1,)
    assert sol.chosen == (1,)


def test_half_approx_drops_items_that_never_fit():
    sol = knapsack_half_approx([100, 1], [5, 1], 2)
    assert sol.chosen == (1,)


def test_find_beta_psne_on_unequal_abilene():
    net = build("abilene", unequal_sizes=True, capacity=2)
    res = find_beta_psne(net)
    assert res.verified and res.beta == 2.0
    assert res.node_steps == net.n_nodes - 1
    assert verify_beta_psne(net, res.profile, 2.0)[0]


def test_exact_solver_gives_true_equilibrium():
    net = build("abilene", unequal_sizes=True, capacity=2)
    res = find_beta_psne(net, solver="exact")
    assert res.beta == 1.0 and verify_beta_psne(net, res.profile, 1.0)[0]


def test_requires_cloud():
    with pytest.raises(PropertyViolationError) as exc:
        find_beta_psne(build("fig1"))
    assert exc.value.prop == "cloud_property"


def test_requires_overlap():
    net = build("fig6_overlap")
    paths = dict(net.paths)
    # node 2 detours through node 1 over a new edge, so the suffix of p(1, i) differs
    edges = dict(net.edges)
    edges[(0, 2)] = edges[(2, 0)] = 5.0
    for i in range(net.n_items):
        paths[(1, i)] = (1, 0, 2)
    bad = net.replace(paths=paths, edges=edges)
    with pytest.raises(PropertyViolationError) as exc:
        find_beta_psne(bad)
    assert exc.value.prop == "path_overlap"


def test_verify_beta_rejects_bad_profile():
    net = build("fig4_poa_chain", I=4)
    ok, witness = verify_beta_psne(net, StrategyProfile.empty(net), 2.0)
    assert not ok and witness[0] == 0
    with pytest.raises(ValueError):
        verify_beta_psne(net, StrategyProfile.empty(net), 0.5)


@settings(max_examples=30, deadline=None)
@given(small_networks(max_nodes=4, max_items=3, max_capacity=3, cloud=True, unequal_sizes=True))
def test_beta_psne_against_exhaustive_deviations(net):
    res = find_beta_psne(net)
    x = np.array(res.profile.placement)
    for s in range(net.n_nodes):
        current = walk_gain(net, x, s)
        for z in node_choices(net, s):
            y = x.copy()
            y[s] = False
            y[s, list(z)] = True
            assert walk_gain(net, y, s) <= 2.0 * current + 1e-9
