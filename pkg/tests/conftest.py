"""Shared oracles and instance strategies.

The oracles below walk request paths hop by hop and enumerate subsets with
itertools; they share no code with the vectorised library evaluators.
"""

import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from selfish_caching.scenarios import random_instance


def walk_cost(net, x, s, i):
    """Routing cost of request (s, i): pay each hop until a cached copy is met."""
    p = net.paths[(s, i)]
    cost = 0.0
    for a, b in zip(p, p[1:]):
        if x[a, i]:
            break
        cost += net.edges[(b, a)]
    return cost


def walk_gain(net, x, s):
    zero = np.zeros_like(x)
    return sum(
        net.rates[s, i] * (walk_cost(net, zero, s, i) - walk_cost(net, x, s, i))
        for i in range(net.n_items) if net.rates[s, i] > 0
    )


def walk_welfare(net, x):
    return sum(walk_gain(net, x, s) for s in range(net.n_nodes))


def node_choices(net, s):
    """Every item subset that fits node s (any size, sizes respected)."""
    out = []
    for k in range(net.n_items + 1):
        for z in itertools.combinations(range(net.n_items), k):
            if sum(net.sizes[list(z)]) <= net.capacities[s] + 1e-9:
                out.append(z)
    return out


def all_profiles(net):
    """Every feasible placement, as boolean matrices."""
    for combo in itertools.product(*(node_choices(net, s) for s in range(net.n_nodes))):
        x = np.zeros((net.n_nodes, net.n_items), dtype=bool)
        for s, z in enumerate(combo):
            x[s, list(z)] = True
        yield x


@st.composite
def small_networks(draw, max_nodes=5, max_items=3, max_capacity=2, **kw):
    seed = draw(st.integers(0, 10**6))
    V = draw(st.integers(2, max_nodes))
    I = draw(st.integers(1, max_items))
    return random_instance(seed=seed, n_nodes=V, n_items=I, max_capacity=max_capacity, **kw)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
