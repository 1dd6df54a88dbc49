"""Pure-strategy equilibria of the equal-size game.

Best responses, equilibrium verification, the add/change-arc walk on the
state graph, and an exhaustive equilibrium enumerator used as an oracle.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .costs import (
    StrategyProfile,
    deviation_weights,
    deviation_weights_batch,
    is_feasible,
    welfare_batch,
)
from .enumeration import DEFAULT_LIMIT, ProfileSpace
from .errors import InfeasibleProfileError, NonTerminationError, UnsupportedOperationError
from .network import CachingNetwork
from .properties import detect_mixed_request_loop

__all__ = [
    "EquilibriumResult",
    "best_response",
    "verify_psne",
    "find_psne_state_graph",
    "brute_force_psne",
    "scan_psne",
    "arc_bound",
    "default_arc_budget",
]

TOL = 1e-9


@dataclass
class EquilibriumResult:
    profile: StrategyProfile
    method: str
    verified: bool
    beta: float = 1.0
    arcs_traversed: int = 0
    rounds: int = 0
    max_round_changes: int = 0
    seed: int | None = None
    node_steps: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self, net: CachingNetwork) -> dict:
        return {
            "method": self.method,
            "verified": self.verified,
            "beta": self.beta,
            "arcs_traversed": self.arcs_traversed,
            "rounds": self.rounds,
            "max_round_changes": self.max_round_changes,
            "seed": self.seed,
            "node_steps": self.node_steps,
            "profile": self.profile.to_sets(net),
            **self.extra,
        }


def _require_equal_sizes(net):
    if not net.equal_sizes:
        raise UnsupportedOperationError(
            "items have unequal sizes; use the approximate (knapsack) game instead")


def effective_capacity(net: CachingNetwork, s: int) -> int:
    size = float(net.sizes[0]) if net.n_items else 1.0
    return min(net.n_items, int(np.floor(float(net.capacities[s]) / size + 1e-9)))


def _top(q: np.ndarray, c: int) -> tuple:
    # stable sort on -q keeps lower indices first among ties
    order = np.argsort(-q, kind="stable")
    return tuple(sorted(int(i) for i in order[:c]))


def best_response(net: CachingNetwork, profile: StrategyProfile, s) -> tuple:
    """The ``c_s`` items with the largest deviation weights (ties: lower index)."""
    _require_equal_sizes(net)
    s = net.node_index(s)
    return _top(deviation_weights(net, profile, s), effective_capacity(net, s))


def verify_psne(net: CachingNetwork, profile: StrategyProfile):
    """Check the equilibrium condition node by node.

    Returns ``(True, None)`` or ``(False, (node_index, improving_items))``
    for the first node that can gain more than ``1e-9`` by deviating.
    """
    _require_equal_sizes(net)
    if not is_feasible(net, profile):
        raise InfeasibleProfileError("profile exceeds a cache capacity")
    for s in range(net.n_nodes):
        q = deviation_weights(net, profile, s)
        best = _top(q, effective_capacity(net, s))
        current = profile.cached(s)
        if q[list(best)].sum() - q[list(current)].sum() > TOL:
            return False, (s, best)
    return True, None


def arc_bound(net: CachingNetwork) -> int:
    """``|V| |I|^2 (|V| - 2)^2``, the path-length bound on loop-free instances."""
    V, I = net.n_nodes, net.n_items
    return V * I * I * (V - 2) ** 2


def default_arc_budget(net: CachingNetwork) -> int:
    """Rounds times (one add arc plus the per-round change-arc bound), plus one."""
    V, I = net.n_nodes, net.n_items
    return V * I * (1 + I * max(V - 2, 0) ** 2) + 1


def _first_improving_swap(net, x):
    for v in range(net.n_nodes):
        row = x[v]
        if not row.any() or row.all():
            continue
        q = deviation_weights(net, x, v)
        held = np.flatnonzero(row)
        for j in np.flatnonzero(~row):
            for t in held:
                if q[j] - q[t] > TOL:
                    return v, int(j), int(t)
    return None


def find_psne_state_graph(net: CachingNetwork, seed: int = 0, max_arcs: int | None = None) -> EquilibriumResult:
    """Walk the state graph from the empty profile to a sink.

    Each round adds the best item to one non-full node (chosen uniformly
    with ``random.Random(seed)``; seed 0 always takes the lowest index),
    then applies strictly improving single-item swaps, scanning nodes,
    incoming items and outgoing items in index order, until none is left.
    """
    _require_equal_sizes(net)
    budget = default_arc_budget(net) if max_arcs is None else int(max_arcs)
    caps = [effective_capacity(net, s) for s in range(net.n_nodes)]
    x = np.zeros((net.n_nodes, net.n_items), dtype=bool)
    rng = random.Random(seed)
    arcs = rounds = max_changes = 0

    def step():
        nonlocal arcs
        arcs += 1
        if arcs > budget:
            _, loop = detect_mixed_request_loop(net)
            raise NonTerminationError(arcs - 1, budget, loop)

    while True:
        eligible = [s for s in range(net.n_nodes) if x[s].sum() < caps[s]]
        if not eligible:
            break
        s = eligible[0] if seed == 0 else rng.choice(eligible)
        q = deviation_weights(net, x, s)
        q_free = np.where(x[s], -np.inf, q)
        step()
        x[s, int(np.argmax(q_free))] = True
        rounds += 1
        changes = 0
        while (swap := _first_improving_swap(net, x)) is not None:
            v, j, t = swap
            step()
            x[v, j] = True
            x[v, t] = False
            changes += 1
        max_changes = max(max_changes, changes)

    profile = StrategyProfile(x)
    ok, _ = verify_psne(net, profile)
    return EquilibriumResult(
        profile=profile, method="state_graph", verified=ok, beta=1.0,
        arcs_traversed=arcs, rounds=rounds, max_round_changes=max_changes, seed=seed,
    )


def psne_mask(net: CachingNetwork, X: np.ndarray) -> np.ndarray:
    """Which placements in a ``(P, V, I)`` stack are equilibria."""
    q = deviation_weights_batch(net, X)
    current = (q * X).sum(axis=2)
    ok = np.ones(X.shape[0], dtype=bool)
    active = np.flatnonzero(net.rates.sum(axis=1) > 0)
    for s in active:
        c = effective_capacity(net, s)
        if c == 0:
            continue
        best = -np.sort(-q[:, s, :], axis=1)[:, :c].sum(axis=1)
        ok &= best - current[:, s] <= TOL
    return ok


def brute_force_psne(net: CachingNetwork, limit: int | None = DEFAULT_LIMIT) -> list:
    """Every pure equilibrium, by enumerating all feasible profiles.

    Profiles come out in lexicographic order of their per-node item tuples.
    Nodes without requests have identically zero payoff, so any strategy
    is a best response for them.
    """
    _require_equal_sizes(net)
    space = ProfileSpace(net, limit)
    found = []
    for _, X in space.batches():
        for k in np.flatnonzero(psne_mask(net, X)):
            found.append(StrategyProfile(X[k]))
    return found


@dataclass
class EquilibriumScan:
    """Summary of an exhaustive equilibrium scan without storing every profile."""

    count: int
    space_size: int
    worst_welfare: float | None
    best_welfare: float | None
    worst: StrategyProfile | None
    best: StrategyProfile | None


def scan_psne(net: CachingNetwork, limit: int | None = DEFAULT_LIMIT) -> EquilibriumScan:
    """Count equilibria and track the lowest- and highest-welfare ones.

    Ties keep the lexicographically first profile.
    """
    _require_equal_sizes(net)
    space = ProfileSpace(net, limit)
    count = 0
    lo = hi = None
    lo_x = hi_x = None
    for _, X in space.batches():
        mask = psne_mask(net, X)
        if not mask.any():
            continue
        Xe = X[mask]
        w = welfare_batch(net, Xe)
        count += len(w)
        a, b = int(np.argmin(w)), int(np.argmax(w))
        if lo is None or w[a] < lo - TOL:
            lo, lo_x = float(w[a]), Xe[a].copy()
        if hi is None or w[b] > hi + TOL:
            hi, hi_x = float(w[b]), Xe[b].copy()
    return EquilibriumScan(
        count=count, space_size=space.size, worst_welfare=lo, best_welfare=hi,
        worst=None if lo_x is None else StrategyProfile(lo_x),
        best=None if hi_x is None else StrategyProfile(hi_x),
    )
