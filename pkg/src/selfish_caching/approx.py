"""Unequal item sizes: per-node knapsacks and approximate equilibria."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costs import StrategyProfile, deviation_weights, gain_decomposition, is_feasible
from .equilibrium import EquilibriumResult
from .errors import InfeasibleProfileError, PropertyViolationError
from .network import CachingNetwork
from .properties import cloud_holds, overlap_violation

__all__ = [
    "KnapsackSolution",
    "knapsack_exact",
    "knapsack_half_approx",
    "find_beta_psne",
    "verify_beta_psne",
]

TOL = 1e-9
_EPS = 1e-12


@dataclass(frozen=True)
class KnapsackSolution:
    chosen: tuple
    value: float
    exact: bool
    lp_integral: tuple = ()
    lp_fractional: tuple = ()


def _ratio_order(q, L):
    # stable on ties so equal ratios keep input order
    return sorted(range(len(q)), key=lambda i: -q[i] / L[i])


def knapsack_exact(q, L, c) -> KnapsackSolution:
    """Optimal 0/1 knapsack by depth-first branch and bound.

    Items are branched in index order, "take" before "skip", and the
    incumbent only changes on a strict improvement, so among optimal sets
    the one preferring lower indices wins. The bound is the fractional
    greedy fill of the undecided items.
    """
    q = [float(v) for v in q]
    L = [float(v) for v in L]
    c = float(c)
    n = len(q)
    order = _ratio_order(q, L)
    best_val = -1.0
    best_set = ()
    chosen = []

    def bound(k, room):
        total = 0.0
        for i in order:
            if i < k:
                continue
            if L[i] <= room:
                room -= L[i]
                total += q[i]
            else:
                return total + q[i] * room / L[i]
        return total

    def dfs(k, room, val):
        nonlocal best_val, best_set
        if k == n:
            if val > best_val + _EPS:
                best_val, best_set = val, tuple(chosen)
            return
        if val + bound(k, room) <= best_val + _EPS:
            return
        if L[k] <= room + 1e-12:
            chosen.append(k)
            dfs(k + 1, room - L[k], val + q[k])
            chosen.pop()
        dfs(k + 1, room, val)

    dfs(0, c, 0.0)
    return KnapsackSolution(best_set, max(best_val, 0.0), True)


def knapsack_half_approx(q, L, c) -> KnapsackSolution:
    """Half-approximate knapsack from the LP relaxation.

    The relaxation is solved by the greedy ratio rule, which leaves at
    most one fractional item. The packed set wins unless the fractional
    item alone is worth at least as much. Items larger than the whole
    capacity are dropped first; otherwise the lone fractional item could
    be one that never fits.
    """
    q = [float(v) for v in q]
    L = [float(v) for v in L]
    c = float(c)
    fits = [i for i in _ratio_order(q, L) if L[i] <= c + 1e-12]
    room = c
    packed, frac = [], []
    for i in fits:
        if L[i] <= room + 1e-12:
            packed.append(i)
            room -= L[i]
        else:
            if room > 1e-12:
                frac.append(i)
            break
    packed_val = sum(q[i] for i in packed)
    if not frac or packed_val > max(q[i] for i in frac):
        chosen = tuple(sorted(packed))
    else:
        chosen = (max(frac, key=lambda i: (q[i], -i)),)
    return KnapsackSolution(
        chosen, sum(q[i] for i in chosen), False, tuple(sorted(packed)), tuple(frac))


def _tiers(net: CachingNetwork):
    return [len(set().union(*[net.intermediate_nodes(s, i) for i in range(net.n_items)]))
            for s in range(net.n_nodes)]


def find_beta_psne(net: CachingNetwork, solver: str = "half") -> EquilibriumResult:
    """Sequential approximate equilibrium for cloud instances with path overlap.

    Non-server nodes decide in increasing order of their number of
    intermediate nodes (index order within a tier); each solves its
    knapsack over the deviation weights fixed by the nodes already decided.
    ``solver="exact"`` swaps in the exact knapsack (beta becomes 1).
    """
    if not cloud_holds(net):
        raise PropertyViolationError("cloud_property", {
            "servers": {net.items[i]: sorted(net.nodes[v] for v in d) for i, d in enumerate(net.servers)}})
    viol = overlap_violation(net)
    if viol is not None:
        v, s, i = viol
        raise PropertyViolationError("path_overlap", {
            "requester": net.nodes[v], "node": net.nodes[s], "item": net.items[i]})
    solve = {"half": knapsack_half_approx, "exact": knapsack_exact}[solver]
    server = next(iter(net.servers[0])) if net.n_items else None
    tiers = _tiers(net)
    order = sorted((tiers[s], s) for s in range(net.n_nodes) if s != server)
    x = np.zeros((net.n_nodes, net.n_items), dtype=bool)
    decided = set()
    steps = 0
    for _, s in order:
        for i in range(net.n_items):
            pending = net.intermediate_nodes(s, i) - decided
            if pending:
                raise RuntimeError(f"node {net.nodes[s]} depends on undecided nodes {sorted(pending)}")
        q = deviation_weights(net, x, s)
        sol = solve(q, net.sizes, net.capacities[s])
        x[s, list(sol.chosen)] = True
        decided.add(s)
        steps += 1
    profile = StrategyProfile(x)
    beta = 2.0 if solver == "half" else 1.0
    ok, _ = verify_beta_psne(net, profile, beta)
    return EquilibriumResult(
        profile=profile, method="approx_sequential", verified=ok, beta=beta, node_steps=steps)


def verify_beta_psne(net: CachingNetwork, profile: StrategyProfile, beta: float = 2.0):
    """No node can get more than ``beta`` times its current gain by deviating.

    The best deviation is computed exactly (constant part of the gain plus
    an exact knapsack over the deviation weights). Equality passes.
    """
    if beta < 1:
        raise ValueError("beta must be >= 1")
    if not is_feasible(net, profile):
        raise InfeasibleProfileError("profile exceeds a cache capacity")
    for s in range(net.n_nodes):
        const, per_item = gain_decomposition(net, profile, s)
        current = const + per_item.sum()
        q = deviation_weights(net, profile, s)
        if not q.any():
            continue
        sol = knapsack_exact(q, net.sizes, net.capacities[s])
        if const + sol.value > beta * current + TOL:
            return False, (s, sol.chosen)
    return True, None
