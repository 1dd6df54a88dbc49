"""Welfare benchmarks and price-of-anarchy bound certification."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .costs import (
    StrategyProfile,
    node_gains_batch,
    social_welfare,
    surrogate_welfare,
    welfare_batch,
)
from .enumeration import DEFAULT_LIMIT, ProfileSpace, node_strategies
from .equilibrium import find_psne_state_graph, scan_psne
from .errors import CachingError, SearchLimitError
from .network import CachingNetwork
from .properties import check_properties
from .simplex import solve_lp

__all__ = [
    "AnalysisReport",
    "brute_force_optimum",
    "lp_upper_bound",
    "discrete_curvature",
    "curvature_details",
    "certify_bounds",
    "ScalabilityCheck",
    "check_alpha_scalability",
]

TOL = 1e-9


def brute_force_optimum(net: CachingNetwork, limit: int | None = DEFAULT_LIMIT):
    """Exact welfare maximiser over all feasible profiles.

    Returns ``(profile, value)``; the first profile (lexicographically)
    within ``1e-9`` relative of the maximum is reported.
    """
    space = ProfileSpace(net, limit)
    best_val = -math.inf
    best_x = None
    for _, X in space.batches():
        w = welfare_batch(net, X)
        k = int(np.argmax(w))
        if best_x is None or w[k] > best_val + TOL * max(1.0, abs(best_val)):
            best_val, best_x = float(w[k]), X[k].copy()
    return StrategyProfile(best_x), best_val


def lp_upper_bound(net: CachingNetwork):
    """Maximise the concave surrogate ``L(phi)`` as a linear program.

    One auxiliary variable per (request, hop) stands for
    ``min(1, sum of phi over the path prefix)``. Returns ``(phi, value)``
    with ``phi`` of shape ``(V, I)``.
    """
    V, I = net.n_nodes, net.n_items
    phi_col = {}
    rows = []  # (t column, list of phi keys)
    obj_t = []
    for r in net.requests:
        prefix = []
        for k, w in enumerate(r.costs):
            prefix.append((int(r.path[k]), r.item))
            if w <= 0:
                continue
            for key in prefix:
                phi_col.setdefault(key, len(phi_col))
            rows.append(list(prefix))
            obj_t.append(r.rate * w)
    n_phi, n_t = len(phi_col), len(rows)
    if n_t == 0:
        return np.zeros((V, I)), 0.0
    cap_nodes = sorted({s for s, _ in phi_col})
    m = n_t + len(cap_nodes)
    A = np.zeros((m, n_phi + n_t))
    b = np.zeros(m)
    for k, prefix in enumerate(rows):
        A[k, n_phi + k] = 1.0
        for key in prefix:
            A[k, phi_col[key]] -= 1.0
    for r_, s in enumerate(cap_nodes):
        row = n_t + r_
        b[row] = float(net.capacities[s])
    for (s, i), col in phi_col.items():
        A[n_t + cap_nodes.index(s), col] = float(net.sizes[i])
    c = np.concatenate([np.zeros(n_phi), np.array(obj_t)])
    res = solve_lp(c, A, b, upper=np.ones(n_phi + n_t))
    phi = np.zeros((V, I))
    for (s, i), col in phi_col.items():
        phi[s, i] = res.x[col]
    phi = np.clip(phi, 0.0, 1.0)
    return phi, float(surrogate_welfare(net, phi))


@dataclass
class CurvatureResult:
    delta: float
    defined: bool
    node: int | None = None
    items: tuple = ()


def curvature_details(net: CachingNetwork) -> CurvatureResult:
    """Discrete curvature of the welfare function with its maximiser.

    For every node ``s`` and feasible item set ``Z`` with positive
    marginal ``G'_Z(empty)``, compares that marginal against the marginal
    when every other node caches everything and ``s`` holds the rest of
    the catalogue. The worst relative drop over all ``(s, Z)`` is the
    curvature.
    """
    V, I = net.n_nodes, net.n_items
    full = np.ones((1, V, I), dtype=bool)
    g_full = float(welfare_batch(net, full)[0])
    best = CurvatureResult(0.0, False)
    for s in range(V):
        sets = [z for z in node_strategies(net, s) if z]
        if not sets:
            continue
        alone = np.zeros((len(sets), V, I), dtype=bool)
        rest = np.ones((len(sets), V, I), dtype=bool)
        for k, z in enumerate(sets):
            alone[k, s, list(z)] = True
            rest[k, s, list(z)] = False
        m_empty = welfare_batch(net, alone)
        m_full = g_full - welfare_batch(net, rest)
        for k in np.flatnonzero(m_empty > TOL):
            # in [0, 1] by monotonicity and submodularity; clip rounding noise
            ratio = min(1.0, max(0.0, (m_empty[k] - m_full[k]) / m_empty[k]))
            if not best.defined or ratio > best.delta + 1e-15:
                best = CurvatureResult(float(ratio), True, s, sets[k])
    return best


def discrete_curvature(net: CachingNetwork) -> float:
    """``delta(G)`` in [0, 1]; 0 when no node has a positive marginal."""
    return curvature_details(net).delta


@dataclass
class ScalabilityCheck:
    alpha: float
    profiles_checked: int
    violations: int
    witness: dict | None = None


def check_alpha_scalability(net: CachingNetwork, alpha=None, limit: int | None = DEFAULT_LIMIT,
                            tol: float = 1e-9) -> ScalabilityCheck:
    """Test ``g_s(x) >= [G(x) - G(0_s, x_-s)] / alpha`` on every feasible profile.

    ``alpha`` defaults to the longest positive-rate path length minus one.
    The witness is the first violating (profile, node) pair found.
    """
    a = float(check_properties(net).alpha if alpha is None else alpha)
    space = ProfileSpace(net, limit)
    bad, witness = 0, None
    for start, X in space.batches():
        g = node_gains_batch(net, X)
        G = g.sum(axis=1)
        for s in range(net.n_nodes):
            X0 = X.copy()
            X0[:, s, :] = False
            rhs = (G - welfare_batch(net, X0)) / a
            viol = g[:, s] < rhs - tol * np.maximum(1.0, np.abs(rhs))
            bad += int(viol.sum())
            if witness is None and viol.any():
                k = int(np.flatnonzero(viol)[0])
                witness = {
                    "profile": StrategyProfile(X[k]).to_sets(net),
                    "node": net.nodes[s],
                    "payoff": float(g[k, s]),
                    "scaled_marginal": float(rhs[k]),
                }
    return ScalabilityCheck(a, space.size, bad, witness)


@dataclass
class AnalysisReport:
    welfare_ne_worst: float | None
    welfare_ne_best: float | None
    n_equilibria: int
    equilibria_source: str
    welfare_opt_exact: float | None
    welfare_opt_upper: float
    poa_exact: float | None
    ratio_upper: float | None
    poa_lower_bound_thm5: float
    poa_lower_bound_thm6: float
    poa_lower_bound_thm8: float
    delta_g: float
    delta_defined: bool
    alpha: int
    beta: float
    properties: dict
    bound_flags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _flag(applicable, ratio, bound):
    if not applicable:
        return "not_applicable"
    if ratio is None:
        return "not_checkable"
    return "satisfied" if ratio >= bound - TOL else "violated"


def certify_bounds(
    net: CachingNetwork,
    equilibria=None,
    beta: float = 1.0,
    limit: int | None = DEFAULT_LIMIT,
) -> AnalysisReport:
    """Fill an :class:`AnalysisReport` for ``net``.

    ``equilibria`` is a list of profiles; when omitted they are enumerated
    exhaustively (equal sizes, within ``limit``), or a single one is found
    by the state-graph walk or the sequential knapsack procedure.
    PoA lower bounds are only checked against the exact optimum: the LP
    value bounds the optimum from above, so it cannot certify them.
    """
    props = check_properties(net)
    source = "supplied"
    worst = best = None
    count = 0
    if equilibria is not None:
        ws = [social_welfare(net, p) for p in equilibria]
        count = len(ws)
        if ws:
            worst, best = min(ws), max(ws)
    elif net.equal_sizes:
        try:
            scan = scan_psne(net, limit)
            source, count = "brute_force", scan.count
            worst, best = scan.worst_welfare, scan.best_welfare
        except SearchLimitError:
            source = "state_graph"
            try:
                res = find_psne_state_graph(net)
                worst = best = social_welfare(net, res.profile)
                count = 1
            except CachingError:
                pass
    else:
        from .approx import find_beta_psne

        source = "approx_sequential"
        try:
            res = find_beta_psne(net)
            worst = best = social_welfare(net, res.profile)
            count = 1
            beta = max(beta, res.beta)
        except CachingError:
            pass

    try:
        _, opt = brute_force_optimum(net, limit)
    except SearchLimitError:
        opt = None
    _, upper = lp_upper_bound(net)
    curv = curvature_details(net)
    alpha = props.alpha

    def ratio(den):
        if worst is None or den is None:
            return None
        if den <= TOL:
            return 1.0
        return worst / den

    poa = ratio(opt)
    b5 = 1.0 / (1.0 + alpha)
    b6 = 1.0 / (alpha + curv.delta)
    b8 = 1.0 / (1.0 + alpha * beta)
    game1 = (net.equal_sizes and props.homogeneous_requests and props.path_overlap
             and not props.has_mixed_request_loop)
    game2 = props.cloud_property and props.path_overlap and props.homogeneous_requests
    flags = {
        "thm5": _flag(game1, poa, b5),
        "thm6": _flag(game1, poa, b6),
        "thm8": _flag(game2, poa, b8),
        "lemma3": "not_checkable" if opt is None else (
            "satisfied" if opt <= upper + 1e-6 * max(1.0, upper) else "violated"),
    }
    chain = [v for v in (worst, best, opt, upper) if v is not None]
    flags["welfare_order"] = "satisfied" if all(
        a <= b + 1e-6 * max(1.0, abs(b)) for a, b in zip(chain, chain[1:])) else "violated"
    return AnalysisReport(
        welfare_ne_worst=worst,
        welfare_ne_best=best,
        n_equilibria=count,
        equilibria_source=source,
        welfare_opt_exact=opt,
        welfare_opt_upper=upper,
        poa_exact=poa,
        ratio_upper=ratio(upper),
        poa_lower_bound_thm5=b5,
        poa_lower_bound_thm6=b6,
        poa_lower_bound_thm8=b8,
        delta_g=curv.delta,
        delta_defined=curv.defined,
        alpha=alpha,
        beta=beta,
        properties={
            "homogeneous_requests": props.homogeneous_requests,
            "path_overlap": props.path_overlap,
            "has_mixed_request_loop": props.has_mixed_request_loop,
            "cloud_property": props.cloud_property,
        },
        bound_flags=flags,
    )
