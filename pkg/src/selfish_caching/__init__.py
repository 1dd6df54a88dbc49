"""Selfish caching games on directed graphs.

Nodes choose which items to cache to cut their own retrieval cost; this
package evaluates such games, finds and verifies equilibria, and measures
how far they fall from the social optimum.
"""

from .approx import find_beta_psne, knapsack_exact, knapsack_half_approx, verify_beta_psne
from .costs import (
    StrategyProfile,
    caching_gain,
    deviation_weights,
    fractional_welfare,
    is_feasible,
    node_cost,
    request_cost,
    social_welfare,
    surrogate_welfare,
)
from .equilibrium import (
    EquilibriumResult,
    best_response,
    brute_force_psne,
    find_psne_state_graph,
    scan_psne,
    verify_psne,
)
from .errors import (
    CachingError,
    InfeasibleProfileError,
    MissingPathError,
    NetworkFormatError,
    NonTerminationError,
    PropertyViolationError,
    ScenarioError,
    SearchLimitError,
    UnsupportedOperationError,
)
from .io import dump_network, load_network
from .metrics import (
    AnalysisReport,
    brute_force_optimum,
    certify_bounds,
    discrete_curvature,
    lp_upper_bound,
)
from .network import CachingNetwork, validate_network
from .properties import PropertyReport, check_properties, detect_mixed_request_loop
from .scenarios import apply_type2_nodes, build, extend_abilene

