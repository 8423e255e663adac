"""Rank aggregation from pairwise comparisons via randomized Kaczmarz.

Pairwise win tallies under the Bradley–Terry–Luce model give noisy log-odds
on the edges of a comparison graph; the log-weights are recovered from the
Laplacian normal equations with a randomized Kaczmarz solver.
"""

from .baselines import rank_centrality, regularized_mle
from .btl import (
    EdgeObservations,
    WeightVector,
    estimate_probability,
    ground_truth_weights,
    logit,
    preference_probability,
    simulate_comparisons,
    update_running_estimate,
)
from .errors import (
    ConfigurationError,
    DegenerateEstimateError,
    MatchFileError,
    NumericError,
    ParameterError,
    RankingError,
)
from .graph import (
    ComparisonGraph,
    erdos_renyi,
    is_connected,
    laplacian_extreme_eigenvalues,
    read_edge_list,
    row_norm_sq,
    write_edge_list,
)
from .metrics import d_w, normalized_weight_error, ordering, top_k_in_m, win_ratio
from .solver import (
    LinearSystem,
    SolveReport,
    SolverState,
    build_system,
    distance_center,
    kaczmarz_step,
    solve,
    tracking_step,
    warm_start,
    weights_from_iterate,
)
from .stopping import NeverStop, RankErrorSettled, RelativeWeightChange, TopKInTopM, make_rule

__all__ = [
    "rank_centrality",
    "regularized_mle",
    "EdgeObservations",
    "WeightVector",
    "estimate_probability",
    "ground_truth_weights",
    "logit",
    "preference_probability",
    "simulate_comparisons",
    "update_running_estimate",
    "ConfigurationError",
    "DegenerateEstimateError",
    "MatchFileError",
    "NumericError",
    "ParameterError",
    "RankingError",
    "ComparisonGraph",
    "erdos_renyi",
    "is_connected",
    "laplacian_extreme_eigenvalues",
    "read_edge_list",
    "row_norm_sq",
    "write_edge_list",
    "d_w",
    "normalized_weight_error",
    "ordering",
    "top_k_in_m",
    "win_ratio",
    "LinearSystem",
    "SolveReport",
    "SolverState",
    "build_system",
    "distance_center",
    "kaczmarz_step",
    "solve",
    "tracking_step",
    "warm_start",
    "weights_from_iterate",
    "NeverStop",
    "RankErrorSettled",
    "RelativeWeightChange",
    "TopKInTopM",
    "make_rule",
]

__version__ = "0.1.0"
