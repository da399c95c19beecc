"""Flow-based cluster improvement on undirected weighted graphs.

Public surface: graph storage and metrics, an exact max-flow engine, ratio
minimization drivers, the three improvement algorithms (mqi, flow_improve,
local_flow_improve), seeded PageRank with sweep cuts, flow-based node
coordinates, and image-to-graph conversion.
"""

from .graph import (
    CutProfile,
    GraphFormatError,
    NodeSet,
    WeightedGraph,
    aux_metrics,
    boundary,
    conductance,
    cut,
    load_edge_list,
    load_node_set,
    metrics_json,
    rvol,
)
from .flow import FlowBudgetExceeded, FlowError, FlowNetwork, FlowStats
from .fracprog import (
    ImproveResult,
    RatioObjective,
    SeedRejectedError,
    TraceStep,
    bisection,
    dinkelbach,
    exact_eps,
)
from .improve import (
    LocalFrontier,
    fi_subproblem,
    flow_improve,
    lfi_subproblem,
    local_flow_improve,
    mqi,
    mqi_subproblem,
    theta_of,
)
from .diffusion import SparseScoreVector, seeded_pagerank, sweep_cut
from .embed import EmbeddingParams, EmbeddingResult, flow_coordinates, truncated_svd
from .imagegraph import PixelGraphMap, image_to_graph

__version__ = "0.1.0"

__all__ = [
    "CutProfile",
    "GraphFormatError",
    "NodeSet",
    "WeightedGraph",
    "aux_metrics",
    "boundary",
    "conductance",
    "cut",
    "load_edge_list",
    "load_node_set",
    "metrics_json",
    "rvol",
    "FlowBudgetExceeded",
    "FlowError",
    "FlowNetwork",
    "FlowStats",
    "ImproveResult",
    "RatioObjective",
    "SeedRejectedError",
    "TraceStep",
    "bisection",
    "dinkelbach",
    "exact_eps",
    "LocalFrontier",
    "fi_subproblem",
    "flow_improve",
    "lfi_subproblem",
    "local_flow_improve",
    "mqi",
    "mqi_subproblem",
    "theta_of",
    "SparseScoreVector",
    "seeded_pagerank",
    "sweep_cut",
    "EmbeddingParams",
    "EmbeddingResult",
    "flow_coordinates",
    "truncated_svd",
    "PixelGraphMap",
    "image_to_graph",
    "__version__",
]
