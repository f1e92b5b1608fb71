"""Score-based learning of maximal ancestral graphs by exact branch-and-cut."""

from .datagen import (
    Dataset,
    GroundTruth,
    WeightedGraph,
    berkeley_demo,
    gen_3bf,
    gen_bf,
    gen_er,
    gen_forbidden,
    hide_latents,
    sample_weights,
    sem_sample,
)
from .evaluation import EdgeType, best_over_thresholds, f1, shd, threshold
from .graph import (
    AlmostDirectedCycle,
    InducingPathWitness,
    MixedGraph,
    distance_matrix,
    find_almost_directed_cycles,
    find_directed_cycle,
    find_inducing_paths,
    found_inducing_path,
    is_mag,
    trace_distance_matrix,
)
from .oracle import enumerate_mags, is_ancestral_def, is_maximal_def, m_separated, oracle_solve
from .separation import (
    LazyCut,
    cut_from_almost_directed_cycle,
    cut_from_directed_cycle,
    cut_from_inducing_path,
    separate,
)
from .solver import Instance, Solution, column_fit, mip_gap, node_bound, objective, solve

__version__ = "0.1.0"

__all__ = [
    "AlmostDirectedCycle",
    "Dataset",
    "EdgeType",
    "GroundTruth",
    "InducingPathWitness",
    "Instance",
    "LazyCut",
    "MixedGraph",
    "Solution",
    "WeightedGraph",
    "berkeley_demo",
    "best_over_thresholds",
    "column_fit",
    "cut_from_almost_directed_cycle",
    "cut_from_directed_cycle",
    "cut_from_inducing_path",
    "distance_matrix",
    "enumerate_mags",
    "f1",
    "find_almost_directed_cycles",
    "find_directed_cycle",
    "find_inducing_paths",
    "found_inducing_path",
    "gen_3bf",
    "gen_bf",
    "gen_er",
    "gen_forbidden",
    "hide_latents",
    "is_ancestral_def",
    "is_mag",
    "is_maximal_def",
    "m_separated",
    "mip_gap",
    "node_bound",
    "objective",
    "oracle_solve",
    "sample_weights",
    "sem_sample",
    "separate",
    "shd",
    "solve",
    "threshold",
    "trace_distance_matrix",
]
