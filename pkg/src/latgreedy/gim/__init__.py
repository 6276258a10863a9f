"""Generalized influence maximization objective."""
from .exact import (EnumerationGuardExceeded, ExactGimObjective, exact_activation,
                    exact_influence, total_probability)
from .graph import DiGraph, EdgeListError, from_edges, load_edge_list, scale_free_graph
from .model import (GimInstance, ModelSpecError, build_gim, dr_lower_bound, level_ratio_constants,
                    reduce_from_boosting, reduce_from_ic_im, weighted_cascade)
from .sampling import (FixedSampleActivation, GimOracleAdapter, GimSampleSet, estimate_marginal_gain,
                       recompute_active_sets, sample_activation, sample_thresholds)

__all__ = [
    "DiGraph", "EdgeListError", "EnumerationGuardExceeded", "ExactGimObjective",
    "FixedSampleActivation", "GimInstance", "GimOracleAdapter", "GimSampleSet", "ModelSpecError",
    "build_gim", "dr_lower_bound", "estimate_marginal_gain", "exact_activation", "exact_influence",
    "from_edges", "level_ratio_constants", "load_edge_list", "recompute_active_sets",
    "reduce_from_boosting", "reduce_from_ic_im", "sample_activation", "sample_thresholds",
    "scale_free_graph", "total_probability", "weighted_cascade",
]
