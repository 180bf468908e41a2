"""Root-state reconstruction on weighted binary trees.

A library plus harness for the symmetric two-state broadcast process on
complete binary trees with per-edge fidelity weights: exact
reconstruction-accuracy recurrences for the maximum-parsimony (Fitch)
root estimator, Monte Carlo cross-checks, weighted branching-number
estimation, and the percolation machinery that links random weight
models to reconstruction thresholds.
"""

from __future__ import annotations

__version__ = "1.0.0"

from .errors import (
    CoverError,
    HarnessError,
    MinimalityError,
    NumericsError,
    RangeError,
    ResourceLimitError,
    ValidationError,
)
from .trees import (
    DEFAULT_DEPTH_CAP,
    Cutset,
    ExpDecay,
    Fixed,
    IID,
    PointMass,
    TwoPoint,
    Uniform,
    WeightedTree,
    Yule,
    build_tree,
    mean_weight,
    model_spec,
    parse_model,
    read_tree,
    regular_cutset,
    tree_from_json,
    tree_to_json,
    truncate,
    validate_cutset,
    write_tree,
)
from .cf import (
    SimulationBatch,
    StateAssignment,
    agreement_probability,
    sample_states,
    substitution_probability,
    weight_for_substitution_probability,
)
from .parsimony import (
    FitchSet,
    ReconstructionBatch,
    fitch_bottom_up,
    mp_root_estimate,
    parsimony_score,
    reconstruct_batch,
)
from .recurrence import (
    AccuracyPair,
    DUPair,
    ab_step,
    ab_to_du,
    du_step,
    du_to_ab,
    exact_ra,
    growth_bound_deficit,
    homogeneous_limit,
    propagate,
    propagate_ab,
    reconstruction_accuracy,
    root_cutset_identity_residual,
)
from .branching import (
    BranchingEstimate,
    ConditionReport,
    CouplingConstants,
    ExtinctionSample,
    PercolationSample,
    admissible_rate,
    branching_condition,
    coupling_constants,
    cutset_dp,
    estimate_branching_number,
    extinction_probability,
    min_cutset_sum,
    percolation_subtree,
    simulate_extinction,
)
from .harness import (
    ExperimentConfig,
    MCEstimate,
    SweepResult,
    SweepRow,
    brute_force_ra,
    format_csv,
    format_json,
    mc_estimate_ra,
    sweep_rows,
    sweep_threshold,
    worker_count,
)

__all__ = [
    "__version__",
    # errors
    "HarnessError", "ValidationError", "RangeError", "CoverError",
    "MinimalityError", "ResourceLimitError", "NumericsError",
    # trees
    "DEFAULT_DEPTH_CAP", "Cutset", "WeightedTree", "Fixed", "IID", "Yule",
    "PointMass", "Uniform", "ExpDecay", "TwoPoint", "build_tree", "truncate",
    "regular_cutset", "validate_cutset", "mean_weight", "parse_model",
    "model_spec", "tree_to_json", "tree_from_json", "read_tree", "write_tree",
    # process
    "StateAssignment", "SimulationBatch", "sample_states",
    "substitution_probability", "agreement_probability",
    "weight_for_substitution_probability",
    # parsimony
    "FitchSet", "ReconstructionBatch", "fitch_bottom_up", "parsimony_score",
    "mp_root_estimate", "reconstruct_batch",
    # recurrence
    "AccuracyPair", "DUPair", "ab_step", "du_step", "ab_to_du", "du_to_ab",
    "propagate", "propagate_ab", "reconstruction_accuracy", "exact_ra",
    "homogeneous_limit", "root_cutset_identity_residual", "growth_bound_deficit",
    # branching / percolation
    "BranchingEstimate", "ConditionReport", "CouplingConstants",
    "PercolationSample", "ExtinctionSample", "cutset_dp", "min_cutset_sum",
    "estimate_branching_number", "branching_condition", "coupling_constants",
    "percolation_subtree", "admissible_rate", "extinction_probability",
    "simulate_extinction",
    # harness
    "ExperimentConfig", "MCEstimate", "SweepRow", "SweepResult",
    "mc_estimate_ra", "brute_force_ra", "sweep_threshold", "sweep_rows",
    "format_csv", "format_json", "worker_count",
]
