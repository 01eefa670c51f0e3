"""Optimal which-way read-outs for multibeam interference.

Beam markers are modeled as pure qubit states with prior populations; the
package scores read-out measurements by Shannon information, Bayes cost, or
rms spread of the posteriors, optimizes over generalized measurements,
reduces symmetric cases to projective form, realizes any winner projectively
on a detector-ancilla space, and checks the visibility/distinguishability
trade-off.
"""

from .criteria import (
    BAYES,
    CRITERION_KINDS,
    RMS_SPREAD,
    SHANNON,
    Criterion,
    Score,
    average_information,
    bayes_rms_identity_check,
    convexity_probe,
    criterion_bounds,
    score_outcome,
)
from .dilation import Dilation, dilation_probabilities, neumark_dilate, verify_dilation
from .interference import (
    ComplementarityReport,
    FringeModel,
    closed_form_visibility,
    complementarity_check,
    fringe_intensity,
    visibility,
)
from .measurement import (
    InfeasibleCompletionError,
    Measurement,
    PosteriorTable,
    RankOneElement,
    ValidityReport,
    complete_from_partial,
    is_pvm,
    outcome_probabilities,
    posteriors,
    random_rank_one,
    rank_one_refine,
    table_from_probabilities,
    validate,
)
from .optimize import (
    OptimizationResult,
    POVMOptimizer,
    PVMOptimizer,
    SearchConfig,
    closed_form,
    distinguishability,
    equivalent_measurements,
    optimize_povm,
    optimize_pvm,
)
from .quantum import (
    DetectorEnsemble,
    bloch_to_state,
    density_from_bloch,
    ensemble_from_bloch,
    overlap,
    state_to_bloch,
    symmetric_pair,
    trine_ensemble,
)
from .reduction import (
    MirrorPair,
    ReductionTrace,
    SymmetricPovm,
    durr_doubling,
    pair_information,
    reduce_pair,
    reduce_to_pvm,
    symmetrize_about_axis,
    symmetrize_to_plane,
)

__version__ = "0.1.0"

__all__ = [
    "BAYES",
    "CRITERION_KINDS",
    "ComplementarityReport",
    "Criterion",
    "DetectorEnsemble",
    "Dilation",
    "FringeModel",
    "InfeasibleCompletionError",
    "Measurement",
    "MirrorPair",
    "OptimizationResult",
    "POVMOptimizer",
    "PVMOptimizer",
    "PosteriorTable",
    "RMS_SPREAD",
    "RankOneElement",
    "ReductionTrace",
    "SHANNON",
    "Score",
    "SearchConfig",
    "SymmetricPovm",
    "ValidityReport",
    "average_information",
    "bayes_rms_identity_check",
    "bloch_to_state",
    "closed_form",
    "closed_form_visibility",
    "complementarity_check",
    "complete_from_partial",
    "convexity_probe",
    "criterion_bounds",
    "density_from_bloch",
    "dilation_probabilities",
    "distinguishability",
    "durr_doubling",
    "ensemble_from_bloch",
    "equivalent_measurements",
    "fringe_intensity",
    "is_pvm",
    "neumark_dilate",
    "optimize_povm",
    "optimize_pvm",
    "outcome_probabilities",
    "overlap",
    "pair_information",
    "posteriors",
    "random_rank_one",
    "rank_one_refine",
    "reduce_pair",
    "reduce_to_pvm",
    "score_outcome",
    "state_to_bloch",
    "symmetric_pair",
    "symmetrize_about_axis",
    "symmetrize_to_plane",
    "table_from_probabilities",
    "trine_ensemble",
    "validate",
    "verify_dilation",
    "visibility",
]
