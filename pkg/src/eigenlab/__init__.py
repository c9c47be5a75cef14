"""Unconditional convergence of eigenfunction expansions, made measurable.

Submodules
----------
or_functions
    O-regularly varying weights, Matuszewska indices, embedding integrals.
lattice
    Trigonometric polynomials on the torus and their norms.
convergence
    Truncation curves, rearrangement and eigenspace-rotation stress.
abstract_model
    A diagonal operator on a two-norm space with exact error bounds.
"""

from .abstract_model import (
    DiagonalModel,
    SymbolPair,
    master_estimate_check,
    operator_norm_R,
    truncation_residual,
)
from .convergence import (
    TruncationTable,
    absolute_sum_check,
    eigenspace_rotation_stress,
    rearrangement_stress,
    truncation_curve,
    verify_decay,
)
from .errors import DomainError, HypothesisError
from .lattice import (
    FourierField,
    NormSpec,
    hoermander_norm,
    measure_norm,
    modes_in_ball,
    partial_sum,
    synthesize_member,
)
from .or_functions import (
    ExplicitRepresentation,
    OscillatingGamma,
    PowerLog,
    classify_embedding,
    decay_weight_h,
    estimate_indices,
)

__version__ = "0.1.0"
