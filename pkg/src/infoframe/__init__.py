"""Infocomplete measurements on bipartite systems: dual frames and estimation noise."""

from .opalg import Tolerance, dket, undket, partial_trace, pinv, weyl_basis
from .haar import EnsembleKind, RngStream, haar_unitary, sample_ensemble_state
from .frames import (
    DiscretePovm,
    DualFrame,
    OperatorFrame,
    alternate_dual,
    canonical_dual,
    expansion_and_reconstruct,
    frame_operator,
    noise_discrete,
    optimal_dual,
    random_povm,
)
from .covariant import (
    CovariantFamily,
    FamilyTag,
    NotInBellSupportError,
    avg_sq_expectation,
    bell_frame_operator,
    bell_support_contains,
    closed_form_noise,
    comparison,
    povm_and_dual_density,
)
from .mcverify import mc_noise, mc_twirl, simulate_shots, estimate_expectation

__version__ = "0.1.0"
