"""Polarization squeezing of polarized light in a truncated two-mode Fock space."""

__version__ = "0.1.0"

from .criteria import (
    ConeDescriptor,
    SqueezingReport,
    analytic_polarized_criterion,
    criterion_chirkin,
    criterion_heersink,
    criterion_luis,
    mandel_q,
    scan,
    squeezing_cone,
    squeezing_function,
)
from .errors import NumericalSafetyError, QUndefinedError, SpecError
from .fock import StateEnsemble, TwoModeFockState, apply_annihilation, ensemble_moment, normally_ordered_moment
from .measurement import (
    CountRecord,
    EstimatorResult,
    check_number_difference_identity,
    estimate_squeezing,
    joint_distribution,
    rotated_basis,
    sample_counts,
)
from .polarization import (
    PoincareDirection,
    PoincareVector,
    PolarizationVector,
    cos_big_phi,
    direction_from_angles,
    jones_from_angles,
    poincare_from_jones,
)
from .states import StateSpec, build, build_state, load_state_spec, parse_state_spec, verify_polarized
from .stokes import StokesMoments, mode_transform, stokes_along, stokes_moments
from .witness import CoherentMixture, nonclassicality_flag, p_functional, witness_value
