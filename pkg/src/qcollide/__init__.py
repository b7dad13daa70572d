"""Stroboscopic collision-model simulation of indivisible qubit channels."""

from .channels import (
    CptpReport,
    KrausChannel,
    NOT_WEIGHTS,
    PauliWeights,
    affine_of,
    affine_of_linear,
    bloch_vector,
    check_affine,
    check_choi,
    choi_of,
    density_from_bloch,
    is_cptp,
    is_indivisible_family,
    pauli_apply,
)
from .collision import (
    CollisionConfig,
    DenseEnv,
    GhzDiagonalEnv,
    RandomUnitarySpec,
    RandomUnitaryTerm,
    control_unitary,
    dense_site_cap,
    ghz_env,
    ru_collision,
    ru_dense_check,
    ru_roots,
    simulate_closed,
    simulate_dense,
    target_eta,
)
from .dynamics import (
    BOUND_CONSTANT,
    FamilyParams,
    GeneratorCoeffs,
    SingularAt,
    StepBound,
    Trajectory,
    calibrate_convention,
    cb_norm_lower_bound,
    coeff_extract,
    coeff_printed,
    commutator_drive,
    drive_affine,
    family_det3,
    family_map,
    generator_numeric,
    integrate,
    master_rhs,
    printed_xa,
    semigroup_defect,
    singular_times,
    step_bound,
    step_delta_estimate,
    step_difference_coeffs,
    target_affine,
)
from .linalg import (
    PAULIS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    check_density,
    herm_unitary_exp,
    is_density,
    kron,
    partial_trace_env,
    partial_trace_sys,
    trace_norm,
    unitary_root,
)
from .cli import run

__version__ = "0.1.0"

__all__ = [
    "BOUND_CONSTANT",
    "CollisionConfig",
    "CptpReport",
    "DenseEnv",
    "FamilyParams",
    "GeneratorCoeffs",
    "GhzDiagonalEnv",
    "KrausChannel",
    "NOT_WEIGHTS",
    "PAULIS",
    "PauliWeights",
    "RandomUnitarySpec",
    "RandomUnitaryTerm",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "SingularAt",
    "StepBound",
    "Trajectory",
    "affine_of",
    "affine_of_linear",
    "bloch_vector",
    "calibrate_convention",
    "cb_norm_lower_bound",
    "check_affine",
    "check_choi",
    "check_density",
    "choi_of",
    "coeff_extract",
    "coeff_printed",
    "commutator_drive",
    "control_unitary",
    "dense_site_cap",
    "density_from_bloch",
    "drive_affine",
    "family_det3",
    "family_map",
    "generator_numeric",
    "ghz_env",
    "herm_unitary_exp",
    "integrate",
    "is_cptp",
    "is_density",
    "is_indivisible_family",
    "kron",
    "master_rhs",
    "partial_trace_env",
    "partial_trace_sys",
    "pauli_apply",
    "printed_xa",
    "ru_collision",
    "ru_dense_check",
    "ru_roots",
    "run",
    "semigroup_defect",
    "simulate_closed",
    "simulate_dense",
    "singular_times",
    "step_bound",
    "step_delta_estimate",
    "step_difference_coeffs",
    "target_affine",
    "target_eta",
    "trace_norm",
    "unitary_root",
]
