"""Numerical experiments on dynamical cubes ``Q^[d]`` of torus rotations,
unipotent affine skew products and Sturmian subshifts."""
from ._kernels import BACKEND, available_backends
from .cubes import (
    CubeConfiguration,
    CubeGroupElement,
    apply_cube_element,
    apply_word,
    conjugate_element,
    corner_config,
    diagonal_config,
    euclidean_permutation,
    face_pattern,
    reduce_word,
)
from .relations import RPQuery, RPWitness, proximal_distance, rp_distance, rp_verdict, rp_witness
from .sampler import (
    BudgetOverflow,
    CubeSetSample,
    DistanceProfile,
    SamplingBudget,
    distance_profile,
    distance_to_sample,
    nearest_in_sample,
    sample_cube_set,
    sample_face_orbit,
    sample_saturated_preimage,
)
from .saturation import (
    CompletionReport,
    SaturationReport,
    boundary_disagreements,
    check_cube_saturation,
    check_face_saturation,
    sturmian_counterexample,
    unique_completion_check,
)
from .systems import (
    GOLDEN,
    Convention,
    FactorKind,
    FactorMapSpec,
    Kind,
    SymbolicPoint,
    SystemError_,
    SystemSpec,
    apply_factor,
    apply_power,
    point_distance,
)

__version__ = "0.1.0"
