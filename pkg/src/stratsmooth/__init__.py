"""Smooth approximation of scalar fields on stratified subsets of R^n.

The package builds approximations g of a field f that stay epsilon-close,
keep the gradient of g tangent to every stratum of a given stratified set,
and (on normally flat stratifications) are constant along normal directions
near each stratum.  It ships numeric certifiers for the geometric hypotheses
(frontier condition, Whitney condition (a), normal flatness), a catalog of
concrete stratified sets (polyhedral complexes, fixed-rank matrix strata,
spectral lifts, and a Whitney-but-not-normally-flat surface), pseudoinverse
observables, an sklearn-style estimator facade, and a config-driven CLI.
"""

from .bump import cutoff, cutoff_derivative
from .estimator import StratifiedSmoother
from .fields import ScalarField, make_epsilon, make_field
from .linalg import (
    EigFactors,
    SVDFactors,
    fd_gradient,
    orthogonal_projector,
    svd,
    sym_eig,
)
from .catalog import (
    counterexample_stratification,
    load_problem,
    polyhedral_stratification,
    project_fixed_rank,
    project_spectral,
    rank_stratification,
)
from .pseudoinverse import generator_probe, pinv_pair, pinv_pairing
from .smoothing import SmoothedField, SmoothingOptions, check_local_constancy, smooth_approximate
from .strata import (
    CertificationReport,
    Stratification,
    Stratum,
    check_frontier,
    check_normal_flatness,
    check_whitney_a,
)
from .tube import TubeSpec, blend_weight, blend_weight_gradient, tube_membership, tube_width, validate_tube

__all__ = [
    "CertificationReport",
    "EigFactors",
    "SVDFactors",
    "ScalarField",
    "SmoothedField",
    "SmoothingOptions",
    "StratifiedSmoother",
    "Stratification",
    "Stratum",
    "TubeSpec",
    "blend_weight",
    "blend_weight_gradient",
    "check_frontier",
    "check_local_constancy",
    "check_normal_flatness",
    "check_whitney_a",
    "counterexample_stratification",
    "cutoff",
    "cutoff_derivative",
    "fd_gradient",
    "generator_probe",
    "load_problem",
    "make_epsilon",
    "make_field",
    "orthogonal_projector",
    "pinv_pair",
    "pinv_pairing",
    "polyhedral_stratification",
    "project_fixed_rank",
    "project_spectral",
    "rank_stratification",
    "smooth_approximate",
    "svd",
    "sym_eig",
    "tube_membership",
    "tube_width",
    "validate_tube",
]

__version__ = "0.1.0"
