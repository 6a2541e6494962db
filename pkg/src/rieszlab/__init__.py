"""Numerical laboratory for s-Riesz transforms (0 < s < 1) of atomic measures."""

__version__ = "0.1.0"

from .errors import (
    DegenerateInputError,
    DomainError,
    MeasureFormatError,
    NumericalError,
    TruncationTieError,
    ValidationError,
)
from .kernels import KernelSpec, kernel_eval
from .measure import (
    Ball,
    DiscreteMeasure,
    ball_mass,
    density,
    density_diagnostics,
    find_thin_ball,
    poisson_density,
    thin_boundary_ratio,
)
from .transforms import (
    adjoint_apply,
    annulus_bound_report,
    operator_norm,
    transform_field,
    truncated_transform_point,
)
from .treecode import tree_transform_field
from .symmetrization import (
    comparability_scan,
    global_identity_check,
    pairwise_energy,
    permutation_form,
    pointwise_identity_check,
    total_energy,
)
from .defect import (
    TestFunction,
    defect_functional,
    exterior_field,
    perturbation_curve,
    reflectionless_pairing,
    variational_derivative,
)
from .blowup import (
    density_comparability_scan,
    main_lemma_ratio,
    max_density_ball,
    multiscale_energy_profile,
)
from .generators import CantorSpec, cantor_measure, random_cloud, segment_uniform
