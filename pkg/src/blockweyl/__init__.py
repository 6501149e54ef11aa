"""Weyl theory for Jacobi matrices with L x L matrix entries.

Finite-volume Green matrices and Weyl discs from transfer matrices, limit
classification with deficiency indices, and resolvents of maximal symmetric
extensions.
"""
from .exceptions import (
    ConditioningError,
    ConvergenceError,
    DiscViolation,
    ModelError,
    MoebiusDomainError,
)
from .model import (
    BlockJacobiModel,
    BoundaryCondition,
    assemble_hamiltonian,
    block_mixed_model,
    dense_operator,
    explicit_model,
    free_model,
    geometric_model,
    load_model,
    random_model,
)
from .moebius import MoebiusMap, inverse_moebius, moebius
from .transfer import (
    TransferProduct,
    abcd,
    solutions,
    symplectic_inverse,
    transfer_product,
    transfer_step,
)
from .green import (
    SpectralMeasure,
    green_boundary,
    green_boundary_dual,
    green_dirichlet,
    green_oracle,
    solve_inhomogeneous,
    spectral_measure,
)
from .weyl import (
    WeylDisc,
    boundary_from_green,
    boundary_matrix_from_green,
    diameter_bound,
    disc,
    master_identity,
    membership,
    nesting_verdict,
    quadratic_form,
    radius_bound,
    surface_point,
    wronskian,
)
from .limits import (
    COMPLETELY_INDETERMINATE,
    INTERMEDIATE,
    LIMIT_POINT,
    LimitData,
    limit_disc,
    limit_form,
    limit_wronskian,
    normalized_solution,
)
from .extensions import (
    ExtensionSpec,
    extension_weyl_point,
    finite_volume_shadow,
    make_extension,
    resolvent_residual,
)

__version__ = "0.1.0"
