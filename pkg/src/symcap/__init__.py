"""Symplectic capacities, Williamson normal forms and Hardy-type uncertainty
principles for Wigner distributions."""

from .capacity import (
    CapacityReport,
    ConvexBody,
    JohnEllipsoid,
    PhaseEllipsoid,
    ellipsoid_capacity,
    john_ellipsoid,
    quadratic_body,
    quartic_perturbed_body,
    quartic_radial_body,
    wigner_ellipsoid,
)
from .errors import (
    AliasingWarning,
    ApproximationError,
    ConditioningError,
    ConvexityError,
    DefinitenessError,
    DiagonalizationError,
    GridError,
    InternalConsistencyError,
    InvalidDimensionError,
    NotSymmetricError,
    NumericalError,
    SingularMatrixError,
    SymcapError,
    ValidationError,
)
from .grids import Axis, GridState, WignerGrid, default_axis, fourier_hbar, self_dual_axis, tensor_state
from .lagrangian import (
    LagrangianFrame,
    LagrangianPlane,
    frame_map,
    is_lagrangian,
    is_transversal,
    marginal_along_plane,
    span_distance,
)
from .linalg import (
    PhasePoint,
    is_symplectic,
    standard_form_matrix,
    symplectic_inverse,
    symplectic_product,
)
from .metaplectic import Chirp, Fourier, Scaling, heisenberg_translate, metaplectic_apply, metaplectic_projection
from .spectral import (
    PairDiagResult,
    SymplecticDecomp,
    block_symplectic_from_L,
    blockdiag,
    pair_diagonalize,
    symplectic_spectrum,
    williamson,
)
from .states import GaussianState, gaussian_wigner_closed_form, hermite_state
from .uncertainty import (
    ConvexExponentReport,
    HardyVerdict,
    RSReport,
    check_wigner_bound_matrix,
    classify_hardy,
    convex_exponent_analyze,
    equivalence_test,
    robertson_schrodinger,
)
from .wigner import cross_wigner, iter_wigner_real_slabs, iter_wigner_slabs, wigner_transform

__version__ = "0.1.0"
