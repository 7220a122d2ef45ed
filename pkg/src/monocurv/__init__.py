"""Differential geometry of monotone Riemannian metrics on density matrices.

Builds metric, Christoffel, curvature, and scalar-curvature quantities for
the monotone metric family (Bures/smallest, largest, Kubo-Mori) from
eigenvalue-kernel formulas, plus numerical evidence scans for the
mixing-monotonicity conjecture of the Kubo-Mori scalar curvature.
"""

from .errors import (
    DimensionMismatch,
    DimensionTooSmall,
    IllConditioned,
    InvalidInput,
    LengthMismatch,
    MonocurvError,
    NotNormalized,
    NotOrthogonal,
    NotPositiveDefinite,
    OrderViolation,
    SingularCompanion,
    SumMismatch,
)
from .mcfun import (
    CUSTOM,
    KUBO_MORI,
    LARGEST,
    SMALLEST,
    MorozovaChentsovFunction,
    divided_diff_1,
    divided_diff_2,
    make_builtin,
    make_custom,
    verify_identities,
)
from .states import (
    DensityMatrix,
    SpectralDecomposition,
    TangentVector,
    basis_vectors,
    decompose,
    random_state,
    random_tangent,
    traceless_basis,
)
from .geometry import (
    MetricContext,
    christoffel,
    metric,
    metric_derivative,
    metric_second_derivative,
    oracle_scalar,
    riemann,
    riemann_normalized,
    scalar_from_curvature,
    sectional,
)
from .scalar import (
    HKernel,
    abc_crosscheck,
    bures_scalar,
    kubo_mori_scalar,
    largest_scalar,
    largest_scalar_companion,
    normalize_scalar,
    recurrence_check,
    scalar_theorem1,
    trace_state_scalar,
)
from .conjecture import (
    ConcavityReport,
    MixingStep,
    MonotonicityReport,
    RegionSampler,
    SymmetrizedKernel,
    concavity_scan,
    directional_derivative_check,
    hessian_minors,
    kubo_mori_hs_closed_form,
    lemma4_check,
    majorizes,
    monotonicity_scan,
    t_transform,
)

__version__ = "0.1.0"
