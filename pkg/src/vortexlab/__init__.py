"""Spectral solver and experiment lab for abelian vortices on flat tori.

The package reduces divisor-prescribed vortex equations to a scalar
exponential-nonlinearity PDE, solves it with a damped Newton method over
FFT-based periodic calculus, and measures adiabatic-limit behavior
(curvature concentration, limit profiles, vanishing orders) against
closed-form predictions.
"""

__version__ = "0.1.0"

from .errors import (
    BadRadii,
    BadTau,
    BradlowViolation,
    DegenerateFit,
    EmptyMask,
    GridMismatch,
    MaxIterExceeded,
    MixedSignDivisor,
    NoConvergence,
    NonPositiveInput,
    NonPositivePotential,
    NoRoot,
    OverflowGuard,
    OverlappingBump,
    ParseError,
    Unsolvable,
    ValidationError,
    VortexLabError,
)
from .fields import (
    GridSpec,
    RegionMask,
    ScalarField,
    TorusGeometry,
    bump_cutoff,
    constant_field,
    cutoff_profile,
    cutoff_ratio_sup,
    dirichlet_energy,
    field_from_function,
    field_from_values,
    gradient,
    gradient_magnitude,
    grid_points,
    integrate,
    laplacian,
    lp_norm,
    resample,
    sample_at,
    solve_linearized,
    sup_norm,
)
from .greens import (
    Divisor,
    DivisorPotential,
    divisor_potential,
    green_gradient,
    theta1,
    theta1_prime,
    torus_green,
    vanishing_density,
)
from .kw import (
    AprioriRow,
    Classification,
    ContinuationSchedule,
    ContinuationStage,
    KWProblem,
    KWSolution,
    LimitProfile,
    SolverConfig,
    apriori_probe,
    continuation_sweep,
    core_resolving_grid,
    kw_energy,
    kw_limit,
    kw_residual,
    kw_solve,
    young_bound,
)
from .vortex import (
    ClassicalVortexSpec,
    DiagnosticsReport,
    GeneralizedSpec,
    GeneralizedTerm,
    MixedVortexSpec,
    PointInfo,
    Reconstruction,
    SweepOptions,
    SweepReport,
    adiabatic_sweep,
    curvature_mass,
    default_bump_radii,
    integral_identities,
    mixed_limit_phi_sq,
    reconstruct,
    reduce_classical,
    reduce_generalized,
    reduce_mixed,
    solve_and_report,
    vanishing_order_fit,
    worker_count,
)
from .config import RunConfig, echo_config, parse_config
from .runner import emit_csv, emit_heatmap, emit_line_plot, run

__all__ = [name for name in dir() if not name.startswith("_")]
