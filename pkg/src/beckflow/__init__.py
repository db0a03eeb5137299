"""Beckmann flux fields, probability-path transport fields, and flow maps
on the unit box, with empirical regularity and approximation probes."""

from .density import (
    Density,
    HolderEstimate,
    gaussian_bump,
    holder_norm_estimate,
    normalize,
)
from .errors import (
    BeckflowError,
    CompatibilityViolated,
    ConfigError,
    DivisionFloor,
    NonConvergence,
    NumericalError,
    PathViolation,
    RankDeficient,
    SingularJacobian,
)
from .flow import (
    AnalyticVelocity,
    FlowMap,
    Pushforward,
    integrate_flow,
    integrate_jacobians,
    node_seeded_flow,
    pushforward_density,
    transport_error,
)
from .flux import (
    FluxField,
    beckmann_objective,
    flux_from_potential,
    optimality_probe,
    stream_perturbation,
)
from .grid import (
    Grid,
    ScalarField,
    VectorField,
    divergence,
    gradient,
    integrate,
    sample_at,
    vector_field,
)
from .parametric import (
    ParametricFamily,
    StabilityReport,
    banach_valued_holder,
    joint_holder_estimate,
    solve_family,
    stability_ratios,
)
from .paths import (
    FisherRaoPath,
    LinearPath,
    PathDerivative,
    ProbabilityPath,
    TabulatedPath,
    eval_path,
    path_derivative,
    tabulated_from_densities,
    validate_path,
)
from .poisson import (
    NeumannProblem,
    Potential,
    check_compatibility,
    laplacian,
    solve_neumann,
    solve_residual,
)
from .splines import (
    RateStudy,
    SplineApproximant,
    eval_spline,
    fit_spline,
    rate_study,
)
from .transport import (
    TransportField,
    chebyshev_nodes,
    continuity_residual,
    linear_transport_field,
    path_transport_field,
)

__version__ = "0.1.0"
