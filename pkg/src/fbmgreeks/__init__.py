"""Monte Carlo Greeks for scalar SDEs driven by fractional Brownian motion.

The engine samples fBm exactly (circulant embedding, with a Cholesky
oracle), solves the state/tangent/variation Euler schemes for H > 1/2,
and estimates sensitivities either pathwise or through Malliavin-type
divergence weights built on the Volterra representation.
"""

__version__ = "0.1.0"

from .coeffs import (
    FinanceModelSpec,
    ModelSpec,
    ScalarFunction,
    affine,
    constant,
    identity,
    paper_sigma,
    paper_sigma_tilde,
    polynomial,
    square,
)
from .config import ScenarioConfig, parse_config
from .errors import (
    ConfigParseError,
    ConfigurationError,
    DivergenceError,
    DomainError,
    EmbeddingError,
    EngineError,
    NumericalError,
    RegimeError,
    RegularityError,
    SingularityError,
)
from .estimators import (
    finance_mu_sensitivity,
    pathwise_delta,
    pathwise_vega,
    weight_delta,
)
from .fbm import (
    FbmPath,
    fbm_covariance,
    sample_fbm_cholesky,
    sample_fbm_circulant,
    sample_fbm_pair,
    write_path_csv,
)
from .fracops import (
    SampledFunction,
    VolterraKernel,
    WeightIntegrand,
    cm_weight_transform,
    divergence_adapted,
    fbm_from_brownian,
    frac_derivative,
    frac_integral,
    volterra_kernel_eval,
)
from .grids import DyadicGrid, HurstParameter, SeedRecord
from .reporting import (
    ConvergenceTrace,
    EstimateReport,
    build_trace,
    confidence_interval,
    normal_quantile,
)
from .runner import RunResult, run_scenario
from .sde import (
    ConvergenceTable,
    TrajectoryBundle,
    convergence_probe,
    euler_state,
    euler_tangent,
    euler_variation,
    solve_bundle,
    write_trajectory_csv,
)
