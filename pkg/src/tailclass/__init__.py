"""Numerical classification of heavy-tailed distributions.

Models are given by their log-density and log-tail; class membership
(D, E, L, S, A and intersections) is decided on geometric grids with
three-valued verdicts.
"""

__version__ = "0.1.0"

from .asymptotics import (
    Direction,
    GridSpec,
    IndexEstimate,
    LimitEstimate,
    PotterFit,
    fit_potter,
    log_ratio_sequence,
    matuszewska_indices,
    ratio_limit,
    window_estimate,
    xh_limits,
)
from .classifiers import (
    DEFAULT_SETTINGS,
    BoundCheck,
    ClassVerdict,
    ClosurePreconditions,
    ClosureReport,
    Evidence,
    Settings,
    Verdict,
    check_closure_preconditions,
    check_hazard_lower_bound,
    check_hazard_upper_bound,
    log_pitman_integral,
    pitman_integral,
    power_integral,
    test_A,
    test_D,
    test_DcapA,
    test_DcapL,
    test_E,
    test_L,
    test_S,
    verify_convolution_closure,
)
from .convolution import (
    ConvolvedModel,
    convolution_hazard,
    convolution_tail,
    convolve_density,
    log_convolve_density,
    max_sum_ratio,
    self_convolution_ratio,
)
from .errors import (
    DegenerateRatio,
    DomainError,
    FitFailed,
    GridError,
    InvalidParameter,
    OverflowGuard,
    QuadratureFailure,
    TailClassError,
    UsageError,
)
from .models import (
    DistributionModel,
    FamilySpec,
    build,
    burr,
    exponential,
    hazard,
    hazard_function,
    log_pareto,
    log_perturbed_pareto,
    lognormal,
    pareto,
    weibull,
)
from .quadrature import DEFAULT_QUAD, QuadratureSpec, log_integrate

__all__ = [
    "DEFAULT_SETTINGS",
    "BoundCheck",
    "ClassVerdict",
    "ClosurePreconditions",
    "ClosureReport",
    "ConvolvedModel",
    "DEFAULT_QUAD",
    "DegenerateRatio",
    "Direction",
    "DistributionModel",
    "DomainError",
    "Evidence",
    "FamilySpec",
    "FitFailed",
    "GridError",
    "GridSpec",
    "IndexEstimate",
    "InvalidParameter",
    "LimitEstimate",
    "OverflowGuard",
    "PotterFit",
    "QuadratureFailure",
    "QuadratureSpec",
    "Settings",
    "TailClassError",
    "UsageError",
    "Verdict",
    "build",
    "burr",
    "check_closure_preconditions",
    "check_hazard_lower_bound",
    "check_hazard_upper_bound",
    "convolution_hazard",
    "convolution_tail",
    "convolve_density",
    "exponential",
    "fit_potter",
    "hazard",
    "hazard_function",
    "log_convolve_density",
    "log_integrate",
    "log_pareto",
    "log_perturbed_pareto",
    "log_pitman_integral",
    "log_ratio_sequence",
    "lognormal",
    "matuszewska_indices",
    "max_sum_ratio",
    "pareto",
    "pitman_integral",
    "power_integral",
    "ratio_limit",
    "self_convolution_ratio",
    "test_A",
    "test_D",
    "test_DcapA",
    "test_DcapL",
    "test_E",
    "test_L",
    "test_S",
    "verify_convolution_closure",
    "weibull",
    "window_estimate",
    "xh_limits",
    "__version__",
]
