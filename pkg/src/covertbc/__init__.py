"""covertbc: covert-capacity region of degraded broadcast channels with a warden.

Library layers: model (channel types + files), info (divergences and mutual
informations, all in nats), validate (model conditions, degradedness LP),
rates (closed-form region evaluation), optimize (Pareto boundary, gamma*,
sweeps), taylor (finite-difference verification of the expansion calculus).

The hot numeric kernels run from a compiled extension when available and
from a numpy fallback otherwise; covertbc.BACKEND reports which one is live.
"""
from .backend import BACKEND
from .errors import (
    AbsoluteContinuityViolation,
    CovertBcError,
    DegenerateDivergence,
    DivisionSupportViolation,
    ModelFormatError,
    ZeroCapacity,
)
from .info import (
    chi2_distance,
    conditional_mutual_information,
    cross_chi2,
    kl_divergence,
    mutual_information,
    output_distribution,
)
from .model import (
    BcWardenModel,
    Channel,
    Distribution,
    load_model,
    save_model,
    warden_null_distribution,
)
from .optimize import (
    OptimizerConfig,
    ParetoFront,
    SweepRow,
    constrained_max_l2,
    gamma_star,
    maximize_weighted,
    pareto_boundary,
    sweep,
)
from .rates import (
    RatePair,
    SuperpositionParams,
    alpha_coefficients,
    chi2_nu,
    rate_pair,
    single_user_capacity,
    ts_optimality_condition,
    ts_region_bound,
)
from .taylor import (
    FirstOrderReport,
    HessianCheck,
    StructuredJoint,
    build_structured_joint,
    fd_divergence_hessian_check,
    fd_mi_derivative_check,
    first_order_region_check,
    random_structured_joint,
)
from .validate import (
    ConditionsReport,
    DegradationCertificate,
    check_conditions,
    find_degrading_channel,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    "AbsoluteContinuityViolation",
    "BcWardenModel",
    "Channel",
    "ConditionsReport",
    "CovertBcError",
    "DegenerateDivergence",
    "DegradationCertificate",
    "Distribution",
    "DivisionSupportViolation",
    "FirstOrderReport",
    "HessianCheck",
    "ModelFormatError",
    "OptimizerConfig",
    "ParetoFront",
    "RatePair",
    "StructuredJoint",
    "SuperpositionParams",
    "SweepRow",
    "ZeroCapacity",
    "alpha_coefficients",
    "build_structured_joint",
    "check_conditions",
    "chi2_distance",
    "chi2_nu",
    "conditional_mutual_information",
    "constrained_max_l2",
    "cross_chi2",
    "fd_divergence_hessian_check",
    "fd_mi_derivative_check",
    "find_degrading_channel",
    "first_order_region_check",
    "gamma_star",
    "kl_divergence",
    "load_model",
    "maximize_weighted",
    "mutual_information",
    "output_distribution",
    "pareto_boundary",
    "random_structured_joint",
    "rate_pair",
    "save_model",
    "single_user_capacity",
    "sweep",
    "ts_optimality_condition",
    "ts_region_bound",
    "warden_null_distribution",
]
