"""Power bounds for robust Gaussian source-channel coding as bandwidth goes to zero."""

from jsccbounds.profiles import Profile, ProfileKind, QualityGrid, eval_profile, noise_to_quality
from jsccbounds.bounds import Limit, LowerBoundResult, lower_bound_integrand, lower_bound_pmin
from jsccbounds.schemes import (
    FidelityCurve,
    HybridParams,
    LayeredParams,
    MatrixScheme,
    beta_root,
    hybrid_fidelity,
    multilayer_fidelity,
    uncoded_fidelity,
)
from jsccbounds.optimizer import (
    FeasibilityReport,
    GridSpec,
    PaRule,
    UpperBoundResult,
    check_compliance,
    min_pa_closed_form,
    min_pa_exact,
    optimize_upper_bound,
)
from jsccbounds.simulator import SimConfig, SimResult, simulate_matrix_analog, simulate_uncoded

__version__ = "0.1.0"

__all__ = [
    "FeasibilityReport",
    "FidelityCurve",
    "GridSpec",
    "HybridParams",
    "LayeredParams",
    "Limit",
    "LowerBoundResult",
    "MatrixScheme",
    "PaRule",
    "Profile",
    "ProfileKind",
    "QualityGrid",
    "SimConfig",
    "SimResult",
    "UpperBoundResult",
    "beta_root",
    "check_compliance",
    "eval_profile",
    "hybrid_fidelity",
    "lower_bound_integrand",
    "lower_bound_pmin",
    "min_pa_closed_form",
    "min_pa_exact",
    "multilayer_fidelity",
    "noise_to_quality",
    "optimize_upper_bound",
    "simulate_matrix_analog",
    "simulate_uncoded",
    "uncoded_fidelity",
]
