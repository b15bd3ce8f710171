"""Exact solver, covariance bounds and random-current checks for 1D Ising chains."""

from .bounds import (
    BoundReport,
    bound_abs_envelope,
    bound_nonneg_field,
    bound_signed_field,
    bound_zero_field,
    compare,
    partition_ratio_lower,
)
from .chain import (
    ENUMERATION_CAP,
    ChainParams,
    SpinConfig,
    covariance_enum,
    enum_summary,
    expectation_enum,
    hamiltonian,
    partition_function_enum,
    sign_split,
    window_marginal_enum,
)
from .currents import (
    BoundarySet,
    Current,
    McEstimate,
    ParityPattern,
    boundary,
    boundary_match_probability,
    boundary_split_counterexamples,
    conditional_bound_check,
    cov_identity_check,
    endpoint_event_counterexamples,
    ghost_split,
    mc_moment,
    mc_switching_covariance,
    negative_arrivals,
    poisson_parity,
    sample_current,
    sample_current_batch,
    signed_moment_sum,
    split_pattern,
)
from .effective_field import SiteRemoval, TruncatedModel, remove_end_site, truncate
from .errors import (
    BoundViolationError,
    CapacityError,
    ChainError,
    DecayRateUndefinedError,
    InconclusiveEstimateError,
    OracleMismatchError,
    ParseError,
    PreconditionError,
)
from .instances import DistSpec, InstanceSpec, generate_instance, instance_seeds
from .transfer import (
    covariance,
    finite_decay_rate,
    log_partition,
    pair_expectation,
    site_mean,
)

__version__ = "0.1.0"

__all__ = [
    "ENUMERATION_CAP",
    "BoundReport",
    "BoundarySet",
    "BoundViolationError",
    "CapacityError",
    "ChainError",
    "ChainParams",
    "Current",
    "DecayRateUndefinedError",
    "DistSpec",
    "InconclusiveEstimateError",
    "InstanceSpec",
    "McEstimate",
    "OracleMismatchError",
    "ParityPattern",
    "ParseError",
    "PreconditionError",
    "SiteRemoval",
    "SpinConfig",
    "TruncatedModel",
    "boundary",
    "boundary_match_probability",
    "boundary_split_counterexamples",
    "bound_abs_envelope",
    "bound_nonneg_field",
    "bound_signed_field",
    "bound_zero_field",
    "compare",
    "conditional_bound_check",
    "cov_identity_check",
    "covariance",
    "covariance_enum",
    "endpoint_event_counterexamples",
    "enum_summary",
    "expectation_enum",
    "finite_decay_rate",
    "generate_instance",
    "ghost_split",
    "hamiltonian",
    "instance_seeds",
    "log_partition",
    "mc_moment",
    "mc_switching_covariance",
    "negative_arrivals",
    "pair_expectation",
    "partition_function_enum",
    "partition_ratio_lower",
    "poisson_parity",
    "sample_current",
    "sample_current_batch",
    "sign_split",
    "signed_moment_sum",
    "site_mean",
    "split_pattern",
    "truncate",
    "remove_end_site",
    "window_marginal_enum",
    "__version__",
]
