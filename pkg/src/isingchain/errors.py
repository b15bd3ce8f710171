"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: parse failures exit 2,
precondition violations exit 3, dominance violations exit 4, and
Monte-Carlo inconsistencies exit 5.
"""


class ChainError(Exception):
    """Base class for all package-specific errors."""


class ParseError(ChainError):
    """Malformed input file or serialized object."""


class PreconditionError(ChainError, ValueError):
    """An operation was called outside its documented domain."""


class CapacityError(PreconditionError):
    """Request exceeds a hard size cap (e.g. the exact-enumeration limit)."""


class DecayRateUndefinedError(PreconditionError):
    """Covariance is not positive, so -log(cov)/distance is undefined."""


class BoundViolationError(ChainError):
    """A dominance inequality failed beyond tolerance."""


class InconclusiveEstimateError(ChainError):
    """Monte-Carlo denominator not separated from zero; the ratio is unusable."""


class OracleMismatchError(ChainError):
    """The O(N) solver and the enumeration oracle disagree beyond tolerance."""
