"""Exception hierarchy.

The CLI maps these onto exit codes: validation-type errors give 2,
construction failures 3 and accuracy failures 4.
"""


class BeltramiError(Exception):
    """Base class for all errors raised by this package."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class ValidationError(BeltramiError):
    """Bad input: malformed documents, out-of-range parameters."""


class FieldSpecError(ValidationError):
    """A field document does not describe a valid field."""


class DomainError(ValidationError):
    """A point or region lies outside where a field is defined."""


class SingularPointError(DomainError):
    """Evaluation hit an excluded measure-zero point (e.g. a zero of psi)."""


class GeometryError(ValidationError):
    """A requested disk does not fit where it has to."""


class PreconditionError(ValidationError):
    """An operation was called with inputs violating its contract."""


class KernelSingularityError(DomainError):
    """A Cauchy kernel evaluation point is inside or too near the support."""


class StrategyContractError(BeltramiError):
    """A decrease oracle returned a witness that breaks its contract."""


class ConstructionInvalidError(BeltramiError):
    """A construction failed one of its own post-condition checks."""


class DominationFailure(ConstructionInvalidError):
    """Pointwise domination could not be restored by shrinking the disk."""


class AccuracyError(BeltramiError):
    """A numerical routine could not reach the requested tolerance."""

    def __init__(self, message, achieved=None, **details):
        super().__init__(message, achieved=achieved, **details)
        self.achieved = achieved
