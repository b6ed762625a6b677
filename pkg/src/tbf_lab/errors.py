"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where the model is defined."""


class EnumerationLimitError(DomainError):
    """Exhaustive enumeration would exceed the configured site budget."""


class BoundaryError(DomainError):
    """A boundary condition is malformed or admits no configuration."""


class InadmissibleError(DomainError):
    """A conditioning event has probability zero."""


class TruncationError(RuntimeError):
    """A truncated computation could not certify its own accuracy."""


class PaddingInstabilityError(RuntimeError):
    """An enumerated marginal changed when the padding was doubled."""
