"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter left the valid domain of a channel or operation."""


class InvariantViolation(RuntimeError):
    """A numerical invariant (unitarity, trace preservation, ...) failed."""
