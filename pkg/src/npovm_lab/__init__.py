"""Simulation lab for estimation precision under positive (POVM) versus
general (possibly non-positive) measurement strategies on qubit probes."""

__version__ = "0.1.0"

from .errors import DomainError, InvariantViolation

__all__ = ["DomainError", "InvariantViolation", "__version__"]
