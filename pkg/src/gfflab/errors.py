"""Shared exception types."""


class UnpinnedDomainError(ValueError):
    """Raised when a Green function / sampler is requested with no Dirichlet vertex."""


class NumericError(RuntimeError):
    """Raised when a factorization or solve fails or leaves a large residual."""


class InvariantViolation(AssertionError):
    """Raised when a contract the caller relies on is violated at runtime."""
