"""Exception hierarchy shared by all conelab modules."""


class ConelabError(Exception):
    """Base class for every error raised by conelab."""


class DimensionError(ConelabError, ValueError):
    """Operands have incompatible dimensions."""


class DomainError(ConelabError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ConeError(ConelabError, ValueError):
    """A cone description is inconsistent, not pointed, or has empty interior."""


class UnsupportedMapError(ConelabError, TypeError):
    """The map variant does not support the requested operation."""


class IterationLimitError(ConelabError, RuntimeError):
    """An iteration hit its budget before meeting the tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class InconclusiveError(ConelabError, RuntimeError):
    """A limit construction did not settle within its schedule."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class CertificateRejected(ConelabError, RuntimeError):
    """A constructed certificate failed its own validation."""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}


class SizeLimitError(ConelabError, ValueError):
    """Input exceeds the size cap of a brute-force routine."""
