"""Exception hierarchy shared across the package."""


class SonetsError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(SonetsError):
    """Invalid scheme parameters, run configuration, or unknown names."""


class CapExceededError(SonetsError):
    """A brute-force or dense operation was refused because the edge set is
    larger than the configured cap."""


class SchemeMismatchError(SonetsError):
    """Two algebra elements or matrices belong to different schemes."""


class AxiomViolationError(SonetsError):
    """The pair classifier does not define a coherent configuration."""


class AdmissibilityError(SonetsError):
    """A requested covariance is not admissible (negative eigenvalue)."""

    def __init__(self, message: str, eigenvalues=()):
        super().__init__(message)
        self.eigenvalues = tuple(eigenvalues)


class OutOfSpanError(SonetsError):
    """A matrix is not in the span of the intersection matrices."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class NumericalError(SonetsError):
    """A numerical operation failed in a way the algebra rules out exactly
    (e.g. an apparently non-diagonalizable image of a symmetric element)."""
