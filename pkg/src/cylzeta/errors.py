"""Exception types shared across the package."""


class SpectralError(Exception):
    """Base class for numerical failures raised by this package."""


class DomainError(SpectralError, ValueError):
    """An argument lies outside an operation's domain."""


class PoleError(DomainError):
    """Evaluation requested at (or too close to) a pole."""


class ContinuationError(SpectralError):
    """No analytic continuation is available for the requested value."""


class ConvergenceError(SpectralError):
    """An adaptive truncation failed to reach its error target."""


class BracketError(SpectralError):
    """A root bracket did not contain a sign change."""


class InsufficientRootsError(SpectralError):
    """Too few explicit roots were supplied for a series continuation."""


class TailFitError(SpectralError):
    """Residual terms of a continued series failed to decay."""


class KernelModeError(DomainError):
    """The operation does not accept zero modes of the tangential operator."""


class FitConditioningError(SpectralError):
    """Design matrix of an asymptotic fit is too ill-conditioned."""
