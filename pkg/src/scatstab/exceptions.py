"""Exception hierarchy.

Configuration-type errors derive from :class:`ScatStabError` directly;
failures of a numerical procedure derive from :class:`NumericalFailure` so
the command line can map them to a distinct exit code.
"""


class ScatStabError(Exception):
    """Base class for every error raised by this package."""


class NumericalFailure(ScatStabError):
    """A numerical procedure could not produce a trustworthy result."""


class GridMismatch(ScatStabError):
    """Two objects that must share a grid do not."""


class BandwidthExceeded(ScatStabError):
    """Spectral content would be pushed past the target Nyquist frequency."""


class NyquistViolation(ScatStabError):
    """A requested wavelet scale does not fit below the grid Nyquist frequency."""


class InvalidProfile(ScatStabError):
    """A wavelet profile violates its support or analyticity constraints."""


class UnknownScale(ScatStabError):
    """A scale index is not part of the filter bank."""


class DepthBudgetExceeded(ScatStabError):
    """The number of scattering paths would exceed the configured cap."""

    def __init__(self, count, cap):
        super().__init__(f"scattering would visit {count} paths, cap is {cap}")
        self.count = count
        self.cap = cap


class StructureMismatch(ScatStabError):
    """Scattering coefficient sets with different structure were compared."""


class ParameterViolation(ScatStabError):
    """Construction parameters violate a documented constraint."""


class UsabilityViolation(ScatStabError):
    """A deformation field has ``sup|tau'| > 1/2``."""


class DomainEscape(NumericalFailure):
    """Warped sample positions leave the safe interior of the period."""


class NoConvergence(NumericalFailure):
    """An iterative method stopped at ``max_iter`` before reaching ``tol``."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class ConfigError(ScatStabError):
    """An experiment or command-line configuration is invalid.

    ``key`` is the dotted path of the offending entry.
    """

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
