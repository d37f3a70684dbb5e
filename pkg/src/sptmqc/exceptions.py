"""Exception types raised by the library.

Plain ValueError/KeyError are used for ordinary argument problems (shape
mismatches, unknown basis labels, out-of-range parameters).  The classes
below mark conditions with physical meaning that callers may want to catch
and handle, e.g. a sweep that keeps going past long-range-correlated points.
"""


class SptmqcError(Exception):
    """Base class for library-specific errors."""


class DegenerateSpectrumError(SptmqcError):
    """Top of a channel spectrum is degenerate beyond tolerance.

    Carries the sorted eigenvalue list so callers can inspect the gap.
    """

    def __init__(self, message, spectrum=None):
        super().__init__(message)
        self.spectrum = spectrum


class NotASymmetryError(SptmqcError):
    """The mixed transfer channel has no modulus-1 eigenvalue."""


class AmbiguousSymmetryError(SptmqcError):
    """More than one modulus-1 eigenvalue; the virtual operator is not unique."""


class FactorizationError(SptmqcError):
    """No protected/junk Kronecker factorization exists within tolerance."""


class StalledFlowError(SptmqcError):
    """Buffering cannot reach a fixed point (degenerate junk spectrum)."""


class NullOutcomeError(SptmqcError):
    """A measurement outcome has vanishing Born probability."""


class ResourceLimitError(SptmqcError):
    """Requested brute-force computation exceeds the allowed size."""


class ConfigError(SptmqcError):
    """Invalid CLI configuration.  ``field`` names the offending entry."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
