"""Exception types shared across the package."""


class GiclabError(Exception):
    """Base class for computational failures raised by this package."""


class NumericOverflowError(GiclabError):
    """Inputs push log-domain accumulation past the float64 exponent range.

    The caller should rescale the constellation or the SNR.
    """


class ConvergenceError(GiclabError):
    """An iterative routine stalled above its tolerance at the iteration cap."""


class CapError(GiclabError):
    """A requested codebook exceeds the exact-posterior feasibility caps."""
