"""Exception types shared across the toolkit."""


class DblError(Exception):
    """Base class for all toolkit errors."""


class UnsupportedFormatError(DblError):
    """WAV file uses a codec or layout the reader does not handle."""


class CorruptHeaderError(DblError):
    """WAV file header is malformed or truncated."""


class ShapeMismatchError(DblError):
    """Clips disagree in sample rate, length, or channel count."""


class UnsupportedRateError(DblError):
    """Operation requires a sample rate it has no coefficients for."""


class NoSignalError(DblError):
    """Loudness is undefined: all-zero signal or empty inclusion region."""


class EmptyMaskError(DblError):
    """Gating mask has no active blocks."""


class NoForegroundError(DblError):
    """Foreground excitation is entirely at the silence floor."""


class NonEvaluableError(DblError):
    """Intelligibility score cannot be evaluated on these stems."""


class SingularSystemError(DblError):
    """Projection normal equations stayed singular after regularization."""


class EmptyItemListError(DblError):
    """Session construction requires at least one item."""


class IncompleteRatingsError(DblError):
    """A rating record does not cover every condition exactly once."""


class OutOfRangeError(DblError):
    """A rating lies outside the 0..100 scale."""


class EmptyInputError(DblError):
    """Summary statistics need at least one record."""


class MissingItemCoverageError(DblError):
    """An item has no rating from any subject passing the filter."""


class NoItemsError(DblError):
    """Parameter fitting needs at least one item."""


class AllUnreachableError(DblError):
    """Every item was boundary-clamped for every target score."""
