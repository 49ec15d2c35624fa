"""Exception hierarchy shared across the package."""


class PhishguardError(Exception):
    """Base class for every error this package raises deliberately."""


class WeightFormatError(PhishguardError):
    """Malformed weight file; message names the offending offset or tensor."""


class BadMagicError(WeightFormatError):
    pass


class TruncatedStreamError(WeightFormatError):
    pass


class DuplicateNameError(WeightFormatError):
    pass


class DimOverflowError(WeightFormatError):
    pass


class InvalidNameError(WeightFormatError):
    pass


class NonFiniteError(PhishguardError):
    """NaN or Inf encountered where only finite values are allowed."""


class MissingWeightError(PhishguardError):
    pass


class ShapeMismatchError(PhishguardError):
    pass


class QuantizeOverflowError(PhishguardError):
    """A value exceeded the target dtype's finite range during conversion."""


class SceneTooLargeError(PhishguardError):
    pass


class EmptyCropError(PhishguardError):
    pass


class EmptyRoiError(PhishguardError):
    pass


class MalformedUrlError(PhishguardError):
    pass


class ManifestError(PhishguardError):
    pass


class EmptyDatasetError(PhishguardError):
    pass


class LengthMismatchError(PhishguardError):
    pass


class DegenerateLabelsError(PhishguardError):
    """All evaluation labels belong to a single class."""
