"""Exception hierarchy.

Every error carries a short machine-readable ``code`` used by the CLI
diagnostics (``error: <code>: <msg>``).
"""


class PanoError(Exception):
    code = "error"


class ValidationError(PanoError, ValueError):
    code = "validation"


class DimensionMismatch(ValidationError):
    code = "dimension_mismatch"


class GridTooSmall(ValidationError):
    code = "grid_too_small"


class EmptyList(ValidationError):
    code = "empty_list"


# -- file formats ---------------------------------------------------------

class FormatError(PanoError, ValueError):
    code = "format"


class BadMagic(FormatError):
    code = "bad_magic"


class TruncatedFile(FormatError):
    code = "truncated_file"


class NonFiniteValue(FormatError):
    code = "non_finite_value"


class ConfidenceOutOfRange(FormatError):
    code = "confidence_out_of_range"


class UnsupportedFormat(FormatError):
    code = "unsupported_format"


class ParseError(FormatError):
    code = "parse_error"


class NotARotation(FormatError):
    code = "not_a_rotation"


# -- geometry -------------------------------------------------------------

class DegenerateDirection(PanoError, ValueError):
    code = "degenerate_direction"


class SingularHomography(ValidationError):
    code = "singular_homography"


class HorizonSingularity(PanoError, ArithmeticError):
    code = "horizon_singularity"


# -- pipeline -------------------------------------------------------------

class EmptyResult(PanoError):
    """No pixel of any view survived confidence filtering."""

    code = "empty_result"


class EmptyOverlap(PanoError):
    code = "empty_overlap"


class NoValidWindows(PanoError):
    code = "no_valid_windows"


class NoObservedPixels(PanoError):
    code = "no_observed_pixels"


class ExternalFailed(PanoError):
    code = "external_failed"


class NoObservedPixelsWarning(UserWarning):
    """Completion had no boundary to work from and returned a flat gray canvas."""
