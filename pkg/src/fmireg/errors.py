"""Exception types shared across the toolkit.

Each class carries a short ``name`` used by the CLI when printing
diagnostics.
"""


class FmiregError(Exception):
    name = "error"


class InputError(FmiregError):
    name = "input"


class DomainError(FmiregError):
    name = "domain"


class InvalidTransformError(FmiregError):
    name = "invalid-transform"


class DegenerateLandmarksError(FmiregError):
    name = "degenerate-landmarks"


class EmptyOverlapError(FmiregError):
    name = "empty-overlap"


class InvalidDistributionError(FmiregError):
    name = "invalid-distribution"


class DegenerateHistogramError(FmiregError):
    name = "degenerate-histogram"


class EmptyFocusError(FmiregError):
    name = "empty-focus"


class NoThresholdError(FmiregError):
    name = "no-threshold"


class TooSmallImageError(FmiregError):
    name = "too-small"


class RegistrationFailedError(FmiregError):
    name = "registration-failed"


class InternalError(FmiregError):
    name = "internal"
