"""Exception hierarchy shared by every paircal module."""


class CalibrationError(Exception):
    """Base class for all paircal errors."""


class ParameterError(CalibrationError, ValueError):
    """A model or run parameter is outside its valid domain."""


class TruncationError(CalibrationError):
    """A pair-number distribution cannot be truncated to the requested tail mass."""


class DataError(CalibrationError):
    """Count data is malformed or cannot support the requested computation."""


class InsufficientDataError(DataError):
    """Fewer records than an operation needs."""


class DegenerateMomentsError(DataError, ZeroDivisionError):
    """A mean singles rate is zero, so an estimator would divide by zero."""


class BackgroundDominatesError(DataError):
    """Background-corrected mean count is not positive in at least one arm."""


class MethodUnavailableError(CalibrationError):
    """The requested estimator needs data that is not present (e.g. coincidences)."""
