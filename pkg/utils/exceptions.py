"""
Exception hierarchy for the adaptive optimizer
Every error raised on purpose by this package derives from AdaptiveHPOError
"""


class AdaptiveHPOError(Exception):
    """Base class for all package errors"""


class ValidationError(AdaptiveHPOError, ValueError):
    """A point, unit vector, target or objective value is invalid"""


class ConfigError(AdaptiveHPOError, ValueError):
    """A run configuration is invalid or cannot be resolved"""


class SurrogateFitError(AdaptiveHPOError, RuntimeError):
    """A surrogate model could not be fitted on the given data"""


class ObjectiveError(AdaptiveHPOError, RuntimeError):
    """A single objective evaluation failed"""
