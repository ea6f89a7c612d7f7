"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration value or combination of values is invalid.

    The message always names the offending field so callers can surface
    field-level diagnostics.
    """


class CheckpointError(RuntimeError):
    """A checkpoint file is unreadable, corrupted, or incompatible."""
