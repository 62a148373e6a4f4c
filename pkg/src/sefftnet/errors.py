"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Shapes, schedules or settings that cannot describe a valid run."""


class UsageError(RuntimeError):
    """An API called out of order, e.g. backward without a grad buffer."""


class DataError(RuntimeError):
    """Unreadable or unsupported input data (WAV files, manifests, checkpoints)."""


class NonFiniteError(RuntimeError):
    """A NaN or Inf appeared in a loss or gradient."""
