"""Shared exception types."""


class ConfigurationError(ValueError):
    """Raised when a structural setting (partition, block length, method tag,
    experiment config) is inconsistent, as opposed to a bad numeric input."""
