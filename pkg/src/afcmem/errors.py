"""Shared exception types."""


class ConfigError(Exception):
    """Bad configuration file or invalid command-line input."""


class EstimationError(RuntimeError):
    """Estimation cannot proceed, for example zero usable counts."""
