"""Shared exception types."""


class ConfigurationError(ValueError):
    """Invalid or inconsistent run configuration (bad key, unit, or layout)."""
