"""Custom exceptions for ANP-Lab."""


class AnpLabError(Exception):
    """Base exception for ANP-Lab."""

    pass


class DomainError(AnpLabError):
    """Input outside an operation's domain (shapes, labels, degenerate data)."""

    pass


class ConfigurationError(AnpLabError):
    """Invalid hyperparameters, masks, attack methods or severities."""

    pass


class NumericError(AnpLabError):
    """Non-finite values produced during a computation."""

    pass


class FormatError(AnpLabError):
    """Malformed IDX, checkpoint or manifest file."""

    pass


class UnsupportedArchitectureError(AnpLabError):
    """Operation not defined for the given network architecture."""

    pass
