"""Exception and warning types raised across the pipeline."""


class SwaggError(Exception):
    """Base class for every error raised by swagg."""


class SchemaError(SwaggError):
    """Malformed input table or mismatched feature columns."""


class ConfigError(SwaggError):
    """Invalid run configuration."""


class EmptyColumn(SwaggError):
    """A resampled column has no records left after filtering."""


class AssumptionViolation(SwaggError):
    """The requested count assumption contradicts the observed counts."""


class DomainError(SwaggError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class DegenerateChain(SwaggError):
    """The window chain has zero variance under its stationary law."""


class NoRecords(SwaggError):
    """Every non-empty mixture component has zero weight."""


class UniformImportance(UserWarning):
    """The label has a single class, so every feature gets equal importance."""
