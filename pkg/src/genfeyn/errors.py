"""Exception types shared across the package."""


class GenFeynError(Exception):
    """Base class for all package errors."""


class DomainError(GenFeynError, ValueError):
    """An argument lies outside the domain of an operation."""


class CapacityError(GenFeynError):
    """A ground set is larger than the configured enumeration capacity."""


class CapabilityError(GenFeynError):
    """A moment oracle was asked for an order it does not support."""


class ConfigError(GenFeynError):
    """A configuration document failed validation."""
