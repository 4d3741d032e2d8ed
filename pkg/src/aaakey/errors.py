"""Exception types shared across the package."""


class LengthMismatchError(ValueError):
    """Two bit containers that must agree in length do not."""


class DomainError(ValueError):
    """A numeric argument lies outside its mathematical domain."""


class ConfigError(ValueError):
    """Invalid model or experiment parameters."""


class ResourceCapError(RuntimeError):
    """A request exceeds a hard computational cap (e.g. exact enumeration size)."""
