"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class ConfigError(ValueError):
    """A model or run configuration violates its declared constraints."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (overflow, aliasing, non-convergence)."""
