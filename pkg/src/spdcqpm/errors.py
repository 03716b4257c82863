"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the range where a model is defined."""


class ModelError(RuntimeError):
    """A model produced a non-physical intermediate (e.g. negative radicand)."""


class FitError(ValueError):
    """A fit cannot be performed on the supplied data."""
