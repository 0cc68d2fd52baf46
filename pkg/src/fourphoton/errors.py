"""Exception types shared across the package."""


class SizeLimitError(ValueError):
    """An expansion would exceed the configured size bound."""


class DomainError(ValueError):
    """An operation received input outside its domain."""


class NormalizationError(DomainError):
    """A state cannot be normalized, or is used unnormalized."""


class NoLhvModelError(ValueError):
    """Correlations violate the tensor Bell criterion; no local model exists."""

    def __init__(self, l1):
        self.l1 = float(l1)
        super().__init__(f"sum of |coefficients| = {self.l1:.12g} > 1: no local hidden variable model")


class ConfigurationError(ValueError):
    """Invalid optimizer configuration or a non-finite objective."""
