"""Exception types shared across the package."""


class SuperBMError(Exception):
    """Base class for package errors."""


class CatalogError(SuperBMError):
    """A test function outside the closed catalog, or an unsupported kind."""


class DomainError(SuperBMError):
    """Initial state or test function incompatible with the spatial domain."""


class QuadratureError(SuperBMError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ParticleCapError(SuperBMError):
    """Alive particle count exceeded the configured cap."""

    def __init__(self, cap):
        super().__init__(
            f"alive particle count exceeded the configured cap of {cap}; "
            "raise particle_cap or reduce t_max / scaling"
        )
        self.cap = cap


class ConfigError(SuperBMError):
    """Invalid experiment configuration."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class PlanError(SuperBMError):
    """An experiment plan that cannot satisfy a check's preconditions."""
