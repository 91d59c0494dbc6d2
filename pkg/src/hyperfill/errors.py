"""Exception types shared across the package."""


class HyperfillError(Exception):
    """Base class; the CLI maps subclasses to exit codes."""


class InputError(HyperfillError, ValueError):
    """Malformed input (bad file, wrong shape, bad schema)."""


class DomainError(HyperfillError, ValueError):
    """Input is well formed but outside the domain of a construction."""


class DimensionError(InputError):
    pass


class InvalidPointError(InputError):
    pass


class StencilError(InputError):
    pass


class DegenerateSurfaceError(InputError):
    pass


class CurvatureTooLarge(DomainError):
    pass


class MeridianTooShort(DomainError):
    pass


class NotPrimitive(InputError):
    pass


class ConstraintViolated(DomainError):
    pass
