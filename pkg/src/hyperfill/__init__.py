"""Numerical toolkit for hyperbolic Dehn filling constructions.

Submodules: ``hyperbolic`` (hyperboloid model), ``curves`` (curvature and
quasi-geodesic checks), ``surfaces`` (fundamental forms), ``tube`` (solid
torus metric), ``surgery`` (slope calculus) and ``cli``.
"""

from hyperfill.errors import (
    ConstraintViolated,
    CurvatureTooLarge,
    DomainError,
    HyperfillError,
    InputError,
    MeridianTooShort,
    NotPrimitive,
)

__version__ = "0.1.0"

__all__ = [
    "ConstraintViolated", "CurvatureTooLarge", "DomainError", "HyperfillError",
    "InputError", "MeridianTooShort", "NotPrimitive", "__version__",
]
