"""Trace finite element studies of the surface Stokes problem."""

from ._core import (
    ConfigError,
    GeometryError,
    NumericError,
    UsageError,
    __version__,
    area,
    converge,
    infsup,
    study,
)

__all__ = [
    "ConfigError",
    "GeometryError",
    "NumericError",
    "UsageError",
    "__version__",
    "area",
    "converge",
    "infsup",
    "study",
]
