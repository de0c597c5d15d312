"""Init Kinetic BTE."""

from .client import KineticClient
from .context import KineticContext
from .errors import KineticError


__all__ = [
    "KineticClient",
    "KineticContext",
    "KineticError",
]
