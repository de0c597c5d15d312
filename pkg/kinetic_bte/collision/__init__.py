"""Init Collision."""

from .collision import CollisionOperator
from .grid import VelocityGrid
from .moments import (
    gamma_plus_inner,
    gaussian_moment,
    hermite_moment,
    hydrodynamic_constants,
    invariant_basis,
    project_Pgamma,
    project_PL,
    project_PL_batch,
)


__all__ = [
    "CollisionOperator",
    "VelocityGrid",
    "gamma_plus_inner",
    "gaussian_moment",
    "hermite_moment",
    "hydrodynamic_constants",
    "invariant_basis",
    "project_PL",
    "project_PL_batch",
    "project_Pgamma",
]
