"""Init Solver."""

from .field import DistributionField, PhaseSpaceInterpolator
from .solver import Solver
from .transport import SemiLagrangianTransport


__all__ = [
    "DistributionField",
    "PhaseSpaceInterpolator",
    "SemiLagrangianTransport",
    "Solver",
]
