"""Init Geometry."""

from .geometry import LevelSetDomain, tangent_frame
from .grid import SpatialGrid, axis_stencil, tensor_stencil


__all__ = [
    "LevelSetDomain",
    "SpatialGrid",
    "axis_stencil",
    "tangent_frame",
    "tensor_stencil",
]
