"""Distribution fields on the phase-space grid."""

import numpy as np

from pydantic import model_validator

from ..collision import VelocityGrid
from ..geometry import SpatialGrid
from ..models.common import ArraySchema
from ..models.solver import RepresentationEnum


class DistributionField(ArraySchema):
    """Node values F(x_i, v_j), or h = w f, on the spatial x velocity grid."""

    spatial_grid: SpatialGrid
    velocity_grid: VelocityGrid
    values: np.ndarray
    representation: RepresentationEnum = RepresentationEnum.FULL

    @model_validator(mode="after")
    def check_values(self) -> "DistributionField":
        """Check shape and finiteness."""
        expected = (len(self.spatial_grid), len(self.velocity_grid))
        if self.values.shape != expected:
            raise ValueError(f"values have shape {self.values.shape}, expected {expected}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")
        return self

    def with_values(self, values: np.ndarray) -> "DistributionField":
        """Return a field sharing the grids with new values."""
        return DistributionField(
            spatial_grid=self.spatial_grid,
            velocity_grid=self.velocity_grid,
            values=values,
            representation=self.representation,
        )

    @property
    def phase_weights(self) -> np.ndarray:
        """Return the product quadrature weights of the phase-space nodes."""
        return self.spatial_grid.weights[:, None] * self.velocity_grid.weights[None, :]


class PhaseSpaceInterpolator:
    """Tensor interpolation of node values at off-grid phase points."""

    def __init__(self, spatial_grid: SpatialGrid, velocity_grid: VelocityGrid, order: int = 1) -> None:
        """Init."""
        self.spatial_grid = spatial_grid
        self.velocity_grid = velocity_grid
        self.order = order

    def evaluate(self, values: np.ndarray, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Interpolate (N_x, N_v) node values at (P, 3) positions and velocities."""
        if not len(x):
            return np.empty(0)

        spatial_index, spatial_weight = self.spatial_grid.stencil(x, self.order)
        velocity_index, velocity_weight = self.velocity_grid.stencil(v)
        gathered = values[spatial_index[:, :, None], velocity_index[:, None, :]]

        return np.einsum("pa,pb,pab->p", spatial_weight, velocity_weight, gathered)

    def trace(self, values: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Interpolate (N_x, N_v) node values in space only, at (M, 3) positions."""
        spatial_index, spatial_weight = self.spatial_grid.stencil(x, self.order)
        return np.einsum("ma,mav->mv", spatial_weight, values[spatial_index])
