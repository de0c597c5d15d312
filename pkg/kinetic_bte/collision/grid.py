"""Velocity grid."""

from typing import Tuple

import numpy as np

from ..fields import global_maxwellian
from ..geometry import tensor_stencil
from ..models.collision import VelocityGridSpec


class VelocityGrid:
    """Truncated cell-centred velocity grid on [-R_v, R_v]^3."""

    def __init__(
        self,
        cutoff: float = 8.0,
        points_per_axis: int = 24,
    ) -> None:
        """Init."""
        if points_per_axis % 2:
            raise ValueError("points_per_axis must be even")

        self.cutoff = cutoff
        self.points_per_axis = n = points_per_axis
        self.spacing = 2.0 * cutoff / n
        self.axis = -cutoff + self.spacing * (np.arange(n) + 0.5)
        self.nodes = np.stack(np.meshgrid(self.axis, self.axis, self.axis, indexing="ij"), axis=-1).reshape(-1, 3)
        self.cell_weight = self.spacing**3
        self.weights = np.full(len(self.nodes), self.cell_weight)
        self.speeds = np.linalg.norm(self.nodes, axis=-1)
        self.mu = global_maxwellian(self.nodes)
        self.sqrt_mu = np.sqrt(self.mu)

    @classmethod
    def from_spec(cls, spec: VelocityGridSpec) -> "VelocityGrid":
        """Build a grid from its scenario spec."""
        return cls(cutoff=spec.cutoff, points_per_axis=spec.points_per_axis)

    def __len__(self) -> int:
        """Return the number of nodes."""
        return len(self.nodes)

    @property
    def mirror(self) -> np.ndarray:
        """Return the index of -v for every node v."""
        return np.arange(len(self.nodes))[::-1]

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Integrate node values over velocity along the last axis."""
        return np.asarray(values) @ self.weights

    def stencil(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Return trilinear node indices and weights at (P, 3) velocities, constant outside the cube."""
        coordinates = (np.asarray(points, dtype=float) + self.cutoff) / self.spacing - 0.5
        return tensor_stencil(coordinates, self.points_per_axis, 1)

    def invariants(self) -> np.ndarray:
        """Return the collision invariants 1, v1, v2, v3, |v|^2 as columns."""
        return np.column_stack([np.ones(len(self.nodes)), self.nodes, self.speeds**2])

    def outgoing_flux(self, normals: np.ndarray) -> np.ndarray:
        """Return w_j (n . v_j) restricted to n . v_j > 0, shape (M, N_v)."""
        flux = np.atleast_2d(normals) @ self.nodes.T
        return np.where(flux > 0, flux, 0.0) * self.weights

    def wall_normalizer(self, normals: np.ndarray) -> np.ndarray:
        """Return the discrete c_mu making the wall Maxwellian flux exactly one, per normal."""
        return 1.0 / (self.outgoing_flux(normals) @ self.mu)
