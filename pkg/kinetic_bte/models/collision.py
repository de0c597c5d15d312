"""Collision Schemas."""

import math

import numpy as np

from pydantic import Field, field_validator

from .common import ArraySchema, StrictSchema


# Kernel Spec
class KernelSpec(StrictSchema):
    """Kernel Spec."""

    gamma: float = Field(default=1.0, ge=0, le=1)
    angular_constant: float = Field(default=1 / (4 * math.pi), gt=0, description="C_b in b(c) = C_b |c|.")
    n_polar: int = Field(default=3, ge=1, description="Gauss-Legendre points in cos(theta).")
    n_azimuth: int = Field(default=13, ge=1)

    @property
    def order(self) -> int:
        """Return the number of sphere directions per collision pair."""
        return 2 * self.n_polar * self.n_azimuth


# Velocity Grid Spec
class VelocityGridSpec(StrictSchema):
    """Velocity Grid Spec."""

    cutoff: float = Field(default=8.0, gt=0)
    points_per_axis: int = Field(default=24, ge=2)

    @field_validator("points_per_axis")
    @classmethod
    def check_even(cls, value: int) -> int:
        """Check the node count is even."""
        if value % 2:
            raise ValueError("points_per_axis must be even")
        return value


# Moment Triple
class MomentTriple(ArraySchema):
    """Hydrodynamic coefficients a, b, c."""

    a: float
    b: np.ndarray
    c: float


# Linear Operator Matrix
class LinearOperatorMatrix(ArraySchema):
    """Linearized operator L = nu - K on velocity node values."""

    nu: np.ndarray
    K: np.ndarray
    nu0: float
    cell_weight: float

    def matrix(self) -> np.ndarray:
        """Return L as a dense matrix."""
        return np.diag(self.nu) - self.K

    def apply(self, f: np.ndarray) -> np.ndarray:
        """Return L f along the last axis."""
        return self.nu * f - f @ self.K.T

    def symmetry_residual(self) -> float:
        """Return max |K - K^T| relative to max |K|."""
        return float(np.abs(self.K - self.K.T).max() / max(np.abs(self.K).max(), 1e-300))
