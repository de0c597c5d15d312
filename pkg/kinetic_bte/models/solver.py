"""Solver Schemas."""

from enum import Enum
from typing import List, Literal

import numpy as np

from pydantic import Field

from .common import ArraySchema, StrictSchema, Vector3


class RepresentationEnum(str, Enum):
    """Representation Enum."""

    FULL = "full"
    WEIGHTED_PERTURBATION = "weighted_perturbation"


class DampingModeEnum(str, Enum):
    """Damping Mode Enum."""

    NONE = "none"
    NU = "nu"
    RF = "rf"


class SimulationModeEnum(str, Enum):
    """Simulation Mode Enum."""

    NONLINEAR = "nonlinear"
    LINEAR = "linear"


class InitialConditionKindEnum(str, Enum):
    """Initial Condition Kind Enum."""

    EQUILIBRIUM = "equilibrium"
    SMALL_PERTURBATION = "small_perturbation"
    BUMP = "bump"
    RANDOM = "random"


class PerturbationModeEnum(str, Enum):
    """Perturbation Mode Enum."""

    DENSITY = "density"
    MOMENTUM = "momentum"
    RANDOM = "random"


# Spatial Grid Spec
class SpatialGridSpec(StrictSchema):
    """Spatial Grid Spec."""

    points_per_axis: int = Field(default=16, ge=2)
    subsamples: int = Field(default=4, ge=1, description="Sub-cell samples per axis for cell volumes.")


# Scheme Config
class SchemeConfig(StrictSchema):
    """Scheme Config."""

    dt: float = Field(default=0.01, gt=0)
    t_end: float = Field(default=1.0, gt=0)
    interpolation_order: Literal[1, 3] = 1
    damping: DampingModeEnum = DampingModeEnum.NU
    mode: SimulationModeEnum = SimulationModeEnum.NONLINEAR
    picard_max_iterations: int = Field(default=20, ge=1)
    picard_tolerance: float = Field(default=1e-10, gt=0)
    picard_smallness: float = Field(default=10.0, gt=0, description="Largest accepted sup norm of h0.")
    picard_divergence: float = Field(default=1e3, gt=1, description="Residual growth treated as divergence.")
    symmetrized: bool = True
    boundary_balance: bool = Field(default=True, description="Close the mass defect of a step on the boundary layer.")
    mass_fix: bool = Field(default=False, description="Rescale full F globally to the pre-step mass.")
    output_every: int = Field(default=10, ge=1, description="Steps between diagnostics outputs.")
    seed: int | None = Field(default=None, ge=0, description="Overrides the scenario seed for this scheme.")

    @property
    def n_steps(self) -> int:
        """Return the number of steps to reach t_end."""
        return max(1, int(round(self.t_end / self.dt)))


# Initial Condition Spec
class InitialConditionSpec(StrictSchema):
    """Initial Condition Spec."""

    kind: InitialConditionKindEnum = InitialConditionKindEnum.EQUILIBRIUM
    amplitude: float = Field(default=1e-3, ge=0, description="Target sup norm of w f0.")
    mode: PerturbationModeEnum = PerturbationModeEnum.DENSITY
    center: Vector3 = (0.0, 0.0, 0.0)
    radius: float = Field(default=0.05, gt=0)
    spread: float = Field(default=0.5, ge=0, lt=1, description="Relative spread of random nonnegative data.")


# Picard Result
class PicardIterate(StrictSchema):
    """Picard Iterate."""

    iteration: int
    residual: float
    ratio: float | None
    nonlinear_norm: float


class PicardResult(ArraySchema):
    """Picard Result."""

    trajectory: List[np.ndarray]
    iterates: List[PicardIterate]
    converged: bool
