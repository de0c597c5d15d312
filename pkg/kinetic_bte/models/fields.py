"""Fields Schemas."""

from enum import Enum

from pydantic import Field, field_validator

from .common import StrictSchema, Vector3


class PotentialKindEnum(str, Enum):
    """Potential Kind Enum."""

    ZERO = "zero"
    HARMONIC = "harmonic"
    GAUSSIAN_BUMP = "gaussian_bump"


# Potential Spec
class PotentialSpec(StrictSchema):
    """Potential Spec."""

    kind: PotentialKindEnum = PotentialKindEnum.ZERO
    strength: float = Field(default=1.0, ge=0, description="Harmonic stiffness kappa.")
    amplitude: float = Field(default=1.0, ge=0, description="Gaussian bump height.")
    center: Vector3 = (0.0, 0.0, 0.0)
    width: float = Field(default=0.5, gt=0, description="Gaussian bump width sigma.")
    offset: float = Field(default=0.0, ge=0)
    sup_samples: int = Field(default=64, ge=4, description="Samples per axis for the sup norm.")


# Weight Spec
class WeightSpec(StrictSchema):
    """Weight Spec."""

    beta: float = 6.0

    @field_validator("beta")
    @classmethod
    def check_beta(cls, value: float) -> float:
        """Check beta."""
        if value <= 5:
            raise ValueError("beta must exceed 5")
        return value
