"""Geometry Schemas."""

from enum import Enum

from pydantic import Field, model_validator

from .common import StrictSchema, Vector3


class DomainKindEnum(str, Enum):
    """Domain Kind Enum."""

    BALL = "ball"
    ELLIPSOID = "ellipsoid"
    CUSTOM = "custom"


class BoundaryClassEnum(str, Enum):
    """Boundary Class Enum."""

    OUTGOING = "outgoing"
    GRAZING = "grazing"
    INCOMING = "incoming"


# Domain Spec
class DomainSpec(StrictSchema):
    """Domain Spec."""

    kind: DomainKindEnum = DomainKindEnum.BALL
    radius: float = Field(default=1.0, gt=0)
    semi_axes: Vector3 = (1.0, 1.0, 1.0)
    center: Vector3 = (0.0, 0.0, 0.0)
    band_tolerance: float = Field(default=1e-9, gt=0)
    grazing_tolerance: float = Field(default=1e-8, ge=0)

    @model_validator(mode="after")
    def check_kind(self) -> "DomainSpec":
        """Check the kind is buildable from a file and the semi-axes are positive."""
        if self.kind == DomainKindEnum.CUSTOM:
            raise ValueError("custom domains are built programmatically, not from a scenario file")
        if min(self.semi_axes) <= 0:
            raise ValueError("ellipsoid semi-axes must be positive")
        return self
