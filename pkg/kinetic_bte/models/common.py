"""Common Schemas."""

from typing import Annotated, Tuple

from pydantic import BaseModel, ConfigDict, Field


Vector3 = Tuple[float, float, float]

PositiveFloat = Annotated[float, Field(gt=0)]


# Strict Schema
class StrictSchema(BaseModel):
    """Schema rejecting unknown keys."""

    model_config = ConfigDict(extra="forbid")


# Array Schema
class ArraySchema(BaseModel):
    """Schema carrying numpy arrays."""

    model_config = ConfigDict(arbitrary_types_allowed=True)
