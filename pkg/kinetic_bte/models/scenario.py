"""Scenario Schemas."""

import hashlib
import json

from typing import List

from pydantic import Field, field_validator

from .collision import KernelSpec, VelocityGridSpec
from .common import StrictSchema, Vector3
from .characteristics import CharacteristicsSettings
from .fields import PotentialSpec, WeightSpec
from .geometry import DomainSpec
from .solver import InitialConditionSpec, SchemeConfig, SpatialGridSpec


# Cycle Spec
class CycleSpec(StrictSchema):
    """Cycle Spec."""

    t: float = Field(default=5.0, gt=0)
    x: Vector3 = (0.0, 0.0, 0.0)
    v: Vector3 = (1.0, 0.0, 0.0)
    ks: List[int] = Field(default_factory=lambda: [5, 10, 20, 40])
    n_samples: int = Field(default=10000, ge=100)
    step_fraction: float = Field(default=1e-2, gt=0, le=0.5)

    @field_validator("ks")
    @classmethod
    def check_ks(cls, value: List[int]) -> List[int]:
        """Check cycle indices."""
        if not value or min(value) < 2:
            raise ValueError("cycle indices must be at least 2")
        return sorted(set(value))


# Output Spec
class OutputSpec(StrictSchema):
    """Output Spec."""

    directory: str = "out"
    snapshot_every: int = Field(default=0, ge=0, description="Steps between snapshots, 0 disables them.")


# Scenario
class Scenario(StrictSchema):
    """Scenario."""

    domain: DomainSpec = Field(default_factory=DomainSpec)
    potential: PotentialSpec = Field(default_factory=PotentialSpec)
    weight: WeightSpec = Field(default_factory=WeightSpec)
    kernel: KernelSpec = Field(default_factory=KernelSpec)
    velocity_grid: VelocityGridSpec = Field(default_factory=VelocityGridSpec)
    spatial_grid: SpatialGridSpec = Field(default_factory=SpatialGridSpec)
    initial_condition: InitialConditionSpec = Field(default_factory=InitialConditionSpec)
    scheme: SchemeConfig = Field(default_factory=SchemeConfig)
    characteristics: CharacteristicsSettings = Field(default_factory=CharacteristicsSettings)
    cycles: CycleSpec = Field(default_factory=CycleSpec)
    output: OutputSpec = Field(default_factory=OutputSpec)
    seed: int = Field(default=0, ge=0)

    def content_hash(self) -> str:
        """Return the short SHA-256 of the canonical JSON dump."""
        payload = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()[:16]
