"""Characteristics Schemas."""

from enum import Enum
from typing import List

import numpy as np

from pydantic import BaseModel, Field

from .common import ArraySchema, StrictSchema, Vector3


class CycleTerminalEnum(str, Enum):
    """Cycle Terminal Enum."""

    REACHED_INITIAL_TIME = "reached_initial_time"
    TRUNCATED = "truncated"


# Phase Point Schema
class PhasePoint(BaseModel):
    """Phase Point."""

    x: Vector3
    v: Vector3


# Exit Schema
class ExitSchema(BaseModel):
    """Backward exit of a characteristic."""

    t_b: float
    x_b: Vector3
    v_b: Vector3


# Cycle Schemas
class CycleRecord(BaseModel):
    """Cycle Record."""

    t: float
    x: Vector3
    v: Vector3


class BackTimeCycle(BaseModel):
    """Back-time cycle."""

    records: List[CycleRecord]
    terminal: CycleTerminalEnum


# Jacobian Schema
class JacobianState(ArraySchema):
    """Jacobian State."""

    dXdv: np.ndarray
    dVdv: np.ndarray
    det: float


# Probability Schema
class ProbabilityEstimate(BaseModel):
    """Probability Estimate."""

    k: int
    estimate: float
    std_error: float
    n_samples: int
    seed: int


# Characteristics Settings
class CharacteristicsSettings(StrictSchema):
    """Characteristics Settings."""

    step_fraction: float = Field(default=1e-3, gt=0, le=0.5, description="Step as a fraction of a crossing time.")
    horizon_crossings: float = Field(default=1e4, gt=0, description="Exit search horizon in crossing times.")
    task_size: int = Field(default=1024, ge=1, description="Monte-Carlo samples per task.")
