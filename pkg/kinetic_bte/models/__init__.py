"""Init Models."""

from .characteristics import (
    BackTimeCycle,
    CharacteristicsSettings,
    CycleRecord,
    CycleTerminalEnum,
    ExitSchema,
    JacobianState,
    PhasePoint,
    ProbabilityEstimate,
)
from .collision import KernelSpec, LinearOperatorMatrix, MomentTriple, VelocityGridSpec
from .diagnostics import (
    DIAGNOSTICS_COLUMNS,
    CoercivityReport,
    DecayFit,
    DiagnosticsSeries,
    EntropyCheck,
    NormsSchema,
)
from .fields import PotentialKindEnum, PotentialSpec, WeightSpec
from .geometry import BoundaryClassEnum, DomainKindEnum, DomainSpec
from .scenario import CycleSpec, OutputSpec, Scenario
from .solver import (
    DampingModeEnum,
    InitialConditionKindEnum,
    InitialConditionSpec,
    PerturbationModeEnum,
    PicardIterate,
    PicardResult,
    RepresentationEnum,
    SchemeConfig,
    SimulationModeEnum,
    SpatialGridSpec,
)


__all__ = [
    "BackTimeCycle",
    "BoundaryClassEnum",
    "CharacteristicsSettings",
    "CoercivityReport",
    "CycleRecord",
    "CycleSpec",
    "CycleTerminalEnum",
    "DIAGNOSTICS_COLUMNS",
    "DampingModeEnum",
    "DecayFit",
    "DiagnosticsSeries",
    "DomainKindEnum",
    "DomainSpec",
    "EntropyCheck",
    "ExitSchema",
    "InitialConditionKindEnum",
    "InitialConditionSpec",
    "JacobianState",
    "KernelSpec",
    "LinearOperatorMatrix",
    "MomentTriple",
    "NormsSchema",
    "OutputSpec",
    "PerturbationModeEnum",
    "PhasePoint",
    "PicardIterate",
    "PicardResult",
    "PotentialKindEnum",
    "PotentialSpec",
    "ProbabilityEstimate",
    "RepresentationEnum",
    "Scenario",
    "SchemeConfig",
    "SimulationModeEnum",
    "SpatialGridSpec",
    "VelocityGridSpec",
    "WeightSpec",
]
