"""Diagnostics Schemas."""

from typing import Dict, List, Optional

import numpy as np

from pydantic import BaseModel, Field, model_validator


DIAGNOSTICS_COLUMNS = (
    "mass",
    "entropy",
    "l2_norm",
    "winf_norm",
    "gamma_plus_norm",
    "rf_min_ratio",
)


# Diagnostics Series
class DiagnosticsSeries(BaseModel):
    """Time-indexed diagnostics channels."""

    times: List[float] = Field(default_factory=list)
    channels: Dict[str, List[float]] = Field(default_factory=dict)
    metadata: Dict[str, str] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_lengths(self) -> "DiagnosticsSeries":
        """Check channel lengths and time ordering."""
        for name, values in self.channels.items():
            if len(values) != len(self.times):
                raise ValueError(f"channel {name} has {len(values)} values for {len(self.times)} times")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")
        return self

    def append(self, t: float, **values: float) -> None:
        """Append one output row."""
        if self.times and t <= self.times[-1]:
            raise ValueError("times must be strictly increasing")
        if self.times and set(values) != set(self.channels):
            raise ValueError("channel set changed between outputs")
        self.times.append(float(t))
        for name, value in values.items():
            self.channels.setdefault(name, []).append(float(value))

    def channel(self, name: str) -> np.ndarray:
        """Return a channel as an array."""
        return np.asarray(self.channels[name], dtype=float)


# Decay Fit
class DecayFit(BaseModel):
    """Decay Fit."""

    rate: float
    r_squared: float
    window: tuple[float, float]


# Entropy Check
class EntropyCheck(BaseModel):
    """Entropy L1/L2 Check."""

    lhs: float
    entropy: float
    bound: float
    passed: bool


# Norms Schema
class NormsSchema(BaseModel):
    """Norms."""

    l2: float
    weighted_sup: float
    boundary_gamma_plus: float


# Coercivity Report
class CoercivityReport(BaseModel):
    """Coercivity Report."""

    near_kernel_eigenvalues: List[float]
    kernel_residuals: Dict[str, float]
    spectral_gap: float
    fitted_constant: float
    nu0: float
    raw_symmetry_residual: Optional[float] = None
    raw_kernel_residuals: Optional[Dict[str, float]] = None
    raw_smallest_eigenvalue: Optional[float] = None
