"""Conserved quantities, norms, entropy monitors and decay fits."""

import logging
import math

from typing import TYPE_CHECKING, Annotated, Dict, Optional, Sequence, Tuple

import numpy as np

from pydantic import Field
from scipy import linalg, special, stats

from ..collision import invariant_basis
from ..context import KineticContext
from ..errors import NegativeDistribution, NonPositiveChannel
from ..models.collision import LinearOperatorMatrix
from ..models.diagnostics import (
    CoercivityReport,
    DecayFit,
    DiagnosticsSeries,
    EntropyCheck,
    NormsSchema,
)
from ..models.solver import RepresentationEnum

if TYPE_CHECKING:
    from ..solver.field import DistributionField


logger = logging.getLogger(__name__)

NEGATIVE_TOLERANCE = 1e-12
RATIO_FLOOR = 1e-300
INVARIANT_NAMES = ("density", "momentum_1", "momentum_2", "momentum_3", "energy")


class Diagnostics:
    """Diagnostics."""

    def __init__(self, context: KineticContext, boundary_points: int = 256) -> None:
        """Init."""
        self.context = context
        self.boundary_points = boundary_points

    def full_values(self, field: "DistributionField") -> np.ndarray:
        """Return F node values of a field in any representation."""
        if field.representation == RepresentationEnum.FULL:
            return field.values
        return self.context.full_of(field.values)

    def perturbation_values(self, field: "DistributionField") -> np.ndarray:
        """Return f = (F - mu_E) / sqrt(mu_E) node values."""
        if field.representation == RepresentationEnum.FULL:
            return (field.values - self.context.mu_e) / np.sqrt(self.context.mu_e)
        return field.values / self.context.weight

    def _integrate(self, values: np.ndarray) -> float:
        return float(self.context.spatial_grid.weights @ (values @ self.context.velocity_grid.weights))

    def total_mass(self, field: "DistributionField") -> float:
        """Return the phase-space integral of F."""
        return self._integrate(self.full_values(field))

    def relative_entropy(
        self,
        field: "DistributionField",
        tolerance: Annotated[float, Field(description="Accepted negative undershoot.", ge=0)] = NEGATIVE_TOLERANCE,
    ) -> float:
        """Return int (F/mu_E log(F/mu_E) - F/mu_E + 1) mu_E."""
        values = self.full_values(field)
        if values.min() < -tolerance:
            raise NegativeDistribution(f"F reaches {values.min():.3e} below zero")

        ratio = np.maximum(values, 0.0) / self.context.mu_e
        # s log s -> 0 as s -> 0
        integrand = np.where(ratio < RATIO_FLOOR, 1.0, special.xlogy(ratio, ratio) - ratio + 1.0)

        return self._integrate(integrand * self.context.mu_e)

    def entropy_l1l2_check(
        self,
        field: "DistributionField",
        entropy0: Annotated[float, Field(description="Relative entropy of the initial data.")],
        tolerance: float = 1e-10,
    ) -> EntropyCheck:
        """Compare the split L2/L1 size of f with the initial entropy."""
        f = self.perturbation_values(field)
        sqrt_mu_e = np.sqrt(self.context.mu_e)
        small = np.abs(f) <= sqrt_mu_e
        lhs = 0.25 * self._integrate(np.where(small, f**2, 0.0)) + 0.25 * self._integrate(
            np.where(small, 0.0, sqrt_mu_e * np.abs(f))
        )
        entropy = self.relative_entropy(field)
        bound = entropy0 + tolerance

        return EntropyCheck(lhs=lhs, entropy=entropy, bound=bound, passed=lhs <= bound)

    def boundary_trace(self, f: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return boundary quadrature points, weights and the trilinear trace of f there."""
        points, normals, weights = self.context.domain.boundary_quadrature(self.boundary_points)
        index, stencil = self.context.spatial_grid.stencil(points, 1)
        trace = np.einsum("ma,mav->mv", stencil, f[index])

        return normals, weights, trace

    def norms(self, field: "DistributionField") -> NormsSchema:
        """Return the L2 norm of f, the sup of |w f| and the outgoing boundary norm of f."""
        f = self.perturbation_values(field)
        normals, weights, trace = self.boundary_trace(f)
        flux = self.context.velocity_grid.outgoing_flux(normals)

        return NormsSchema(
            l2=math.sqrt(self._integrate(f**2)),
            weighted_sup=float(np.max(np.abs(self.context.weight * f), initial=0.0)),
            boundary_gamma_plus=math.sqrt(float(weights @ np.sum(flux * trace**2, axis=-1))),
        )

    def rf_ratio(self, field: "DistributionField") -> np.ndarray:
        """Return R(f) / (exp(-Phi) nu) at every node."""
        collision = self.context.collision
        damping = np.exp(-self.context.phi_nodes)[:, None] * collision.nu
        return collision.frequency_of(self.full_values(field)) / damping

    def rf_lower_bound_monitor(self, field: "DistributionField") -> float:
        """Return the minimum over the nodes of R(f) / (exp(-Phi) nu)."""
        return float(self.rf_ratio(field).min())

    def coercivity_report(
        self,
        operator: Optional[LinearOperatorMatrix] = None,
        raw: Optional[LinearOperatorMatrix] = None,
    ) -> CoercivityReport:
        """Return the near-kernel of L, its spectral gap and the fitted coercivity constant.

        The raw fields measure the unsymmetrized quadrature operator, relative to nu0, so they show how far
        the grid is from the continuous structure. They default to the context operator's raw form.
        """
        if operator is None:
            operator = self.context.linear_operator
            if raw is None:
                raw = self.context.raw_linear_operator
        matrix = operator.matrix()
        eigenvalues = linalg.eigh(0.5 * (matrix + matrix.T), eigvals_only=True)
        basis = invariant_basis(self.context.velocity_grid)
        residuals = np.linalg.norm(matrix @ basis, axis=0)
        gap = float(eigenvalues[5])

        logger.info("Spectral gap %.6g, near kernel max %.3e", gap, float(np.abs(eigenvalues[:5]).max()))

        return CoercivityReport(
            near_kernel_eigenvalues=[float(value) for value in eigenvalues[:5]],
            kernel_residuals={name: float(value) for name, value in zip(INVARIANT_NAMES, residuals)},
            spectral_gap=gap,
            fitted_constant=gap,
            nu0=operator.nu0,
            **self._raw_fields(raw),
        )

    def _raw_fields(self, raw: Optional[LinearOperatorMatrix]) -> Dict[str, object]:
        if raw is None:
            return {}

        matrix = raw.matrix()
        basis = invariant_basis(self.context.velocity_grid)
        residuals = np.linalg.norm(matrix @ basis, axis=0) / raw.nu0
        eigenvalues = linalg.eigh(0.5 * (matrix + matrix.T), eigvals_only=True)
        logger.info("Raw operator: symmetry %.3e, kernel residual %.3e", raw.symmetry_residual(), residuals.max())

        return {
            "raw_symmetry_residual": raw.symmetry_residual(),
            "raw_kernel_residuals": {name: float(value) for name, value in zip(INVARIANT_NAMES, residuals)},
            "raw_smallest_eigenvalue": float(np.abs(eigenvalues).min()),
        }

    def snapshot(self, field: "DistributionField", strict: bool = True) -> Dict[str, float]:
        """Return every diagnostics channel of one field.

        Without strict, a negative F reports a NaN entropy instead of raising.
        """
        norms = self.norms(field)
        try:
            entropy = self.relative_entropy(field)
        except NegativeDistribution:
            if strict:
                raise
            entropy = math.nan

        return {
            "mass": self.total_mass(field),
            "entropy": entropy,
            "l2_norm": norms.l2,
            "winf_norm": norms.weighted_sup,
            "gamma_plus_norm": norms.boundary_gamma_plus,
            "rf_min_ratio": self.rf_lower_bound_monitor(field),
        }

    def record(self, series: DiagnosticsSeries, t: float, field: "DistributionField", strict: bool = True) -> None:
        """Append the diagnostics of a field at time t."""
        values = self.snapshot(field, strict=strict)
        series.append(t, **values)
        logger.debug("t = %.4f %s", t, values)


def fit_decay_rate(
    times: Sequence[float],
    values: Sequence[float],
    window: Optional[Tuple[float, float]] = None,
) -> DecayFit:
    """Fit log(values) = c - rate t by least squares over a time window."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    window = window or (float(times.min()), float(times.max()))
    inside = (times >= window[0]) & (times <= window[1])
    if inside.sum() < 2:
        raise ValueError("the fitting window holds fewer than two samples")
    if np.any(~(values[inside] > 0)):
        raise NonPositiveChannel("the channel is not positive on the fitting window")

    logs = np.log(values[inside])
    if np.ptp(logs) == 0:
        return DecayFit(rate=0.0, r_squared=1.0, window=window)

    fit = stats.linregress(times[inside], logs)
    return DecayFit(rate=-float(fit.slope), r_squared=float(fit.rvalue**2), window=window)


def fit_warm_up(times: Sequence[float], ratios: Sequence[float], threshold: float = 0.5) -> Optional[float]:
    """Return the earliest output time after which the ratio channel stays at or above threshold."""
    times = np.asarray(times, dtype=float)
    below = np.flatnonzero(~(np.asarray(ratios, dtype=float) >= threshold))
    if not len(below):
        return float(times[0]) if len(times) else None
    if below[-1] + 1 >= len(times):
        return None
    return float(times[below[-1] + 1])


def entropy_increases(entropy: Sequence[float], relative: float = 1e-6, absolute: float = 1e-10) -> list[int]:
    """Return the output indices where the entropy rose by more than the per-step tolerance."""
    values = np.asarray(entropy, dtype=float)
    if len(values) < 2:
        return []
    allowed = relative * abs(values[0]) + absolute
    return [int(k) + 1 for k in np.flatnonzero(np.diff(values) > allowed)]
