"""Time evolution of the distribution."""

import logging
import math

from typing import Annotated, Callable, Dict, List, Optional, Sequence

import numpy as np

from pydantic import Field

from ..characteristics import Characteristics
from ..context import KineticContext
from ..diagnostics import Diagnostics
from ..errors import NegativeInput, NonContractive
from ..models.diagnostics import DiagnosticsSeries
from ..models.solver import (
    DampingModeEnum,
    InitialConditionKindEnum,
    InitialConditionSpec,
    PerturbationModeEnum,
    PicardIterate,
    PicardResult,
    RepresentationEnum,
    SimulationModeEnum,
)
from .field import DistributionField, PhaseSpaceInterpolator
from .transport import Rate, SemiLagrangianTransport


logger = logging.getLogger(__name__)

POSITIVITY_TOLERANCE = 1e-12

SnapshotCallback = Callable[[int, float, DistributionField], None]


class Solver:
    """Solver."""

    def __init__(
        self,
        context: KineticContext,
        characteristics: Optional[Characteristics] = None,
        diagnostics: Optional[Diagnostics] = None,
    ) -> None:
        """Init."""
        self.context = context
        self.collision = context.collision
        self.characteristics = characteristics or Characteristics(
            context.domain,
            context.potential,
            settings=context.scenario.characteristics,
            workers=context.workers,
        )
        self.diagnostics = diagnostics or Diagnostics(context)
        self.transport = SemiLagrangianTransport(context, self.characteristics)
        self.interpolator = PhaseSpaceInterpolator(context.spatial_grid, context.velocity_grid)

    @property
    def scheme(self):
        """Return the scheme config."""
        return self.context.scheme

    def field(
        self,
        values: np.ndarray,
        representation: RepresentationEnum = RepresentationEnum.FULL,
    ) -> DistributionField:
        """Wrap node values into a field on the context grids."""
        return DistributionField(
            spatial_grid=self.context.spatial_grid,
            velocity_grid=self.context.velocity_grid,
            values=np.asarray(values, dtype=float),
            representation=representation,
        )

    def as_perturbation(self, field: DistributionField) -> DistributionField:
        """Return the field in the weighted perturbation representation."""
        if field.representation == RepresentationEnum.WEIGHTED_PERTURBATION:
            return field
        return self.field(self.context.perturbation_of(field.values), RepresentationEnum.WEIGHTED_PERTURBATION)

    def _mass(self, values: np.ndarray) -> float:
        return float(self.context.spatial_grid.weights @ (values @ self.context.velocity_grid.weights))

    def _scaled(self, delta: np.ndarray, amplitude: float) -> np.ndarray:
        """Scale a deviation of F so that sup |w f| equals amplitude."""
        peak = float(np.max(np.abs(self.context.weight * delta / np.sqrt(self.context.mu_e))))
        if peak == 0:
            return np.zeros_like(delta)
        return delta * (amplitude / peak)

    def _without_mass(self, delta: np.ndarray) -> np.ndarray:
        return delta - self._mass(delta) / self._mass(self.context.mu_e) * self.context.mu_e

    def _bump_profile(self, spec: InitialConditionSpec) -> np.ndarray:
        nodes = self.context.spatial_grid.nodes
        distance = np.sum((nodes - np.asarray(spec.center)) ** 2, axis=-1)
        profile = np.maximum(0.0, 1.0 - distance / spec.radius**2) ** 2
        if not profile.any():
            # support narrower than the grid falls back to the nearest node
            logger.warning("Bump radius %.3g is below the grid spacing, using the nearest node", spec.radius)
            profile[np.argmin(distance)] = 1.0
        return profile

    def initial_condition(
        self,
        spec: Optional[InitialConditionSpec] = None,
        representation: RepresentationEnum = RepresentationEnum.FULL,
        seed: Annotated[Optional[int], Field(description="Overrides the scheme seed.")] = None,
    ) -> DistributionField:
        """Build the initial data of a scenario."""
        spec = spec or self.context.scenario.initial_condition
        rng = np.random.default_rng(self.context.scheme_seed if seed is None else seed)
        mu_e = self.context.mu_e
        nodes = self.context.spatial_grid.nodes

        match spec.kind:
            case InitialConditionKindEnum.EQUILIBRIUM:
                values = mu_e.copy()
            case InitialConditionKindEnum.SMALL_PERTURBATION:
                match spec.mode:
                    case PerturbationModeEnum.DENSITY:
                        profile = np.broadcast_to((nodes[:, 0] - spec.center[0])[:, None], mu_e.shape)
                    case PerturbationModeEnum.MOMENTUM:
                        profile = np.broadcast_to(self.context.velocity_grid.nodes[:, 0], mu_e.shape)
                    case PerturbationModeEnum.RANDOM:
                        profile = rng.uniform(-1.0, 1.0, mu_e.shape)
                values = mu_e + self._scaled(self._without_mass(profile * mu_e), spec.amplitude)
            case InitialConditionKindEnum.BUMP:
                delta = self._scaled(self._bump_profile(spec)[:, None] * mu_e, spec.amplitude)
                values = mu_e + delta
                values *= self._mass(mu_e) / self._mass(values)
            case InitialConditionKindEnum.RANDOM:
                values = mu_e * (1.0 + spec.spread * rng.uniform(-1.0, 1.0, mu_e.shape))
                values *= self._mass(mu_e) / self._mass(values)

        field = self.field(values)
        logger.info("Initial condition %s, mass %.10g", spec.kind.value, self._mass(values))

        if representation == RepresentationEnum.WEIGHTED_PERTURBATION:
            return self.as_perturbation(field)
        return field

    def transport_step(self, field: DistributionField, dt: Optional[float] = None) -> DistributionField:
        """Advance a field by free transport with diffuse reflection."""
        return field.with_values(self.transport.step(field.values, field.representation, dt or self.scheme.dt))

    def node_rate(self, mode: DampingModeEnum, frozen: Optional[DistributionField] = None) -> Optional[np.ndarray]:
        """Return the damping coefficient at the phase-space nodes."""
        match mode:
            case DampingModeEnum.NONE:
                return None
            case DampingModeEnum.NU:
                return np.exp(-self.context.phi_nodes)[:, None] * self.collision.nu
            case DampingModeEnum.RF:
                if frozen is None:
                    raise ValueError("R(f) damping needs a frozen field")
                f = self.diagnostics.perturbation_values(frozen)
                return self.collision.r_of_f(self.context.potential, self.context.spatial_grid.nodes, f)

    def rate(self, mode: DampingModeEnum, frozen: Optional[DistributionField] = None) -> Optional[Rate]:
        """Return the damping coefficient as a function of phase points."""
        table = self.node_rate(mode, frozen)
        if table is None:
            return None

        def evaluate(x: np.ndarray, v: np.ndarray) -> np.ndarray:
            return self.interpolator.evaluate(table, x, v)

        return evaluate

    def damped_semigroup(
        self,
        h0: DistributionField,
        mode: DampingModeEnum,
        t: Annotated[float, Field(description="Evolution time.", ge=0)],
        frozen: Optional[DistributionField] = None,
        dt: Optional[float] = None,
    ) -> DistributionField:
        """Evolve h by transport, diffuse reflection and the damping of mode for a time t."""
        if t < 0:
            raise ValueError("t must be nonnegative")
        if t == 0:
            return h0

        dt = dt or self.scheme.dt
        n_steps = max(1, math.ceil(t / dt - 1e-9))
        rate = self.rate(mode, frozen)
        values = h0.values
        for _ in range(n_steps):
            values = self.transport.step(values, h0.representation, t / n_steps, rate)

        return h0.with_values(values)

    def positivity_step(self, field: DistributionField, dt: Optional[float] = None) -> DistributionField:
        """Advance F by transport, then an implicit loss and explicit gain collision update.

        With scheme.symmetrized the gain at each spatial node is rescaled so that the update conserves
        mass there; the factor stays within a few percent of 1 for moderate data. symmetrized=False
        gives the literal update (F* + dt Q+(F*, F*)) / (1 + dt R(F*)) with no rescaling.
        """
        if field.representation != RepresentationEnum.FULL:
            raise ValueError("the positivity scheme acts on the full distribution")
        if field.values.min() < -POSITIVITY_TOLERANCE:
            raise NegativeInput(f"F reaches {field.values.min():.3e} below zero")

        dt = dt or self.scheme.dt
        grid = self.context.velocity_grid
        transported = np.maximum(self.transport.step(np.maximum(field.values, 0.0), field.representation, dt), 0.0)
        frequency = self.collision.frequency_of(transported)
        gain = self.collision.q_gain(transported, transported)
        denominator = 1.0 + dt * frequency

        scale = np.ones(len(transported))
        if self.scheme.symmetrized:
            # per-node gain factor restoring the mass the loss removes
            lost = grid.integrate(frequency * transported / denominator)
            gained = grid.integrate(gain / denominator)
            positive = gained > 0
            scale[positive] = lost[positive] / gained[positive]

        return field.with_values((transported + dt * scale[:, None] * gain) / denominator)

    def _sources(self, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return exp(-Phi) K_w h and exp(-Phi / 2) w Gamma(h / w, h / w)."""
        if not h.any():
            return np.zeros_like(h), np.zeros_like(h)

        weight = self.context.weight
        phi = self.context.phi_nodes[:, None]
        f = h / weight
        linear = np.exp(-phi) * weight * (f @ self.context.linear_operator.K.T)
        nonlinear, _, _ = self.collision.gamma_nonlinear(f, f)

        return linear, np.exp(-0.5 * phi) * weight * nonlinear

    def _duhamel(self, sources: List[np.ndarray], dt: float, rate: Optional[Rate]) -> List[np.ndarray]:
        """Return int_0^t_n S(t_n - s) q(s) ds on the step grid by the trapezoid rule."""
        representation = RepresentationEnum.WEIGHTED_PERTURBATION
        integral = [np.zeros_like(sources[0])]
        for n in range(1, len(sources)):
            previous = integral[-1] + 0.5 * dt * sources[n - 1]
            moved = self.transport.step(previous, representation, dt, rate) if previous.any() else previous
            integral.append(moved + 0.5 * dt * sources[n])
        return integral

    def picard_mild_iteration(
        self,
        h0: DistributionField,
        t_end: Annotated[Optional[float], Field(description="Final time, the scheme's by default.", gt=0)] = None,
        dt: Optional[float] = None,
        guard: Annotated[bool, Field(description="Reject data above picard_smallness before iterating.")] = True,
    ) -> PicardResult:
        """Iterate the weighted mild formulation from h = 0 until successive iterates agree."""
        h0 = self.as_perturbation(h0)
        scheme = self.scheme
        dt = dt or scheme.dt
        t_end = t_end or scheme.t_end
        n_steps = max(1, int(round(t_end / dt)))

        size = float(np.max(np.abs(h0.values)))
        if guard and size > scheme.picard_smallness:
            raise NonContractive(f"sup |h0| = {size:.3g} exceeds the smallness bound {scheme.picard_smallness:g}")

        rate = self.rate(DampingModeEnum.NU)
        representation = RepresentationEnum.WEIGHTED_PERTURBATION
        free = [h0.values]
        for _ in range(n_steps):
            current = free[-1]
            free.append(self.transport.step(current, representation, dt, rate) if current.any() else current)

        iterate = [np.zeros_like(h0.values) for _ in free]
        iterates: List[PicardIterate] = []
        residuals: List[float] = []
        for iteration in range(1, scheme.picard_max_iterations + 1):
            linear, nonlinear = zip(*(self._sources(h) for h in iterate))
            linear_part = self._duhamel(list(linear), dt, rate)
            nonlinear_part = self._duhamel(list(nonlinear), dt, rate)
            updated = [a + b + c for a, b, c in zip(free, linear_part, nonlinear_part)]

            residual = max(float(np.max(np.abs(new - old))) for new, old in zip(updated, iterate))
            ratio = residual / residuals[-1] if residuals and residuals[-1] > 0 else None
            residuals.append(residual)
            iterates.append(
                PicardIterate(
                    iteration=iteration,
                    residual=residual,
                    ratio=ratio,
                    nonlinear_norm=max(float(np.max(np.abs(part))) for part in nonlinear_part),
                )
            )
            logger.info("Picard iterate %d: residual %.3e, ratio %s", iteration, residual, ratio)
            iterate = updated

            if not math.isfinite(residual) or residual > scheme.picard_divergence * residuals[0] > 0:
                raise NonContractive(f"the Picard residual grew to {residual:.3e}", residuals)
            if residual < scheme.picard_tolerance:
                return PicardResult(trajectory=iterate, iterates=iterates, converged=True)

        raise NonContractive(
            f"no convergence after {scheme.picard_max_iterations} iterations, last residual {residuals[-1]:.3e}",
            residuals,
        )

    def picard_threshold(
        self,
        amplitudes: Sequence[float],
        spec: Optional[InitialConditionSpec] = None,
        t_end: Optional[float] = None,
    ) -> Dict[str, object]:
        """Run the Picard iteration over increasing amplitudes and report the first non-contractive one.

        The smallness guard is lifted, so the threshold is where the iteration itself stops contracting.
        """
        spec = spec or self.context.scenario.initial_condition
        if spec.kind == InitialConditionKindEnum.EQUILIBRIUM:
            spec = spec.model_copy(update={"kind": InitialConditionKindEnum.SMALL_PERTURBATION})

        rows = []
        threshold = None
        for amplitude in sorted(amplitudes):
            h0 = self.initial_condition(
                spec.model_copy(update={"amplitude": amplitude}),
                representation=RepresentationEnum.WEIGHTED_PERTURBATION,
            )
            try:
                result = self.picard_mild_iteration(h0, t_end=t_end, guard=False)
                residuals = [iterate.residual for iterate in result.iterates]
                rows.append({"amplitude": amplitude, "converged": True, "residuals": residuals})
            except NonContractive as error:
                logger.warning("Amplitude %.3g is not contractive: %s", amplitude, error)
                rows.append({"amplitude": amplitude, "converged": False, "residuals": error.residuals})
                threshold = amplitude if threshold is None else threshold

        return {"threshold": threshold, "rows": rows}

    def run_simulation(
        self,
        F0: DistributionField,
        on_snapshot: Optional[SnapshotCallback] = None,
        on_output: Optional[SnapshotCallback] = None,
    ) -> DiagnosticsSeries:
        """Advance F0 to t_end and record diagnostics every output interval.

        on_output sees the state at every diagnostics output, on_snapshot every snapshot_every steps.
        """
        scheme = self.scheme
        if F0.values.min() < -POSITIVITY_TOLERANCE:
            raise NegativeInput(f"F0 reaches {F0.values.min():.3e} below zero")

        series = DiagnosticsSeries(
            metadata={
                "scenario_hash": self.context.scenario.content_hash(),
                "seed": str(self.context.seed),
                "mode": scheme.mode.value,
                "cfl": f"{self.transport.cfl_number(scheme.dt):.6g}",
            }
        )
        snapshot_every = self.context.scenario.output.snapshot_every

        match scheme.mode:
            case SimulationModeEnum.NONLINEAR:
                state = F0

                def advance(current: DistributionField) -> DistributionField:
                    return self.positivity_step(current)

            case SimulationModeEnum.LINEAR:
                state = self.as_perturbation(F0)
                rate = self.rate(scheme.damping, frozen=state)

                def advance(current: DistributionField) -> DistributionField:
                    return current.with_values(
                        self.transport.step(current.values, current.representation, scheme.dt, rate)
                    )

        strict = scheme.mode == SimulationModeEnum.NONLINEAR
        self.diagnostics.record(series, 0.0, state, strict=strict)
        if on_output is not None:
            on_output(0, 0.0, state)
        logger.info("Simulation: %d steps of %g, CFL %s", scheme.n_steps, scheme.dt, series.metadata["cfl"])

        for step in range(1, scheme.n_steps + 1):
            state = advance(state)
            t = step * scheme.dt
            if step % scheme.output_every == 0 or step == scheme.n_steps:
                self.diagnostics.record(series, t, state, strict=strict)
                if on_output is not None:
                    on_output(step, t, state)
            if on_snapshot is not None and snapshot_every and step % snapshot_every == 0:
                on_snapshot(step, t, state)

        return series
