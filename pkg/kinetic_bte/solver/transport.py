"""Semi-Lagrangian transport with diffuse reflection."""

import logging
import math

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Tuple

import numpy as np

from scipy import integrate

from ..characteristics import Characteristics
from ..context import KineticContext
from ..fields import global_maxwellian, weight_w
from ..models.solver import RepresentationEnum
from .field import PhaseSpaceInterpolator


logger = logging.getLogger(__name__)

PAIR_CHUNK = 1 << 14
TRACE_ELEMENTS = 1 << 22

Rate = Callable[[np.ndarray, np.ndarray], np.ndarray]


class SemiLagrangianTransport:
    """Backward characteristic tracing of node values over one step."""

    def __init__(
        self,
        context: KineticContext,
        characteristics: Characteristics,
        order: Optional[int] = None,
    ) -> None:
        """Init."""
        self.context = context
        self.characteristics = characteristics
        self.layer: Optional[np.ndarray] = None
        self.layer_factor = 1.0
        self.interpolator = PhaseSpaceInterpolator(
            context.spatial_grid,
            context.velocity_grid,
            order=order or context.scheme.interpolation_order,
        )

    def substeps(self, dt: float) -> int:
        """Return the integrator substeps of one transport step, half a cell per substep."""
        fastest = self.context.velocity_grid.cutoff * math.sqrt(3.0)
        return max(1, math.ceil(dt * fastest / (0.5 * self.context.spatial_grid.spacing)))

    def cfl_number(self, dt: float) -> float:
        """Return dt max|v| / dx."""
        return dt * self.context.velocity_grid.cutoff * math.sqrt(3.0) / self.context.spatial_grid.spacing

    def _table(self, values: np.ndarray, representation: RepresentationEnum) -> np.ndarray:
        # full F is interpolated relative to mu_E, which the flow preserves
        if representation == RepresentationEnum.FULL:
            return values / self.context.mu_e
        return values

    def _wall_values(
        self,
        table: np.ndarray,
        representation: RepresentationEnum,
        x_b: np.ndarray,
        v_b: np.ndarray,
    ) -> np.ndarray:
        """Return the diffuse closure at boundary points, in table units."""
        grid = self.context.velocity_grid
        result = np.empty(len(x_b))
        stencil = (self.interpolator.order + 1) ** 3
        step = max(1, TRACE_ELEMENTS // (len(grid) * stencil))

        for start in range(0, len(x_b), step):
            x = x_b[start:start + step]
            v = v_b[start:start + step]
            normals = self.context.domain.normals(x)
            flux = grid.outgoing_flux(normals)
            scale = grid.wall_normalizer(normals)
            trace = self.interpolator.trace(table, x)

            match representation:
                case RepresentationEnum.FULL:
                    # F / mu_E at the wall; exp(-Phi(x_b)) cancels
                    result[start:start + step] = scale * np.sum(trace * grid.mu * flux, axis=-1)
                case RepresentationEnum.WEIGHTED_PERTURBATION:
                    spec = self.context.scenario.weight
                    potential = self.context.potential
                    weight = weight_w(spec, potential, x[:, None, :], grid.nodes)
                    moment = np.sum(trace / weight * grid.sqrt_mu * flux, axis=-1)
                    incoming = weight_w(spec, potential, x, v) * np.sqrt(global_maxwellian(v))
                    result[start:start + step] = incoming * scale * moment

        return result

    def _step_chunk(
        self,
        pairs: np.ndarray,
        table: np.ndarray,
        representation: RepresentationEnum,
        dt: float,
        rate: Optional[Rate],
    ) -> Tuple[np.ndarray, np.ndarray]:
        spatial_index, velocity_index = np.divmod(pairs, len(self.context.velocity_grid))
        x = self.context.spatial_grid.nodes[spatial_index]
        v = self.context.velocity_grid.nodes[velocity_index]
        result = np.empty(len(pairs))
        spatial_grid = self.context.spatial_grid

        exit_time, exit_x, exit_v = self.characteristics.backward_exit_batch(x, v, max_time=dt)
        exited = np.isfinite(exit_time)
        # wall re-emissions, cut cells and ghost-borrowing departures form the boundary layer
        layer = exited | spatial_grid.cut[spatial_index]

        inner = ~exited
        if inner.any():
            n_sub = self.substeps(dt)
            xs, vs = self.characteristics.flow_batch(
                x[inner], v[inner], dt, 0.0, step=dt / n_sub, record=True, check_domain=False
            )
            result[inner] = self.interpolator.evaluate(table, xs[-1], vs[-1])
            layer[inner] |= spatial_grid.reaches_exterior(xs[-1], self.interpolator.order)
            if rate is not None:
                path = rate(xs.reshape(-1, 3), vs.reshape(-1, 3)).reshape(len(xs), -1)
                result[inner] *= np.exp(-integrate.trapezoid(path, dx=dt / (len(xs) - 1), axis=0))

        if exited.any():
            result[exited] = self._wall_values(table, representation, exit_x[exited], exit_v[exited])
            if rate is not None:
                ends = rate(x[exited], v[exited]) + rate(exit_x[exited], exit_v[exited])
                result[exited] *= np.exp(-0.5 * exit_time[exited] * ends)

        return result, layer

    def step(
        self,
        values: np.ndarray,
        representation: RepresentationEnum,
        dt: float,
        rate: Optional[Rate] = None,
    ) -> np.ndarray:
        """Transport (N_x, N_v) node values over dt, damped by exp(-int rate) along the traced paths.

        With boundary_balance, undamped full F keeps its mass: the defect of a step is carried by the
        boundary layer alone, and bulk pairs keep their interpolated values.
        """
        if dt <= 0:
            raise ValueError("dt must be positive")

        shape = (len(self.context.spatial_grid), len(self.context.velocity_grid))
        table = self._table(np.asarray(values, dtype=float), representation)
        count = shape[0] * shape[1]
        ranges = [np.arange(start, min(start + PAIR_CHUNK, count)) for start in range(0, count, PAIR_CHUNK)]

        with ThreadPoolExecutor(max_workers=self.context.workers) as executor:
            parts = list(executor.map(lambda pairs: self._step_chunk(pairs, table, representation, dt, rate), ranges))

        result = np.concatenate([part[0] for part in parts]).reshape(shape)
        self.layer = np.concatenate([part[1] for part in parts]).reshape(shape)
        self.layer_factor = 1.0

        if representation == RepresentationEnum.FULL:
            result = result * self.context.mu_e
            if self.context.scheme.interpolation_order == 3:
                result = np.maximum(result, 0.0)
            if rate is None:
                if self.context.scheme.boundary_balance:
                    result = self._balance_layer(values, result)
                if self.context.scheme.mass_fix:
                    result = self._fix_mass(values, result)

        return result

    def _weights(self) -> np.ndarray:
        return self.context.spatial_grid.weights[:, None] * self.context.velocity_grid.weights[None, :]

    def _balance_layer(self, before: np.ndarray, after: np.ndarray) -> np.ndarray:
        weights = self._weights()
        carried = float(np.sum(np.where(self.layer, after, 0.0) * weights))
        owed = float(np.sum(before * weights)) - float(np.sum(np.where(self.layer, 0.0, after) * weights))
        if carried <= 0 or owed <= 0:
            return after

        self.layer_factor = owed / carried
        logger.debug("Boundary layer factor %.6f over %d pairs", self.layer_factor, int(self.layer.sum()))
        return np.where(self.layer, after * self.layer_factor, after)

    def _fix_mass(self, before: np.ndarray, after: np.ndarray) -> np.ndarray:
        weights = self._weights()
        initial, current = float(np.sum(before * weights)), float(np.sum(after * weights))
        if current <= 0:
            return after

        logger.debug("Mass fix factor %.3e", initial / current - 1.0)
        return after * (initial / current)
