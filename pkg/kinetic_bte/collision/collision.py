"""Collision operators on the velocity grid."""

import logging
import math

from functools import cached_property
from typing import Iterator, List, NamedTuple, Optional, Tuple

import numpy as np

from scipy import linalg, stats

from ..fields import PotentialField, global_maxwellian, weight_w
from ..geometry import tangent_frame
from ..models.collision import KernelSpec, LinearOperatorMatrix
from ..models.fields import WeightSpec
from .grid import VelocityGrid
from .moments import invariant_basis


logger = logging.getLogger(__name__)

CHUNK_ELEMENTS = 1 << 22
STENCIL_CACHE_LIMIT = 1 << 24
FREQUENCY_CACHE_LIMIT = 4096


class CollisionChunk(NamedTuple):
    """Post-collision stencils of a block of output nodes."""

    rows: np.ndarray
    coefficient: np.ndarray
    index_v: np.ndarray
    weight_v: np.ndarray
    index_u: np.ndarray
    weight_u: np.ndarray
    sqrt_mu_v: np.ndarray
    sqrt_mu_u: np.ndarray


class CollisionOperator:
    """Gain, loss, frequency and linearized operators of a cutoff hard-potential kernel."""

    def __init__(
        self,
        grid: VelocityGrid,
        kernel: Optional[KernelSpec] = None,
    ) -> None:
        """Init."""
        self.grid = grid
        self.kernel = kernel or KernelSpec()

        # Gauss-Legendre in cos(theta) on (0, 1), doubled by the omega -> -omega symmetry, uniform azimuth
        nodes, weights = np.polynomial.legendre.leggauss(self.kernel.n_polar)
        cosines = 0.5 * (nodes + 1.0)
        polar_weights = weights * self.kernel.angular_constant * cosines
        azimuth = 2.0 * math.pi * (np.arange(self.kernel.n_azimuth) + 0.5) / self.kernel.n_azimuth

        self.cosines = np.repeat(cosines, self.kernel.n_azimuth)
        self.azimuth = np.tile(azimuth, self.kernel.n_polar)
        azimuth_weight = 2.0 * math.pi / self.kernel.n_azimuth
        self.angular_weights = np.repeat(polar_weights, self.kernel.n_azimuth) * azimuth_weight
        self.angular_total = float(self.angular_weights.sum())

        self._cache: Optional[List[CollisionChunk]] = None

    @property
    def n_directions(self) -> int:
        """Return the number of sphere directions per pair."""
        return len(self.cosines)

    def _rows_per_chunk(self) -> int:
        return max(1, CHUNK_ELEMENTS // (len(self.grid) * self.n_directions * 8))

    def _build_chunk(self, rows: np.ndarray) -> CollisionChunk:
        nodes = self.grid.nodes
        relative = nodes[rows][:, None, :] - nodes[None, :, :]
        speed = np.linalg.norm(relative, axis=-1)

        axis = np.zeros_like(relative)
        axis[..., 2] = 1.0
        moving = speed > 0
        axis[moving] = relative[moving] / speed[moving][:, None]
        first, second = tangent_frame(axis.reshape(-1, 3))
        first = first.reshape(axis.shape)
        second = second.reshape(axis.shape)

        sines = np.sqrt(1.0 - self.cosines**2)
        omega = (
            self.cosines[:, None] * axis[:, :, None, :]
            + (sines * np.cos(self.azimuth))[:, None] * first[:, :, None, :]
            + (sines * np.sin(self.azimuth))[:, None] * second[:, :, None, :]
        )
        shift = (speed[..., None] * self.cosines)[..., None] * omega
        post_v = (nodes[rows][:, None, None, :] - shift).reshape(-1, 3)
        post_u = (nodes[None, :, None, :] + shift).reshape(-1, 3)

        coefficient = (
            self.grid.cell_weight
            * speed[..., None] ** self.kernel.gamma
            * self.angular_weights
            * self.grid.sqrt_mu[None, :, None]
        )
        index_v, weight_v = self.grid.stencil(post_v)
        index_u, weight_u = self.grid.stencil(post_u)

        return CollisionChunk(
            rows=rows,
            coefficient=coefficient.reshape(len(rows), -1),
            index_v=index_v,
            weight_v=weight_v,
            index_u=index_u,
            weight_u=weight_u,
            sqrt_mu_v=np.sqrt(global_maxwellian(post_v)),
            sqrt_mu_u=np.sqrt(global_maxwellian(post_u)),
        )

    def chunks(self) -> Iterator[CollisionChunk]:
        """Yield post-collision stencils block by block, cached when they fit in memory."""
        if self._cache is not None:
            yield from self._cache
            return

        count = len(self.grid)
        step = self._rows_per_chunk()
        cacheable = count * count * self.n_directions * 8 <= STENCIL_CACHE_LIMIT
        built = []
        for start in range(0, count, step):
            chunk = self._build_chunk(np.arange(start, min(start + step, count)))
            if cacheable:
                built.append(chunk)
            yield chunk

        if cacheable:
            self._cache = built

    def _frequency_rows(self, velocities: np.ndarray) -> np.ndarray:
        distance = np.linalg.norm(velocities[:, None, :] - self.grid.nodes[None, :, :], axis=-1)
        return self.grid.weights * distance**self.kernel.gamma * self.angular_total

    @cached_property
    def frequency_matrix(self) -> Optional[np.ndarray]:
        """Return the dense map F -> nu(F) when it fits in memory."""
        if len(self.grid) > FREQUENCY_CACHE_LIMIT:
            return None
        return self._frequency_rows(self.grid.nodes)

    def frequency_of(self, values: np.ndarray) -> np.ndarray:
        """Return nu(F)(v) = int int B F(u) dw du along the last axis."""
        values = np.asarray(values, dtype=float)
        flat = values.reshape(-1, len(self.grid))
        if self.frequency_matrix is not None:
            return (flat @ self.frequency_matrix.T).reshape(values.shape)

        result = np.empty_like(flat)
        step = max(1, CHUNK_ELEMENTS // len(self.grid))
        for start in range(0, len(self.grid), step):
            rows = self._frequency_rows(self.grid.nodes[start:start + step])
            result[:, start:start + step] = flat @ rows.T

        return result.reshape(values.shape)

    @cached_property
    def nu(self) -> np.ndarray:
        """Return the collision frequency at the nodes."""
        return self.frequency_of(self.grid.mu)

    @property
    def nu0(self) -> float:
        """Return the smallest nodal collision frequency."""
        return float(self.nu.min())

    def collision_frequency(self, v: Optional[np.ndarray] = None) -> np.ndarray:
        """Return nu at the nodes, or at arbitrary (P, 3) velocities."""
        if v is None:
            return self.nu

        points = np.atleast_2d(np.asarray(v, dtype=float))
        result = np.empty(len(points))
        step = max(1, CHUNK_ELEMENTS // len(self.grid))
        for start in range(0, len(points), step):
            result[start:start + step] = self._frequency_rows(points[start:start + step]) @ self.grid.mu

        return result

    def frequency_bounds(self) -> Tuple[float, float]:
        """Return the fitted c1, c2 with c1 (1 + |v|)^gamma <= nu(v) <= c2 (1 + |v|)^gamma over the nodes."""
        ratio = self.nu / (1.0 + self.grid.speeds) ** self.kernel.gamma
        return float(ratio.min()), float(ratio.max())

    def _interpolate(self, values: np.ndarray, index: np.ndarray, weights: np.ndarray) -> np.ndarray:
        return np.einsum("bmk,mk->bm", values[:, index], weights)

    def _gain_sum(self, first: np.ndarray, second: np.ndarray, ratio: bool) -> np.ndarray:
        """Return sum_jq W_ijq sqrt(mu(u_j)) I(first)(u') I(second)(v') for (B, N_v) inputs.

        With ratio set, the extra factor sqrt(mu_j) turns the sum into the Q+ kernel on F / mu.
        """
        batch = len(first)
        result = np.zeros_like(first)
        for chunk in self.chunks():
            coefficient = chunk.coefficient
            if ratio:
                coefficient = (coefficient.reshape(len(chunk.rows), len(self.grid), -1) * self.grid.sqrt_mu[:, None])
                coefficient = coefficient.reshape(len(chunk.rows), -1)

            step = max(1, CHUNK_ELEMENTS // chunk.index_v.size)
            for start in range(0, batch, step):
                at_u = self._interpolate(first[start:start + step], chunk.index_u, chunk.weight_u)
                at_v = self._interpolate(second[start:start + step], chunk.index_v, chunk.weight_v)
                product = (at_u * at_v).reshape(len(at_u), len(chunk.rows), -1) * coefficient
                result[start:start + step, chunk.rows] = product.sum(axis=-1)

        return result

    def conservative_correction(self, values: np.ndarray) -> np.ndarray:
        """Return the Maxwellian-weighted correction removing the five collision-invariant moments."""
        invariants = self.grid.invariants()
        weighted = invariants * (self.grid.weights * self.grid.mu)[:, None]
        gram = invariants.T @ weighted
        moments = values @ (invariants * self.grid.weights[:, None])
        multipliers = linalg.solve(gram, moments.T, assume_a="pos").T

        return (multipliers @ invariants.T) * self.grid.mu

    def q_gain(self, first: np.ndarray, second: np.ndarray, symmetrized: bool = False) -> np.ndarray:
        """Return Q+(F1, F2) = int int B F1(u') F2(v') along the last axis."""
        first = np.asarray(first, dtype=float)
        shape = first.shape
        f1 = first.reshape(-1, len(self.grid))
        f2 = np.asarray(second, dtype=float).reshape(-1, len(self.grid))

        gain = self.grid.mu * self._gain_sum(f1 / self.grid.mu, f2 / self.grid.mu, ratio=True)
        if symmetrized:
            gain = gain - self.conservative_correction(gain - self.q_loss(f1, f2))

        return gain.reshape(shape)

    def q_loss(self, first: np.ndarray, second: np.ndarray) -> np.ndarray:
        """Return Q-(F1, F2) = F2(v) nu(F1)(v)."""
        return np.asarray(second, dtype=float) * self.frequency_of(first)

    def collision(self, first: np.ndarray, second: np.ndarray, symmetrized: bool = False) -> np.ndarray:
        """Return Q(F1, F2) = Q+ - Q-."""
        return self.q_gain(first, second, symmetrized=symmetrized) - self.q_loss(first, second)

    def gamma_plus(self, first: np.ndarray, second: np.ndarray) -> np.ndarray:
        """Return Gamma+(f1, f2) = int int B sqrt(mu(u)) f1(u') f2(v')."""
        first = np.asarray(first, dtype=float)
        shape = first.shape
        f1 = first.reshape(-1, len(self.grid))
        f2 = np.asarray(second, dtype=float).reshape(-1, len(self.grid))

        return self._gain_sum(f1, f2, ratio=False).reshape(shape)

    def gamma_minus(self, first: np.ndarray, second: np.ndarray) -> np.ndarray:
        """Return Gamma-(f1, f2) = f2 nu(sqrt(mu) f1)."""
        return np.asarray(second, dtype=float) * self.frequency_of(self.grid.sqrt_mu * np.asarray(first, dtype=float))

    def gamma_nonlinear(self, first: np.ndarray, second: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return Gamma(f1, f2) with its gain and loss parts."""
        plus = self.gamma_plus(first, second)
        minus = self.gamma_minus(first, second)

        return plus - minus, plus, minus

    def r_of_f(self, potential: PotentialField, x: np.ndarray, f: np.ndarray) -> np.ndarray:
        """Return R(f)(x, v) = int int B [mu_E + mu_E^(1/2) f](x, u) at every node v."""
        scale = np.exp(-potential.phi(np.asarray(x, dtype=float)))[..., None]
        return self.frequency_of(scale * self.grid.mu + np.sqrt(scale) * self.grid.sqrt_mu * f)

    @cached_property
    def raw_linearized(self) -> np.ndarray:
        """Return L = nu - K straight from the sphere quadrature, before any symmetrization."""
        count = len(self.grid)
        sqrt_mu = self.grid.sqrt_mu
        gain = np.zeros((count, count))

        for chunk in self.chunks():
            rows = len(chunk.rows)
            local = np.repeat(np.arange(rows), chunk.coefficient.shape[1])[:, None] * count
            for index, weights, partner in (
                (chunk.index_v, chunk.weight_v, chunk.sqrt_mu_u),
                (chunk.index_u, chunk.weight_u, chunk.sqrt_mu_v),
            ):
                scaled = (chunk.coefficient.reshape(-1) * partner)[:, None] * weights
                block = np.bincount((local + index).ravel(), weights=scaled.ravel(), minlength=rows * count)
                gain[chunk.rows] += block.reshape(rows, count)

        frequency = self.frequency_matrix
        if frequency is None:
            frequency = self._frequency_rows(self.grid.nodes)
        loss = sqrt_mu[:, None] * frequency * sqrt_mu[None, :]

        return np.diag(self.nu) + loss - gain

    def assemble_linearized(self, symmetrized: bool = True) -> LinearOperatorMatrix:
        """Assemble L = nu - K as a dense matrix on node values.

        The symmetrized operator is the symmetric part of the raw one, compressed off the collision invariants.
        """
        count = len(self.grid)
        operator = self.raw_linearized
        if symmetrized:
            operator = 0.5 * (operator + operator.T)
            basis = invariant_basis(self.grid)
            projector = np.eye(count) - basis @ basis.T
            operator = projector @ operator @ projector

        logger.info("Assembled linearized operator on %d nodes, nu0 = %.6g", count, self.nu0)

        return LinearOperatorMatrix(
            nu=self.nu.copy(),
            K=np.diag(self.nu) - operator,
            nu0=self.nu0,
            cell_weight=self.grid.cell_weight,
        )

    def apply_Kw(
        self,
        operator: LinearOperatorMatrix,
        weight_spec: WeightSpec,
        potential: PotentialField,
        x: np.ndarray,
        h: np.ndarray,
        weight: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """Return K_w h = w K(h / w) at fixed x; an explicit weight vector overrides w(x, .)."""
        if weight is None:
            weight = weight_w(weight_spec, potential, np.asarray(x, dtype=float)[..., None, :], self.grid.nodes)

        return weight * ((np.asarray(h, dtype=float) / weight) @ operator.K.T)

    def weighted_kernel(
        self,
        operator: LinearOperatorMatrix,
        weight_spec: WeightSpec,
        potential: PotentialField,
        x: np.ndarray,
    ) -> np.ndarray:
        """Return k_w(v, u) = k(v, u) w(x, v) / w(x, u) as a node matrix."""
        weight = weight_w(weight_spec, potential, np.asarray(x, dtype=float), self.grid.nodes)
        return operator.K * weight[:, None] / weight[None, :]

    def kernel_decay_fit(
        self,
        operator: LinearOperatorMatrix,
        weight_spec: WeightSpec,
        potential: PotentialField,
        x: np.ndarray,
        alpha: float = 1.0,
    ) -> dict:
        """Fit sum_u |k_w(v, u)| (1 + |u|)^-alpha against (1 + |v|) on a log-log scale."""
        kernel = self.weighted_kernel(operator, weight_spec, potential, x)
        sums = np.abs(kernel) @ (1.0 + self.grid.speeds) ** -alpha
        inner = self.grid.speeds <= 0.75 * self.grid.cutoff
        fit = stats.linregress(np.log1p(self.grid.speeds[inner]), np.log(sums[inner]))

        return {
            "alpha": alpha,
            "exponent": float(fit.slope),
            "log_constant": float(fit.intercept),
            "r_squared": float(fit.rvalue**2),
        }
