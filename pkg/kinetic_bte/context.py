"""Numerical context shared by the services."""

import logging

from functools import cached_property
from typing import Optional

import numpy as np

from .collision import CollisionOperator, VelocityGrid
from .fields import PotentialField, local_maxwellian, weight_w
from .geometry import LevelSetDomain, SpatialGrid
from .models.collision import LinearOperatorMatrix
from .models.scenario import Scenario


logger = logging.getLogger(__name__)


class KineticContext:
    """Domain, potential, grids and operators of one scenario."""

    def __init__(
        self,
        scenario: Scenario,
        workers: int = 1,
        seed: Optional[int] = None,
        domain: Optional[LevelSetDomain] = None,
        potential: Optional[PotentialField] = None,
    ) -> None:
        """Init."""
        self.scenario = scenario
        self.workers = max(1, workers)
        self.seed = scenario.seed if seed is None else seed

        self.domain = domain or LevelSetDomain.from_spec(scenario.domain)
        self.potential = potential or PotentialField.from_spec(scenario.potential, self.domain)
        self.velocity_grid = VelocityGrid.from_spec(scenario.velocity_grid)
        self.spatial_grid = SpatialGrid(
            self.domain,
            points_per_axis=scenario.spatial_grid.points_per_axis,
            subsamples=scenario.spatial_grid.subsamples,
        )
        self.collision = CollisionOperator(self.velocity_grid, scenario.kernel)

        logger.info(
            "Context: %d spatial x %d velocity nodes, %d sphere directions",
            len(self.spatial_grid),
            len(self.velocity_grid),
            self.collision.n_directions,
        )

    @property
    def scheme(self):
        """Return the scheme config."""
        return self.scenario.scheme

    @property
    def scheme_seed(self) -> int:
        """Return the seed of random initial data."""
        return self.seed if self.scheme.seed is None else self.scheme.seed

    @cached_property
    def phi_nodes(self) -> np.ndarray:
        """Return Phi at the spatial nodes."""
        return self.potential.phi(self.spatial_grid.nodes)

    @cached_property
    def mu_e(self) -> np.ndarray:
        """Return mu_E on the phase-space nodes."""
        return local_maxwellian(self.potential, self.spatial_grid.nodes[:, None, :], self.velocity_grid.nodes)

    @cached_property
    def weight(self) -> np.ndarray:
        """Return w on the phase-space nodes."""
        return weight_w(
            self.scenario.weight,
            self.potential,
            self.spatial_grid.nodes[:, None, :],
            self.velocity_grid.nodes,
        )

    @cached_property
    def linear_operator(self) -> LinearOperatorMatrix:
        """Return the assembled symmetrized linearized operator."""
        return self.collision.assemble_linearized(symmetrized=True)

    @cached_property
    def raw_linear_operator(self) -> LinearOperatorMatrix:
        """Return the linearized operator as the quadrature gives it."""
        return self.collision.assemble_linearized(symmetrized=False)

    def perturbation_of(self, full: np.ndarray) -> np.ndarray:
        """Return h = w (F - mu_E) / sqrt(mu_E)."""
        return self.weight * (full - self.mu_e) / np.sqrt(self.mu_e)

    def full_of(self, perturbation: np.ndarray) -> np.ndarray:
        """Return F = mu_E + sqrt(mu_E) h / w."""
        return self.mu_e + np.sqrt(self.mu_e) * perturbation / self.weight
