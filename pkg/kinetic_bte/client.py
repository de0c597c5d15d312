"""Client facade of the kinetic solver."""

import logging

from os import environ
from typing import Optional

from dotenv import load_dotenv

from .characteristics import Characteristics
from .context import KineticContext
from .diagnostics import Diagnostics
from .fields import PotentialField
from .geometry import LevelSetDomain
from .models.scenario import Scenario
from .solver import Solver


load_dotenv()

logger = logging.getLogger(__name__)


class KineticClient:
    """Client facade of the kinetic solver."""

    def __init__(
        self,
        scenario: Optional[Scenario] = None,
        workers: Optional[int] = None,
        seed: Optional[int] = None,
        domain: Optional[LevelSetDomain] = None,
        potential: Optional[PotentialField] = None,
    ) -> None:
        """Init the Client."""
        self.scenario = scenario or Scenario()
        self.workers = workers or int(environ.get("KINETIC_BTE_WORKERS", "1"))
        if self.workers < 1:
            raise ValueError("KINETIC_BTE_WORKERS must be a positive integer")

        self.context = KineticContext(
            self.scenario,
            workers=self.workers,
            seed=seed,
            domain=domain,
            potential=potential,
        )

        self.characteristics = Characteristics(
            self.context.domain,
            self.context.potential,
            settings=self.scenario.characteristics,
            workers=self.workers,
        )

        self.collision = self.context.collision

        self.diagnostics = Diagnostics(self.context)

        self.solver = Solver(
            self.context,
            characteristics=self.characteristics,
            diagnostics=self.diagnostics,
        )

        logger.info("Scenario %s, seed %d, %d workers", self.scenario.content_hash(), self.context.seed, self.workers)

    @property
    def domain(self) -> LevelSetDomain:
        """Return the spatial domain."""
        return self.context.domain

    @property
    def potential(self) -> PotentialField:
        """Return the external potential."""
        return self.context.potential
