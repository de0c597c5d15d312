"""Hamiltonian characteristics and back-time cycles."""

import logging
import math

from concurrent.futures import ThreadPoolExecutor
from typing import Annotated, Iterable, List, Optional, Tuple

import numpy as np

from pydantic import Field

from ..errors import ExitNotFound, LeftDomain
from ..fields import PotentialField
from ..geometry import LevelSetDomain, tangent_frame
from ..models.characteristics import (
    BackTimeCycle,
    CharacteristicsSettings,
    CycleRecord,
    CycleTerminalEnum,
    ExitSchema,
    JacobianState,
    PhasePoint,
    ProbabilityEstimate,
)


logger = logging.getLogger(__name__)

TINY_SPEED = 1e-12


def task_generator(seed: int, task: int) -> np.random.Generator:
    """Return the counter-based stream of one sampling task."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, task])))


def sample_diffuse_batch(rng: np.random.Generator, normals: np.ndarray) -> np.ndarray:
    """Draw one velocity per normal from c_mu mu(v) (n.v) on the half space n.v > 0."""
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    count = len(normals)
    tangential = rng.standard_normal((count, 2))
    uniform = rng.random(count)
    normal = np.maximum(np.sqrt(-2.0 * np.log1p(-uniform)), np.finfo(float).tiny)
    first, second = tangent_frame(normals)

    return normal[:, None] * normals + tangential[:, :1] * first + tangential[:, 1:] * second


class Characteristics:
    """Characteristics."""

    def __init__(
        self,
        domain: LevelSetDomain,
        potential: PotentialField,
        settings: Optional[CharacteristicsSettings] = None,
        workers: int = 1,
    ) -> None:
        """Init."""
        self.domain = domain
        self.potential = potential
        self.settings = settings or CharacteristicsSettings()
        self.workers = max(1, workers)

    def _acceleration(self, x: np.ndarray) -> np.ndarray:
        if self.potential.is_zero:
            return np.zeros_like(x)
        return -self.potential.grad(x)

    def crossing_time(self, speed: np.ndarray) -> np.ndarray:
        """Return the domain crossing time 2R / speed, with the potential's escape speed as a floor."""
        floor = max(math.sqrt(2.0 * self.potential.sup_norm), TINY_SPEED)
        return 2.0 * self.domain.bounding_radius / np.maximum(speed, floor)

    def default_step(self, v: np.ndarray) -> np.ndarray:
        """Return the default integrator step for velocities (..., 3)."""
        return self.settings.step_fraction * self.crossing_time(np.linalg.norm(v, axis=-1))

    def _check_inside(self, x: np.ndarray) -> None:
        if np.any(self.domain.level(x) > self.domain.band_tolerance):
            raise LeftDomain("the characteristic left the domain, use backward_exit instead")

    def flow_batch(
        self,
        x: np.ndarray,
        v: np.ndarray,
        t: float,
        s: float,
        step: Optional[float] = None,
        record: bool = False,
        check_domain: bool = True,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Integrate (P, 3) phase points backward from t to s with velocity Verlet.

        With record set, returns the full paths of shape (n + 1, P, 3).
        """
        if s > t:
            raise ValueError("flow runs backward in time, s must not exceed t")

        x = np.atleast_2d(np.asarray(x, dtype=float)).copy()
        v = np.atleast_2d(np.asarray(v, dtype=float)).copy()
        duration = t - s
        step = float(np.min(self.default_step(v))) if step is None else step
        n_steps = max(1, math.ceil(duration / step)) if duration > 0 else 0
        dt = -duration / n_steps if n_steps else 0.0

        xs, vs = [x.copy()], [v.copy()]
        acceleration = self._acceleration(x)
        for _ in range(n_steps):
            half = v + 0.5 * dt * acceleration
            x = x + dt * half
            acceleration = self._acceleration(x)
            v = half + 0.5 * dt * acceleration
            if check_domain:
                self._check_inside(x)
            if record:
                xs.append(x)
                vs.append(v)

        if record:
            return np.stack(xs), np.stack(vs)
        return x, v

    def flow(
        self,
        start: PhasePoint,
        t: Annotated[float, Field(description="Start time.")],
        s: Annotated[float, Field(description="Target time, s <= t.")],
        step: Annotated[Optional[float], Field(description="Integrator step.", gt=0)] = None,
    ) -> PhasePoint:
        """Integrate the Hamiltonian flow backward from (t, start) to s."""
        x, v = self.flow_batch(np.asarray([start.x]), np.asarray([start.v]), t, s, step)

        return PhasePoint(x=tuple(x[0]), v=tuple(v[0]))

    def jacobian_flow(
        self,
        start: PhasePoint,
        t: Annotated[float, Field(description="Start time.")],
        s: Annotated[float, Field(description="Target time, s <= t.")],
        step: Annotated[Optional[float], Field(description="Integrator step.", gt=0)] = None,
    ) -> JacobianState:
        """Integrate dX/dv and dV/dv alongside the flow, using the tangent map of the Verlet step."""
        if s > t:
            raise ValueError("flow runs backward in time, s must not exceed t")

        x = np.asarray(start.x, dtype=float)
        v = np.asarray(start.v, dtype=float)
        dxdv = np.zeros((3, 3))
        dvdv = np.eye(3)

        duration = t - s
        step = float(self.default_step(v)) if step is None else step
        n_steps = max(1, math.ceil(duration / step)) if duration > 0 else 0
        dt = -duration / n_steps if n_steps else 0.0

        acceleration = self._acceleration(x)
        hessian = self.potential.hessian(x)
        for _ in range(n_steps):
            half = v + 0.5 * dt * acceleration
            dvdv_half = dvdv - 0.5 * dt * hessian @ dxdv
            x = x + dt * half
            dxdv = dxdv + dt * dvdv_half
            acceleration = self._acceleration(x)
            hessian = self.potential.hessian(x)
            v = half + 0.5 * dt * acceleration
            dvdv = dvdv_half - 0.5 * dt * hessian @ dxdv
            self._check_inside(x)

        return JacobianState(dXdv=dxdv, dVdv=dvdv, det=float(np.linalg.det(dxdv)))

    def backward_exit_batch(
        self,
        x: np.ndarray,
        v: np.ndarray,
        max_time: Optional[np.ndarray] = None,
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Trace (P, 3) phase points backward to the boundary.

        Returns t_b, x_b and v_b. With max_time, traces stop once they exceed it and report t_b = inf.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float)).copy()
        v = np.atleast_2d(np.asarray(v, dtype=float)).copy()
        count = len(x)
        band = self.domain.band_tolerance

        speed = np.linalg.norm(v, axis=-1)
        acceleration = self._acceleration(x)
        stationary = (speed == 0) & (np.linalg.norm(acceleration, axis=-1) == 0)
        if stationary.any():
            raise ExitNotFound("a phase point at rest in a force-free region never reaches the boundary")

        crossing = self.crossing_time(speed)
        step = self.settings.step_fraction * crossing
        horizon = self.settings.horizon_crossings * crossing
        deadline = np.full(count, np.inf) if max_time is None else np.broadcast_to(max_time, (count,)).astype(float)
        limit = np.minimum(deadline, horizon)

        # starts in the boundary band move inward so the last interior moment exists
        level = self.domain.level(x)
        if np.any(level > band):
            raise ValueError("backward exits start inside the closed domain")
        near = level >= -band
        if near.any():
            x[near] -= band * self.domain.normals(x[near])
            acceleration[near] = self._acceleration(x[near])

        exit_time = np.full(count, np.inf)
        exit_x = np.full((count, 3), np.nan)
        exit_v = np.full((count, 3), np.nan)
        elapsed = np.zeros(count)
        active = np.ones(count, dtype=bool)

        while active.any():
            index = np.flatnonzero(active)
            dt = -step[index][:, None]
            half = v[index] + 0.5 * dt * acceleration[index]
            moved = x[index] + dt * half

            out = self.domain.level(moved) >= 0
            if out.any():
                hit = index[out]
                tau = np.nan_to_num(self.domain.crossing_parameters(x[hit], moved[out]), nan=1.0)
                boundary = x[hit] + tau[:, None] * dt[out] * half[out]
                reached = np.maximum(elapsed[hit] + tau * step[hit], band / np.maximum(speed[hit], TINY_SPEED))
                # exits past the deadline stay reported as interior
                within = reached <= deadline[hit]
                exit_x[hit[within]] = boundary[within]
                exit_v[hit[within]] = (
                    half[out][within]
                    + (tau[within] - 0.5)[:, None] * dt[out][within] * self._acceleration(boundary[within])
                )
                exit_time[hit[within]] = reached[within]
                active[hit] = False

            stay = index[~out]
            if len(stay):
                new_acceleration = self._acceleration(moved[~out])
                x[stay] = moved[~out]
                v[stay] = half[~out] + 0.5 * dt[~out] * new_acceleration
                acceleration[stay] = new_acceleration
                elapsed[stay] += step[stay]

                stopped = stay[elapsed[stay] >= limit[stay]]
                if len(stopped):
                    trapped = stopped[horizon[stopped] < deadline[stopped]]
                    if len(trapped):
                        raise ExitNotFound(
                            f"{len(trapped)} trajectories stayed inside for {self.settings.horizon_crossings:g} "
                            "crossing times"
                        )
                    active[stopped] = False

        return exit_time, exit_x, exit_v

    def backward_exit(self, start: PhasePoint) -> ExitSchema:
        """Return the backward exit time, position and velocity of a phase point."""
        exit_time, exit_x, exit_v = self.backward_exit_batch(np.asarray([start.x]), np.asarray([start.v]))

        return ExitSchema(t_b=float(exit_time[0]), x_b=tuple(exit_x[0]), v_b=tuple(exit_v[0]))

    def sample_diffuse_velocity(
        self,
        rng: np.random.Generator,
        n: Annotated[Tuple[float, float, float], Field(description="Outward unit normal.")],
    ) -> np.ndarray:
        """Draw a wall re-emission velocity with n.v > 0."""
        return sample_diffuse_batch(rng, np.asarray([n], dtype=float))[0]

    def build_back_cycle(
        self,
        rng: np.random.Generator,
        t: Annotated[float, Field(description="Current time.")],
        x: Annotated[Tuple[float, float, float], Field(description="Position.")],
        v: Annotated[Tuple[float, float, float], Field(description="Velocity.")],
        k_max: Annotated[int, Field(description="Maximum number of records.", ge=1)],
    ) -> BackTimeCycle:
        """Alternate backward exits and diffuse re-emissions until time 0 or k_max records."""
        position = np.asarray([x], dtype=float)
        velocity = np.asarray([v], dtype=float)
        remaining = t
        records: List[CycleRecord] = []

        for _ in range(k_max):
            exit_time, exit_x, _ = self.backward_exit_batch(position, velocity)
            remaining -= float(exit_time[0])
            velocity = sample_diffuse_batch(rng, self.domain.normals(exit_x))
            position = exit_x
            records.append(CycleRecord(t=remaining, x=tuple(exit_x[0]), v=tuple(velocity[0])))

            if remaining <= 0:
                return BackTimeCycle(records=records, terminal=CycleTerminalEnum.REACHED_INITIAL_TIME)

        return BackTimeCycle(records=records, terminal=CycleTerminalEnum.TRUNCATED)

    def _cycle_depths(self, task: int, size: int, seed: int, first_time: float, first_x: np.ndarray, k_max: int):
        rng = task_generator(seed, task)
        depth = np.full(size, 1 if first_time > 0 else 0, dtype=np.int64)
        remaining = np.full(size, first_time)
        position = np.repeat(first_x[None, :], size, axis=0)

        for k in range(2, k_max + 1):
            alive = np.flatnonzero(remaining > 0)
            if not len(alive):
                break
            velocity = sample_diffuse_batch(rng, self.domain.normals(position[alive]))
            exit_time, exit_x, _ = self.backward_exit_batch(position[alive], velocity, max_time=remaining[alive])
            remaining[alive] -= exit_time
            reached = np.isfinite(exit_time)
            position[alive[reached]] = exit_x[reached]
            depth[alive[remaining[alive] > 0]] = k

        return depth

    def cycle_reach_probabilities(
        self,
        t: Annotated[float, Field(description="Current time.", gt=0)],
        x: Annotated[Tuple[float, float, float], Field(description="Position.")],
        v: Annotated[Tuple[float, float, float], Field(description="Velocity.")],
        ks: Iterable[int],
        n_samples: Annotated[int, Field(description="Number of chains.", ge=100)] = 10000,
        seed: Annotated[int, Field(description="Master seed.", ge=0)] = 0,
    ) -> List[ProbabilityEstimate]:
        """Estimate P(t_k > 0) for every k from one set of paired chains."""
        ks = sorted(set(ks))
        if ks[0] < 2:
            raise ValueError("cycle indices start at 2")
        if n_samples < 100:
            raise ValueError("at least 100 samples are required")

        exit_time, exit_x, _ = self.backward_exit_batch(np.asarray([x], dtype=float), np.asarray([v], dtype=float))
        first_time = t - float(exit_time[0])

        size = self.settings.task_size
        sizes = [min(size, n_samples - start) for start in range(0, n_samples, size)]
        logger.info("Cycle statistics: %d chains in %d tasks on %d workers", n_samples, len(sizes), self.workers)

        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            depths = list(
                executor.map(
                    lambda task: self._cycle_depths(task, sizes[task], seed, first_time, exit_x[0], ks[-1]),
                    range(len(sizes)),
                )
            )
        depth = np.concatenate(depths)

        estimates = []
        for k in ks:
            p = float(np.mean(depth >= k))
            estimates.append(
                ProbabilityEstimate(
                    k=k,
                    estimate=p,
                    std_error=math.sqrt(p * (1.0 - p) / n_samples),
                    n_samples=n_samples,
                    seed=seed,
                )
            )

        return estimates

    def cycle_reach_probability(
        self,
        t: float,
        x: Tuple[float, float, float],
        v: Tuple[float, float, float],
        k: Annotated[int, Field(description="Cycle index.", ge=2)],
        n_samples: Annotated[int, Field(description="Number of chains.", ge=100)] = 10000,
        seed: int = 0,
    ) -> ProbabilityEstimate:
        """Estimate the probability that the k-th cycle time is still positive."""
        return self.cycle_reach_probabilities(t, x, v, [k], n_samples=n_samples, seed=seed)[0]
