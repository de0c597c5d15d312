"""Level-set domains."""

import logging
import math

from typing import Annotated, Callable, Optional, Tuple

import numpy as np

from pydantic import Field

from ..errors import DegenerateGradient, NoConvergence
from ..models.geometry import BoundaryClassEnum, DomainKindEnum, DomainSpec


logger = logging.getLogger(__name__)

VectorField = Callable[[np.ndarray], np.ndarray]

GRADIENT_FLOOR = 1e-12
POSITION_TOLERANCE = 1e-12
MAX_BISECTIONS = 200
FINITE_DIFFERENCE_STEP = 1e-6


class LevelSetDomain:
    """Bounded open set {xi < 0} with gradient access."""

    def __init__(
        self,
        level: VectorField,
        bounding_radius: float,
        gradient: Optional[VectorField] = None,
        kind: DomainKindEnum = DomainKindEnum.CUSTOM,
        center: Tuple[float, float, float] = (0.0, 0.0, 0.0),
        volume: Optional[float] = None,
        band_tolerance: float = 1e-9,
        grazing_tolerance: float = 1e-8,
    ) -> None:
        """Init."""
        self._level = level
        self._gradient = gradient
        self.bounding_radius = float(bounding_radius)
        self.kind = kind
        self.center = np.asarray(center, dtype=float)
        self.volume = volume
        self.band_tolerance = band_tolerance
        self.grazing_tolerance = grazing_tolerance

        if not self.level(self.center) < 0:
            raise ValueError("the domain center must lie inside the domain")

    @classmethod
    def ball(
        cls,
        radius: float = 1.0,
        center: Tuple[float, float, float] = (0.0, 0.0, 0.0),
        **tolerances: float,
    ) -> "LevelSetDomain":
        """Build the ball |x - c|^2 - r^2 < 0."""
        c = np.asarray(center, dtype=float)

        return cls(
            level=lambda x: np.sum((x - c) ** 2, axis=-1) - radius**2,
            gradient=lambda x: 2.0 * (x - c),
            bounding_radius=radius,
            kind=DomainKindEnum.BALL,
            center=center,
            volume=4.0 * math.pi * radius**3 / 3.0,
            **tolerances,
        )

    @classmethod
    def ellipsoid(
        cls,
        semi_axes: Tuple[float, float, float],
        center: Tuple[float, float, float] = (0.0, 0.0, 0.0),
        **tolerances: float,
    ) -> "LevelSetDomain":
        """Build the axis-aligned ellipsoid sum (x_i - c_i)^2 / a_i^2 - 1 < 0."""
        c = np.asarray(center, dtype=float)
        inverse = 1.0 / np.asarray(semi_axes, dtype=float) ** 2

        return cls(
            level=lambda x: np.sum((x - c) ** 2 * inverse, axis=-1) - 1.0,
            gradient=lambda x: 2.0 * (x - c) * inverse,
            bounding_radius=max(semi_axes),
            kind=DomainKindEnum.ELLIPSOID,
            center=center,
            volume=4.0 * math.pi * float(np.prod(semi_axes)) / 3.0,
            **tolerances,
        )

    @classmethod
    def from_spec(cls, spec: DomainSpec) -> "LevelSetDomain":
        """Build a domain from its scenario spec."""
        tolerances = {"band_tolerance": spec.band_tolerance, "grazing_tolerance": spec.grazing_tolerance}

        match spec.kind:
            case DomainKindEnum.BALL:
                return cls.ball(radius=spec.radius, center=spec.center, **tolerances)
            case DomainKindEnum.ELLIPSOID:
                return cls.ellipsoid(semi_axes=spec.semi_axes, center=spec.center, **tolerances)
            case _:
                raise ValueError(f"Unknown domain kind: {spec.kind}")

    def level(self, x: np.ndarray) -> np.ndarray:
        """Evaluate xi over (..., 3) positions."""
        return np.asarray(self._level(np.asarray(x, dtype=float)), dtype=float)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Evaluate grad xi over (..., 3) positions."""
        x = np.asarray(x, dtype=float)
        if self._gradient is not None:
            return np.asarray(self._gradient(x), dtype=float)

        # central differences for user level functions without a gradient
        columns = []
        for axis in range(3):
            shift = np.zeros(3)
            shift[axis] = FINITE_DIFFERENCE_STEP
            columns.append((self.level(x + shift) - self.level(x - shift)) / (2 * FINITE_DIFFERENCE_STEP))

        return np.stack(columns, axis=-1)

    def contains(self, x: np.ndarray) -> np.ndarray:
        """Return the interior mask xi < 0."""
        return self.level(x) < 0

    def normals(self, x: np.ndarray) -> np.ndarray:
        """Return grad xi / |grad xi| over (..., 3) positions."""
        grad = self.gradient(x)
        norm = np.linalg.norm(grad, axis=-1, keepdims=True)
        if np.any(norm < GRADIENT_FLOOR):
            raise DegenerateGradient(f"|grad xi| below {GRADIENT_FLOOR} at a boundary point")

        return grad / norm

    def outward_normal(
        self,
        x: Annotated[Tuple[float, float, float], Field(description="Boundary position.")],
    ) -> np.ndarray:
        """Return the outward unit normal at a boundary point."""
        point = np.asarray(x, dtype=float)
        if abs(float(self.level(point))) > self.band_tolerance:
            raise ValueError(f"point {tuple(point)} is not within the boundary band")

        return self.normals(point)

    def classify_boundary(
        self,
        x: Annotated[Tuple[float, float, float], Field(description="Boundary position.")],
        v: Annotated[Tuple[float, float, float], Field(description="Velocity.")],
        tol: Optional[float] = None,
    ) -> BoundaryClassEnum:
        """Classify (x, v) as outgoing, grazing or incoming."""
        tol = self.grazing_tolerance if tol is None else tol
        flux = float(np.dot(self.outward_normal(x), np.asarray(v, dtype=float)))

        if flux > tol:
            return BoundaryClassEnum.OUTGOING
        if flux < -tol:
            return BoundaryClassEnum.INCOMING
        return BoundaryClassEnum.GRAZING

    def crossing_parameters(self, start: np.ndarray, end: np.ndarray) -> np.ndarray:
        """Bisect segments (P, 3) -> (P, 3) for xi = 0, NaN where xi keeps its sign."""
        start = np.atleast_2d(np.asarray(start, dtype=float))
        end = np.atleast_2d(np.asarray(end, dtype=float))
        level_start = self.level(start)
        level_end = self.level(end)

        result = np.full(len(start), np.nan)
        result[level_start == 0] = 0.0
        result[(level_end == 0) & (level_start != 0)] = 1.0

        pending = np.isnan(result) & ((level_start < 0) != (level_end < 0))
        if not pending.any():
            return result

        index = np.flatnonzero(pending)
        # inner end at parameter `inner`, outer end at `outer`
        inner = np.where(level_start[index] < 0, 0.0, 1.0)
        outer = 1.0 - inner
        a, b = start[index], end[index]

        for _ in range(MAX_BISECTIONS):
            middle = 0.5 * (inner + outer)
            value = self.level(a + middle[:, None] * (b - a))
            done = np.abs(value) <= POSITION_TOLERANCE
            result[index[done]] = middle[done]

            keep = ~done
            if not keep.any():
                return result

            inside = value[keep] < 0
            index, a, b = index[keep], a[keep], b[keep]
            inner = np.where(inside, middle[keep], inner[keep])
            outer = np.where(inside, outer[keep], middle[keep])

        raise NoConvergence(f"bisection did not reach |xi| <= {POSITION_TOLERANCE} in {MAX_BISECTIONS} steps")

    def ray_boundary_crossing(
        self,
        start: Annotated[Tuple[float, float, float], Field(description="Segment start.")],
        end: Annotated[Tuple[float, float, float], Field(description="Segment end.")],
    ) -> float | None:
        """Return the crossing parameter of a segment, or None without a sign change."""
        parameter = self.crossing_parameters(np.asarray([start]), np.asarray([end]))[0]

        return None if np.isnan(parameter) else float(parameter)

    def boundary_quadrature(
        self,
        n_points: Annotated[int, Field(description="Number of surface nodes.", ge=4)] = 512,
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return surface nodes, outward normals and area weights of a star-shaped boundary."""
        golden = math.pi * (3.0 - math.sqrt(5.0))
        i = np.arange(n_points)
        z = 1.0 - (2.0 * i + 1.0) / n_points
        radius = np.sqrt(1.0 - z**2)
        directions = np.stack([radius * np.cos(golden * i), radius * np.sin(golden * i), z], axis=-1)

        far = self.center + 1.5 * self.bounding_radius * directions
        parameters = self.crossing_parameters(np.broadcast_to(self.center, far.shape), far)
        if np.any(np.isnan(parameters)):
            raise NoConvergence("a ray from the center does not cross the boundary")

        lengths = parameters * 1.5 * self.bounding_radius
        points = self.center + lengths[:, None] * directions
        normals = self.normals(points)
        cosines = np.sum(normals * directions, axis=-1)
        weights = (4.0 * math.pi / n_points) * lengths**2 / cosines

        return points, normals, weights


def tangent_frame(normals: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Return two unit tangents completing each (P, 3) unit vector to a right-handed frame."""
    helper = np.zeros_like(normals)
    use_x = np.abs(normals[:, 0]) < 0.9
    helper[use_x, 0] = 1.0
    helper[~use_x, 1] = 1.0
    first = np.cross(normals, helper)
    first /= np.linalg.norm(first, axis=-1, keepdims=True)

    return first, np.cross(normals, first)
