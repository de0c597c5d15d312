"""Spatial grid."""

import logging

from typing import Tuple

import numpy as np

from scipy import ndimage

from .geometry import LevelSetDomain


logger = logging.getLogger(__name__)


class SpatialGrid:
    """Cell-centred Cartesian grid restricted to the interior of a domain."""

    def __init__(
        self,
        domain: LevelSetDomain,
        points_per_axis: int = 16,
        subsamples: int = 4,
    ) -> None:
        """Init."""
        self.domain = domain
        self.points_per_axis = n = points_per_axis
        self.spacing = 2.0 * domain.bounding_radius / n
        self.origin = domain.center - domain.bounding_radius

        axis = self.spacing * (np.arange(n) + 0.5)
        cells = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1) + self.origin
        inside = domain.contains(cells)
        if not inside.any():
            raise ValueError("no cell centre lies inside the domain, refine the spatial grid")

        flat_inside = inside.ravel()
        self.nodes = cells.reshape(-1, 3)[flat_inside]
        self.index = np.full(n**3, -1, dtype=np.int64)
        self.index[flat_inside] = np.arange(len(self.nodes))

        # every cell borrows the value of its nearest interior cell
        _, nearest = ndimage.distance_transform_edt(~inside, return_indices=True)
        self.ghost = self.index[np.ravel_multi_index(tuple(nearest), inside.shape).ravel()]

        fractions = self._inside_fractions(cells.reshape(-1, 3), subsamples)
        cell_volume = self.spacing**3
        volume = domain.volume if domain.volume is not None else float(fractions.sum() * cell_volume)
        interior = np.maximum(fractions[flat_inside], 1.0 / subsamples**3)
        self.weights = interior * cell_volume * volume / float(interior.sum() * cell_volume)
        self.volume = volume
        self.cut = fractions[flat_inside] < 1.0

        logger.debug("Spatial grid: %d interior nodes of %d cells, volume %.6f", len(self.nodes), n**3, volume)

    def __len__(self) -> int:
        """Return the number of interior nodes."""
        return len(self.nodes)

    def _inside_fractions(self, centres: np.ndarray, subsamples: int) -> np.ndarray:
        offsets = self.spacing * ((np.arange(subsamples) + 0.5) / subsamples - 0.5)
        local = np.stack(np.meshgrid(offsets, offsets, offsets, indexing="ij"), axis=-1).reshape(-1, 3)
        fractions = np.empty(len(centres))
        for start in range(0, len(centres), 4096):
            chunk = centres[start:start + 4096]
            fractions[start:start + 4096] = self.domain.contains(chunk[:, None, :] + local[None]).mean(axis=1)

        return fractions

    def stencil(self, points: np.ndarray, order: int = 1) -> Tuple[np.ndarray, np.ndarray]:
        """Return interior node indices and weights of the tensor interpolation stencil at (P, 3) points."""
        coordinates = (np.asarray(points, dtype=float) - self.origin) / self.spacing - 0.5
        cells, weights = tensor_stencil(coordinates, self.points_per_axis, order)

        return self.ghost[cells], weights

    def reaches_exterior(self, points: np.ndarray, order: int = 1) -> np.ndarray:
        """Return whether the stencil at each (P, 3) point borrows a ghost value from outside the domain."""
        coordinates = (np.asarray(points, dtype=float) - self.origin) / self.spacing - 0.5
        cells, _ = tensor_stencil(coordinates, self.points_per_axis, order)

        return np.any(self.index[cells] < 0, axis=-1)


def axis_stencil(coordinate: np.ndarray, n: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Return 1D node indices and Lagrange weights at continuous indices, clamped to [0, n - 1]."""
    s = np.clip(coordinate, 0.0, n - 1.0)
    width = order + 1
    if n < width:
        raise ValueError(f"{n} nodes per axis cannot carry an order {order} stencil")

    start = np.clip(np.floor(s).astype(np.int64) - (order - 1) // 2, 0, n - width)
    nodes = start[:, None] + np.arange(width)[None, :]
    weights = np.ones(nodes.shape)
    for k in range(width):
        for m in range(width):
            if m != k:
                weights[:, k] *= (s - nodes[:, m]) / (k - m)

    return nodes, weights


def tensor_stencil(coordinates: np.ndarray, n: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Return flat node indices (P, (order+1)^3) and weights of a tensor-product stencil."""
    ix, wx = axis_stencil(coordinates[:, 0], n, order)
    iy, wy = axis_stencil(coordinates[:, 1], n, order)
    iz, wz = axis_stencil(coordinates[:, 2], n, order)

    flat = (ix[:, :, None, None] * n + iy[:, None, :, None]) * n + iz[:, None, None, :]
    weights = wx[:, :, None, None] * wy[:, None, :, None] * wz[:, None, None, :]
    count = len(coordinates)

    return flat.reshape(count, -1), weights.reshape(count, -1)
