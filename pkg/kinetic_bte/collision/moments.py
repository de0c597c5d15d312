"""Projections and Gaussian moments."""

import itertools
import math

from typing import Sequence, Tuple

import numpy as np

from scipy import special

from ..fields import diffuse_normalizer
from ..models.collision import MomentTriple
from .grid import VelocityGrid


def raw_invariants(grid: VelocityGrid) -> np.ndarray:
    """Return sqrt(mu), v sqrt(mu) and (|v|^2 - 3) / sqrt(6) sqrt(mu) as columns."""
    sqrt_mu = grid.sqrt_mu[:, None]
    energy = ((grid.speeds**2 - 3.0) / math.sqrt(6.0))[:, None]

    return np.hstack([sqrt_mu, grid.nodes * sqrt_mu, energy * sqrt_mu])


def invariant_basis(grid: VelocityGrid) -> np.ndarray:
    """Return the five invariants orthonormalized in the Euclidean node inner product."""
    q, r = np.linalg.qr(raw_invariants(grid))
    return q * np.sign(np.diag(r))


def project_PL(grid: VelocityGrid, f: np.ndarray, literal: bool = False) -> Tuple[MomentTriple, np.ndarray]:
    """Return the coefficients (a, b, c) of f at fixed x and the projection P_L f.

    The default basis is orthonormal under the grid inner product; literal uses the raw
    Maxwellian coefficients, which do not define an idempotent map.
    """
    f = np.asarray(f, dtype=float)
    if literal:
        functions = raw_invariants(grid)
    else:
        functions = invariant_basis(grid) / math.sqrt(grid.cell_weight)
    coefficients = grid.integrate(functions.T * f)
    projected = functions @ coefficients

    triple = MomentTriple(a=float(coefficients[0]), b=np.asarray(coefficients[1:4]), c=float(coefficients[4]))
    return triple, projected


def project_PL_batch(grid: VelocityGrid, f: np.ndarray) -> np.ndarray:
    """Return P_L f along the last axis."""
    basis = invariant_basis(grid)
    return (np.asarray(f, dtype=float) @ basis) @ basis.T


def project_Pgamma(grid: VelocityGrid, trace: np.ndarray, n: np.ndarray, discrete: bool = True) -> np.ndarray:
    """Return P_gamma f = c_mu sqrt(mu) int_{n.v' > 0} f sqrt(mu)(v') (n.v') dv' at every node.

    The discrete normalizer makes the map exactly idempotent on the grid.
    """
    normals = np.atleast_2d(np.asarray(n, dtype=float))
    flux = grid.outgoing_flux(normals)
    scale = grid.wall_normalizer(normals) if discrete else np.full(len(normals), diffuse_normalizer())
    moments = np.sum(np.atleast_2d(trace) * grid.sqrt_mu * flux, axis=-1)
    projected = (scale * moments)[:, None] * grid.sqrt_mu

    return projected.reshape(np.shape(trace)) if np.ndim(trace) == 1 else projected


def gamma_plus_inner(grid: VelocityGrid, first: np.ndarray, second: np.ndarray, n: np.ndarray) -> float:
    """Return the (n.v)-weighted outgoing half-space inner product at one boundary point."""
    return float(np.sum(first * second * grid.outgoing_flux(n)[0]))


def _double_factorial(value: int) -> int:
    return math.prod(range(value, 0, -2))


def gaussian_moment(exponents: Sequence[int], radial_power: int = 0) -> float:
    """Return int v1^a v2^b v3^c |v|^r exp(-|v|^2 / 2) dv exactly, for even r."""
    if radial_power % 2:
        raise ValueError("the radial power must be even")

    total = 0.0
    half = radial_power // 2
    for split in itertools.product(range(half + 1), repeat=3):
        if sum(split) != half:
            continue
        multinomial = math.factorial(half) // math.prod(math.factorial(k) for k in split)
        powers = [e + 2 * k for e, k in zip(exponents, split)]
        if any(p % 2 for p in powers):
            continue
        total += multinomial * math.prod(_double_factorial(p - 1) for p in powers)

    return total * (2.0 * math.pi) ** 1.5


def hermite_moment(exponents: Sequence[int], radial_power: int = 0, nodes: int = 24) -> float:
    """Return the same moment by tensor Gauss-Hermite quadrature."""
    points, weights = special.roots_hermitenorm(nodes)
    grid = np.stack(np.meshgrid(points, points, points, indexing="ij"), axis=-1).reshape(-1, 3)
    weight = np.einsum("i,j,k->ijk", weights, weights, weights).ravel()
    values = np.prod(grid ** np.asarray(exponents), axis=-1) * np.sum(grid**2, axis=-1) ** (radial_power // 2)

    return float(values @ weight)


def hydrodynamic_constants() -> dict:
    """Return beta_c, beta_b and A defined by Gaussian moments of the energy mode."""
    second = gaussian_moment((2, 0, 0))
    beta_c = gaussian_moment((2, 0, 0), radial_power=2) / second
    beta_b = second / gaussian_moment((0, 0, 0))
    fourth = gaussian_moment((2, 0, 0), radial_power=4)
    amplitude = (fourth - (beta_c + 3.0) * gaussian_moment((2, 0, 0), radial_power=2) + 3.0 * beta_c * second)

    return {
        "beta_c": beta_c,
        "beta_b": beta_b,
        "A": amplitude / math.sqrt(6.0),
    }
