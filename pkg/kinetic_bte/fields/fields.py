"""Potentials, Maxwellians and weights."""

import logging
import math

from functools import cached_property
from typing import Callable, Optional, Tuple

import numpy as np

from scipy import integrate, special

from ..geometry import LevelSetDomain
from ..models.fields import PotentialKindEnum, PotentialSpec, WeightSpec


logger = logging.getLogger(__name__)

ScalarField = Callable[[np.ndarray], np.ndarray]


class PotentialField:
    """External potential Phi with analytic gradient and Hessian."""

    def __init__(
        self,
        phi: ScalarField,
        grad: ScalarField,
        hessian: ScalarField,
        domain: Optional[LevelSetDomain] = None,
        kind: PotentialKindEnum | str = PotentialKindEnum.ZERO,
        sup_samples: int = 64,
    ) -> None:
        """Init."""
        self._phi = phi
        self._grad = grad
        self._hessian = hessian
        self.domain = domain
        self.kind = kind
        self.sup_samples = sup_samples

    @classmethod
    def zero(cls, domain: Optional[LevelSetDomain] = None) -> "PotentialField":
        """Build Phi = 0."""
        return cls(
            phi=lambda x: np.zeros(np.shape(x)[:-1]),
            grad=lambda x: np.zeros(np.shape(x)),
            hessian=lambda x: np.zeros(np.shape(x)[:-1] + (3, 3)),
            domain=domain,
            kind=PotentialKindEnum.ZERO,
        )

    @classmethod
    def harmonic(
        cls,
        strength: float = 1.0,
        center: Tuple[float, float, float] = (0.0, 0.0, 0.0),
        offset: float = 0.0,
        domain: Optional[LevelSetDomain] = None,
        sup_samples: int = 64,
    ) -> "PotentialField":
        """Build Phi = kappa |x - c|^2 / 2 + offset."""
        c = np.asarray(center, dtype=float)

        return cls(
            phi=lambda x: 0.5 * strength * np.sum((x - c) ** 2, axis=-1) + offset,
            grad=lambda x: strength * (x - c),
            hessian=lambda x: np.broadcast_to(strength * np.eye(3), np.shape(x)[:-1] + (3, 3)).copy(),
            domain=domain,
            kind=PotentialKindEnum.HARMONIC,
            sup_samples=sup_samples,
        )

    @classmethod
    def gaussian_bump(
        cls,
        amplitude: float = 1.0,
        center: Tuple[float, float, float] = (0.0, 0.0, 0.0),
        width: float = 0.5,
        offset: float = 0.0,
        domain: Optional[LevelSetDomain] = None,
        sup_samples: int = 64,
    ) -> "PotentialField":
        """Build Phi = A exp(-|x - x0|^2 / sigma^2) + offset."""
        c = np.asarray(center, dtype=float)
        inverse = 1.0 / width**2

        def phi(x: np.ndarray) -> np.ndarray:
            return amplitude * np.exp(-inverse * np.sum((x - c) ** 2, axis=-1)) + offset

        def grad(x: np.ndarray) -> np.ndarray:
            bump = amplitude * np.exp(-inverse * np.sum((x - c) ** 2, axis=-1))
            return -2.0 * inverse * bump[..., None] * (x - c)

        def hessian(x: np.ndarray) -> np.ndarray:
            d = x - c
            bump = amplitude * np.exp(-inverse * np.sum(d**2, axis=-1))
            outer = 4.0 * inverse**2 * d[..., :, None] * d[..., None, :]
            return bump[..., None, None] * (outer - 2.0 * inverse * np.eye(3))

        return cls(
            phi=phi,
            grad=grad,
            hessian=hessian,
            domain=domain,
            kind=PotentialKindEnum.GAUSSIAN_BUMP,
            sup_samples=sup_samples,
        )

    @classmethod
    def from_spec(cls, spec: PotentialSpec, domain: LevelSetDomain) -> "PotentialField":
        """Build a potential from its scenario spec."""
        match spec.kind:
            case PotentialKindEnum.ZERO:
                potential = cls.zero(domain=domain)
            case PotentialKindEnum.HARMONIC:
                potential = cls.harmonic(
                    strength=spec.strength,
                    center=spec.center,
                    offset=spec.offset,
                    domain=domain,
                    sup_samples=spec.sup_samples,
                )
            case PotentialKindEnum.GAUSSIAN_BUMP:
                potential = cls.gaussian_bump(
                    amplitude=spec.amplitude,
                    center=spec.center,
                    width=spec.width,
                    offset=spec.offset,
                    domain=domain,
                    sup_samples=spec.sup_samples,
                )
            case _:
                raise ValueError(f"Unknown potential kind: {spec.kind}")

        logger.info("Potential %s with sup norm %.6g", spec.kind.value, potential.sup_norm)
        return potential

    @property
    def is_zero(self) -> bool:
        """Return whether Phi vanishes identically."""
        return self.kind == PotentialKindEnum.ZERO

    def phi(self, x: np.ndarray) -> np.ndarray:
        """Evaluate Phi over (..., 3) positions."""
        return np.asarray(self._phi(np.asarray(x, dtype=float)), dtype=float)

    def grad(self, x: np.ndarray) -> np.ndarray:
        """Evaluate grad Phi over (..., 3) positions."""
        return np.asarray(self._grad(np.asarray(x, dtype=float)), dtype=float)

    def hessian(self, x: np.ndarray) -> np.ndarray:
        """Evaluate the Hessian of Phi over (..., 3) positions."""
        return np.asarray(self._hessian(np.asarray(x, dtype=float)), dtype=float)

    @cached_property
    def sup_norm(self) -> float:
        """Return the sup of |Phi| over the closed domain, by dense sampling."""
        if self.is_zero:
            return 0.0
        if self.domain is None:
            raise ValueError("the sup norm needs a domain")

        n = self.sup_samples
        radius = self.domain.bounding_radius
        axis = radius * (2.0 * (np.arange(n) + 0.5) / n - 1.0)
        samples = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3) + self.domain.center
        samples = samples[self.domain.level(samples) <= 0]
        boundary, _, _ = self.domain.boundary_quadrature()
        values = self.phi(np.concatenate([samples, boundary]))

        if values.min() < 0:
            logger.warning("Potential %s is negative on the domain", self.kind)

        return float(np.abs(values).max())


def global_maxwellian(v: np.ndarray) -> np.ndarray:
    """Return mu(v) = exp(-|v|^2 / 2)."""
    return np.exp(-0.5 * np.sum(np.asarray(v, dtype=float) ** 2, axis=-1))


def local_maxwellian(pot: PotentialField, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Return mu_E(x, v) = exp(-Phi(x)) mu(v), broadcasting x against v."""
    return np.exp(-pot.phi(x)) * global_maxwellian(v)


def hamiltonian(pot: PotentialField, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Return |v|^2 / 2 + Phi(x)."""
    return 0.5 * np.sum(np.asarray(v, dtype=float) ** 2, axis=-1) + pot.phi(x)


def weight_w(spec: WeightSpec, pot: PotentialField, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Return the weight (1 + |v|^2 / 2 + Phi(x))^(beta / 2)."""
    return (1.0 + hamiltonian(pot, x, v)) ** (0.5 * spec.beta)


def weight_tilde(spec: WeightSpec, pot: PotentialField, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Return 1 / (w mu_E^(1/2))."""
    return 1.0 / (weight_w(spec, pot, x, v) * np.sqrt(local_maxwellian(pot, x, v)))


def diffuse_normalizer(nodes: int = 40) -> float:
    """Return c_mu with c_mu * int_{n.v > 0} mu (n.v) dv = 1, by quadrature."""
    _, hermite_weights = special.roots_hermitenorm(nodes)
    tangential = float(hermite_weights.sum())
    normal, _ = integrate.quad(lambda u: u * math.exp(-0.5 * u * u), 0.0, math.inf, epsabs=1e-14, epsrel=1e-14)

    return 1.0 / (tangential**2 * normal)
