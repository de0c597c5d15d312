"""Test Fields."""

import math

import numpy as np
import pytest

from hypothesis import given, settings
from hypothesis import strategies as st
from icecream import ic
from pydantic import ValidationError

from kinetic_bte.fields import (
    PotentialField,
    diffuse_normalizer,
    global_maxwellian,
    hamiltonian,
    local_maxwellian,
    weight_tilde,
    weight_w,
)
from kinetic_bte.geometry import LevelSetDomain
from kinetic_bte.models import PotentialSpec, WeightSpec


ball = LevelSetDomain.ball()
zero = PotentialField.zero(domain=ball)
harmonic = PotentialField.harmonic(strength=1.0, domain=ball)
bump = PotentialField.gaussian_bump(amplitude=0.7, center=(0.1, -0.2, 0.3), width=0.4, domain=ball)
weight = WeightSpec()

coordinate = st.floats(min_value=-0.5, max_value=0.5, allow_nan=False)
speed = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False)


def test_global_maxwellian():
    """Tests."""
    result = global_maxwellian(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))

    assert np.allclose(result, [1.0, math.exp(-0.5)])
    ic(result)


def test_local_maxwellian():
    """Tests."""
    result = float(local_maxwellian(harmonic, np.array([1.0, 0.0, 0.0]), np.zeros(3)))

    assert result == pytest.approx(math.exp(-0.5))
    ic(result)

    result = float(local_maxwellian(zero, np.array([0.3, 0.0, 0.0]), np.array([1.0, 0.0, 0.0])))

    assert result == pytest.approx(math.exp(-0.5))


def test_hamiltonian():
    """Tests."""
    result = float(hamiltonian(harmonic, np.array([1.0, 0.0, 0.0]), np.array([1.0, 1.0, 0.0])))

    assert result == pytest.approx(1.5)
    ic(result)


def test_weight_w():
    """Tests."""
    result = float(weight_w(weight, zero, np.zeros(3), np.array([2.0, 0.0, 0.0])))

    assert result == pytest.approx(27.0)
    ic(result)

    result = float(weight_w(WeightSpec(beta=6.0), harmonic, np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])))

    assert result == pytest.approx(8.0)
    ic(result)


@settings(max_examples=50, deadline=None)
@given(x=st.tuples(coordinate, coordinate, coordinate), v=st.tuples(speed, speed, speed))
def test_weight_tilde_identity(x, v):
    """Tests."""
    x, v = np.array(x), np.array(v)
    product = weight_tilde(weight, bump, x, v) * weight_w(weight, bump, x, v) * np.sqrt(local_maxwellian(bump, x, v))

    assert float(product) == pytest.approx(1.0, rel=1e-12)


def test_beta_bound():
    """Tests."""
    with pytest.raises(ValidationError, match="beta must exceed 5"):
        WeightSpec(beta=4.0)

    result = WeightSpec(beta=5.5)

    assert result.beta == 5.5
    ic(result)


def test_diffuse_normalizer():
    """Tests."""
    result = diffuse_normalizer()

    assert result == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-10)
    ic(result)


def test_sup_norm():
    """Tests."""
    result = harmonic.sup_norm

    assert result == pytest.approx(0.5, abs=1e-9)
    ic(result)

    assert zero.sup_norm == 0.0


def test_sup_norm_needs_domain():
    """Tests."""
    with pytest.raises(ValueError):
        _ = PotentialField.harmonic().sup_norm


@settings(max_examples=30, deadline=None)
@given(x=st.tuples(coordinate, coordinate, coordinate))
def test_bump_derivatives(x):
    """Tests."""
    x = np.array(x)
    step = 1e-5
    eye = np.eye(3)
    gradient = np.array([(bump.phi(x + step * e) - bump.phi(x - step * e)) / (2 * step) for e in eye])
    hessian = np.array([(bump.grad(x + step * e) - bump.grad(x - step * e)) / (2 * step) for e in eye])

    assert np.allclose(bump.grad(x), gradient, atol=1e-7)
    assert np.allclose(bump.hessian(x), hessian, atol=1e-6)


def test_potential_from_spec():
    """Tests."""
    result = PotentialField.from_spec(PotentialSpec(kind="harmonic", strength=2.0, offset=0.5), ball)

    assert float(result.phi(np.array([1.0, 0.0, 0.0]))) == pytest.approx(1.5)
    assert np.allclose(result.hessian(np.zeros((2, 3))), 2.0 * np.eye(3))
    ic(result.sup_norm)
