"""Test Characteristics."""

import math

import numpy as np
import pytest

from hypothesis import given, settings
from hypothesis import strategies as st
from icecream import ic

from kinetic_bte.characteristics import Characteristics, sample_diffuse_batch, task_generator
from kinetic_bte.errors import ExitNotFound, LeftDomain
from kinetic_bte.fields import PotentialField, hamiltonian
from kinetic_bte.geometry import LevelSetDomain
from kinetic_bte.models import CharacteristicsSettings, CycleTerminalEnum, PhasePoint


ball = LevelSetDomain.ball()
free = Characteristics(ball, PotentialField.zero(domain=ball))
harmonic = Characteristics(ball, PotentialField.harmonic(strength=1.0, domain=ball))
bump = Characteristics(
    ball, PotentialField.gaussian_bump(amplitude=0.5, center=(0.2, 0.1, 0.0), width=0.5, domain=ball)
)
coarse = Characteristics(
    ball,
    PotentialField.zero(domain=ball),
    settings=CharacteristicsSettings(step_fraction=1e-2),
)
trapping = Characteristics(
    ball,
    PotentialField.harmonic(strength=1.0, domain=ball),
    settings=CharacteristicsSettings(step_fraction=1e-2, horizon_crossings=10.0),
)


def test_free_flight():
    """Tests."""
    result = free.flow(PhasePoint(x=(0.0, 0.0, 0.0), v=(1.0, 0.0, 0.0)), t=1.0, s=0.0)

    assert np.allclose(result.x, (-1.0, 0.0, 0.0), atol=1e-12)
    assert np.allclose(result.v, (1.0, 0.0, 0.0), atol=1e-12)
    ic(result)


def test_harmonic_quarter_period():
    """Tests."""
    start = PhasePoint(x=(0.5, 0.0, 0.0), v=(0.0, 0.5, 0.0))
    result = harmonic.flow(start, t=math.pi / 2, s=0.0, step=1e-3)

    assert np.allclose(result.x, (0.0, -0.5, 0.0), atol=1e-6)
    assert np.allclose(result.v, (0.5, 0.0, 0.0), atol=1e-6)
    ic(result)


def test_flow_forward_rejected():
    """Tests."""
    with pytest.raises(ValueError):
        free.flow(PhasePoint(x=(0.0, 0.0, 0.0), v=(1.0, 0.0, 0.0)), t=0.0, s=1.0)


def test_flow_left_domain():
    """Tests."""
    with pytest.raises(LeftDomain):
        free.flow(PhasePoint(x=(0.0, 0.0, 0.0), v=(1.0, 0.0, 0.0)), t=2.0, s=0.0)


def test_hamiltonian_conserved():
    """Tests."""
    rng = np.random.default_rng(3)
    directions = rng.standard_normal((2, 1000, 3))
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    x = directions[0] * rng.random((1000, 1)) ** (1 / 3) * 0.999
    v = directions[1] * rng.random((1000, 1)) ** (1 / 3)

    xs, vs = harmonic.flow_batch(x, v, t=2.0, s=0.0, step=1e-3, record=True, check_domain=False)
    energy = hamiltonian(harmonic.potential, xs, vs)
    result = float(np.abs(energy - energy[0]).max())

    assert result <= 1e-6
    ic(result)

    inside = ball.contains(xs)
    drift = np.abs(np.linalg.norm(vs, axis=-1) - np.linalg.norm(v, axis=-1))
    bound = math.sqrt(2.0 * harmonic.potential.sup_norm) + 1e-6

    assert drift[inside].max() <= bound
    ic(drift[inside].max())


def test_jacobian_free():
    """Tests."""
    result = free.jacobian_flow(PhasePoint(x=(0.0, 0.0, 0.0), v=(0.5, 0.0, 0.0)), t=1.0, s=0.0)

    assert result.det == pytest.approx(-1.0, abs=1e-8)
    assert np.allclose(result.dXdv, -np.eye(3), atol=1e-10)
    assert np.allclose(result.dVdv, np.eye(3), atol=1e-12)
    ic(result.det)


def test_jacobian_harmonic():
    """Tests."""
    result = harmonic.jacobian_flow(PhasePoint(x=(0.0, 0.0, 0.0), v=(0.1, 0.0, 0.0)), t=1.0, s=0.0, step=1e-3)

    assert result.det == pytest.approx(math.sin(-1.0) ** 3, abs=1e-6)
    assert np.allclose(result.dVdv, math.cos(1.0) * np.eye(3), atol=1e-6)
    ic(result.det)


@settings(max_examples=10, deadline=None)
@given(
    x=st.tuples(*[st.floats(min_value=-0.3, max_value=0.3, allow_nan=False)] * 3),
    v=st.tuples(*[st.floats(min_value=-0.5, max_value=0.5, allow_nan=False)] * 3),
)
def test_jacobian_matches_finite_differences(x, v):
    """Tests."""
    start = PhasePoint(x=x, v=v)
    result = bump.jacobian_flow(start, t=0.5, s=0.0, step=1e-2)

    eps = 1e-6
    columns = []
    for axis in range(3):
        shift = np.zeros(3)
        shift[axis] = eps
        plus = bump.flow(PhasePoint(x=x, v=tuple(np.array(v) + shift)), t=0.5, s=0.0, step=1e-2)
        minus = bump.flow(PhasePoint(x=x, v=tuple(np.array(v) - shift)), t=0.5, s=0.0, step=1e-2)
        columns.append((np.array(plus.x) - np.array(minus.x)) / (2 * eps))

    assert np.allclose(result.dXdv, np.stack(columns, axis=-1), atol=1e-5)


def test_backward_exit():
    """Tests."""
    result = free.backward_exit(PhasePoint(x=(0.0, 0.0, 0.0), v=(1.0, 0.0, 0.0)))

    assert result.t_b == pytest.approx(1.0, abs=1e-8)
    assert np.allclose(result.x_b, (-1.0, 0.0, 0.0), atol=1e-8)
    assert np.allclose(result.v_b, (1.0, 0.0, 0.0), atol=1e-12)
    ic(result)

    result = free.backward_exit(PhasePoint(x=(0.5, 0.0, 0.0), v=(1.0, 0.0, 0.0)))

    assert result.t_b == pytest.approx(1.5, abs=1e-8)
    ic(result)


def test_backward_exit_on_boundary():
    """Tests."""
    result = free.backward_exit(PhasePoint(x=(1.0, 0.0, 0.0), v=(-1.0, 0.0, 0.0)))

    assert 0 < result.t_b <= 1e-6
    assert np.allclose(result.x_b, (1.0, 0.0, 0.0), atol=1e-6)
    ic(result)


def test_backward_exit_max_time():
    """Tests."""
    x = np.array([[0.999, 0.0, 0.0], [0.5, 0.0, 0.0]])
    v = np.array([[-0.01, 0.0, 0.0], [1.0, 0.0, 0.0]])
    exit_time, exit_x, exit_v = free.backward_exit_batch(x, v, max_time=np.array([0.01, 2.0]))

    assert np.isinf(exit_time[0])
    assert np.all(np.isnan(exit_x[0])) and np.all(np.isnan(exit_v[0]))
    assert exit_time[1] == pytest.approx(1.5, abs=1e-8)
    ic(exit_time)

    exit_time, _, _ = free.backward_exit_batch(x[:1], v[:1], max_time=np.array([0.2]))

    assert exit_time[0] == pytest.approx(0.1, abs=1e-8)


def test_backward_exit_stationary():
    """Tests."""
    with pytest.raises(ExitNotFound):
        free.backward_exit(PhasePoint(x=(0.0, 0.0, 0.0), v=(0.0, 0.0, 0.0)))


def test_backward_exit_trapped():
    """Tests."""
    with pytest.raises(ExitNotFound):
        trapping.backward_exit(PhasePoint(x=(0.0, 0.0, 0.0), v=(0.01, 0.0, 0.0)))


def test_backward_exit_lands_on_boundary():
    """Tests."""
    rng = np.random.default_rng(11)
    x = 0.5 * rng.uniform(-1.0, 1.0, (200, 3))
    v = rng.standard_normal((200, 3))
    exit_time, exit_x, _ = bump.backward_exit_batch(x, v)

    assert np.all(exit_time > 0)
    assert np.allclose(np.linalg.norm(exit_x, axis=-1), 1.0, atol=1e-9)
    ic(exit_time.max())


def test_sample_diffuse_moments():
    """Tests."""
    rng = task_generator(0, 0)
    normals = np.repeat([[0.0, 0.0, 1.0]], 1_000_000, axis=0)
    samples = sample_diffuse_batch(rng, normals)
    normal = samples[:, 2]
    result = float(normal.mean())

    assert np.all(normal > 0)
    assert result == pytest.approx(math.sqrt(math.pi / 2), abs=3 * math.sqrt((2 - math.pi / 2) / 1e6))
    assert float(samples[:, 0].var()) == pytest.approx(1.0, abs=3 * math.sqrt(2 / 1e6))
    assert float(samples[:, 1].var()) == pytest.approx(1.0, abs=3 * math.sqrt(2 / 1e6))
    ic(result)


def test_sample_diffuse_velocity():
    """Tests."""
    normal = (0.6, 0.0, 0.8)
    result = free.sample_diffuse_velocity(np.random.default_rng(5), normal)

    assert float(np.dot(result, normal)) > 0
    ic(result)


def test_build_back_cycle():
    """Tests."""
    result = free.build_back_cycle(np.random.default_rng(1), 0.5, (0.0, 0.0, 0.0), (1.0, 0.0, 0.0), k_max=10)

    assert result.terminal == CycleTerminalEnum.REACHED_INITIAL_TIME
    assert len(result.records) == 1
    assert result.records[0].t == pytest.approx(-0.5, abs=1e-8)
    ic(result)

    result = coarse.build_back_cycle(np.random.default_rng(2), 3.0, (0.0, 0.0, 0.0), (1.0, 0.0, 0.0), k_max=20)
    times = [record.t for record in result.records]

    assert all(later < earlier for earlier, later in zip(times, times[1:]))
    for record in result.records:
        normal = ball.outward_normal(record.x)
        assert float(np.dot(normal, record.v)) > 0
    ic(len(result.records), result.terminal)


def test_cycle_reach_probabilities():
    """Tests."""
    result = coarse.cycle_reach_probabilities(5.0, (0.0, 0.0, 0.0), (1.0, 0.0, 0.0), [5, 10, 20, 40], seed=0)
    estimates = [estimate.estimate for estimate in result]

    assert all(later <= earlier for earlier, later in zip(estimates, estimates[1:]))
    assert estimates[-1] <= 0.1 * estimates[0]
    ic(result)


def test_cycle_reach_deterministic():
    """Tests."""
    parallel = Characteristics(
        ball,
        PotentialField.zero(domain=ball),
        settings=CharacteristicsSettings(step_fraction=1e-2, task_size=128),
        workers=2,
    )
    serial = Characteristics(
        ball,
        PotentialField.zero(domain=ball),
        settings=CharacteristicsSettings(step_fraction=1e-2, task_size=128),
    )
    result = parallel.cycle_reach_probabilities(2.0, (0.0, 0.0, 0.0), (1.0, 0.0, 0.0), [2, 3], n_samples=500, seed=9)
    expected = serial.cycle_reach_probabilities(2.0, (0.0, 0.0, 0.0), (1.0, 0.0, 0.0), [2, 3], n_samples=500, seed=9)

    assert result == expected
    ic(result)


def test_cycle_reach_rejects_small_index():
    """Tests."""
    with pytest.raises(ValueError):
        coarse.cycle_reach_probabilities(1.0, (0.0, 0.0, 0.0), (1.0, 0.0, 0.0), [1], n_samples=100)
