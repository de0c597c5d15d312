"""Test Diagnostics."""

import math

import numpy as np
import pytest

from hypothesis import given, settings
from hypothesis import strategies as st
from icecream import ic
from pydantic import ValidationError

from kinetic_bte import KineticClient
from kinetic_bte.diagnostics import entropy_increases, fit_decay_rate, fit_warm_up
from kinetic_bte.errors import NegativeDistribution, NonPositiveChannel
from kinetic_bte.models import DiagnosticsSeries, RepresentationEnum

from .scenarios import small_scenario


client = KineticClient(small_scenario(potential={"kind": "harmonic", "strength": 1.0}))
diagnostics = client.diagnostics
context = client.context
solver = client.solver
equilibrium = solver.field(context.mu_e)


def test_total_mass():
    """Tests."""
    result = diagnostics.total_mass(equilibrium)

    assert result > 0
    assert diagnostics.total_mass(solver.field(np.zeros_like(context.mu_e))) == 0.0
    assert diagnostics.total_mass(solver.as_perturbation(equilibrium)) == pytest.approx(result, rel=1e-12)
    ic(result)


def test_relative_entropy():
    """Tests."""
    mass = diagnostics.total_mass(equilibrium)

    assert diagnostics.relative_entropy(equilibrium) == pytest.approx(0.0, abs=1e-14)

    result = diagnostics.relative_entropy(solver.field(2.0 * context.mu_e))

    assert result == pytest.approx((2.0 * math.log(2.0) - 1.0) * mass, rel=1e-12)
    ic(result)

    result = diagnostics.relative_entropy(solver.field(np.zeros_like(context.mu_e)))

    assert result == pytest.approx(mass, rel=1e-12)
    ic(result)


def test_relative_entropy_negative():
    """Tests."""
    values = context.mu_e.copy()
    values[3, 4] = -1e-6

    with pytest.raises(NegativeDistribution):
        diagnostics.relative_entropy(solver.field(values))

    result = diagnostics.snapshot(solver.field(values), strict=False)

    assert math.isnan(result["entropy"])
    ic(result)


def test_entropy_l1l2_check():
    """Tests."""
    doubled = solver.field(2.0 * context.mu_e)
    entropy0 = diagnostics.relative_entropy(doubled)
    result = diagnostics.entropy_l1l2_check(doubled, entropy0)

    assert result.lhs == pytest.approx(0.25 * diagnostics.total_mass(equilibrium), rel=1e-12)
    assert result.passed
    ic(result)

    result = diagnostics.entropy_l1l2_check(equilibrium, 0.0)

    assert result.lhs == 0.0
    assert result.passed


def test_norms():
    """Tests."""
    result = diagnostics.norms(equilibrium)

    assert result.l2 == 0.0
    assert result.weighted_sup == 0.0
    assert result.boundary_gamma_plus == 0.0
    ic(result)

    values = np.zeros_like(context.mu_e)
    values[2, 5] = context.weight[2, 5]
    result = diagnostics.norms(solver.field(values, RepresentationEnum.WEIGHTED_PERTURBATION))

    assert result.weighted_sup == pytest.approx(context.weight[2, 5])
    expected = math.sqrt(context.spatial_grid.weights[2] * context.velocity_grid.cell_weight)
    assert result.l2 == pytest.approx(expected)
    ic(result)


def test_rf_monitor():
    """Tests."""
    result = diagnostics.rf_lower_bound_monitor(equilibrium)

    assert result == pytest.approx(1.0, rel=1e-12)
    assert diagnostics.rf_lower_bound_monitor(solver.field(np.zeros_like(context.mu_e))) == 0.0
    assert diagnostics.rf_lower_bound_monitor(solver.field(3.0 * context.mu_e)) == pytest.approx(3.0)
    ic(result)


def test_coercivity_report():
    """Tests."""
    result = diagnostics.coercivity_report()

    assert max(abs(value) for value in result.near_kernel_eigenvalues) <= 1e-8 * result.nu0
    assert max(result.kernel_residuals.values()) <= 1e-8 * result.nu0
    assert set(result.kernel_residuals) == {"density", "momentum_1", "momentum_2", "momentum_3", "energy"}
    assert result.spectral_gap > 0
    assert result.fitted_constant == result.spectral_gap
    assert set(result.raw_kernel_residuals) == set(result.kernel_residuals)
    assert max(result.raw_kernel_residuals.values()) * result.nu0 >= max(result.kernel_residuals.values())
    assert 0 <= result.raw_symmetry_residual < math.inf
    assert result.raw_smallest_eigenvalue >= 0
    ic(result)


def test_snapshot_channels():
    """Tests."""
    series = DiagnosticsSeries()
    diagnostics.record(series, 0.0, equilibrium)
    diagnostics.record(series, 0.5, solver.field(1.5 * context.mu_e))

    assert series.times == [0.0, 0.5]
    assert set(series.channels) == {"mass", "entropy", "l2_norm", "winf_norm", "gamma_plus_norm", "rf_min_ratio"}
    assert series.channel("mass")[1] == pytest.approx(1.5 * series.channel("mass")[0])
    ic(series)


def test_fit_decay_rate():
    """Tests."""
    times = np.linspace(0.0, 2.0, 21)
    result = fit_decay_rate(times, np.exp(-2.0 * times))

    assert result.rate == pytest.approx(2.0, abs=1e-10)
    assert result.r_squared == pytest.approx(1.0)
    ic(result)

    result = fit_decay_rate(times, np.full(21, 3.0))

    assert result.rate == 0.0
    assert result.r_squared == 1.0
    ic(result)


@settings(max_examples=30, deadline=None)
@given(rate=st.floats(min_value=0.01, max_value=50.0), scale=st.floats(min_value=1e-3, max_value=1e3))
def test_fit_decay_rate_recovers_rate(rate, scale):
    """Tests."""
    times = np.linspace(0.0, 1.0, 11)
    result = fit_decay_rate(times, scale * np.exp(-rate * times), window=(0.2, 1.0))

    assert result.rate == pytest.approx(rate, rel=1e-8)
    assert result.window == (0.2, 1.0)


def test_fit_decay_rate_errors():
    """Tests."""
    with pytest.raises(NonPositiveChannel):
        fit_decay_rate([0.0, 1.0, 2.0], [1.0, 0.0, 0.5])

    with pytest.raises(ValueError):
        fit_decay_rate([0.0, 1.0, 2.0], [1.0, 0.5, 0.25], window=(1.5, 1.8))


def test_fit_warm_up():
    """Tests."""
    result = fit_warm_up([0.0, 1.0, 2.0, 3.0], [0.2, 0.4, 0.6, 0.7])

    assert result == 2.0
    assert fit_warm_up([0.0, 1.0], [0.6, 0.7]) == 0.0
    assert fit_warm_up([0.0, 1.0], [0.6, 0.1]) is None
    ic(result)


def test_entropy_increases():
    """Tests."""
    result = entropy_increases([1.0, 0.9, 0.95, 0.8])

    assert result == [2]
    assert entropy_increases([1.0, 1.0 + 1e-7, 0.5]) == []
    assert entropy_increases([1.0]) == []
    ic(result)


def test_series_validation():
    """Tests."""
    with pytest.raises(ValidationError):
        DiagnosticsSeries(times=[0.0, 0.0], channels={"mass": [1.0, 1.0]})

    with pytest.raises(ValidationError):
        DiagnosticsSeries(times=[0.0, 1.0], channels={"mass": [1.0]})

    series = DiagnosticsSeries()
    series.append(0.0, mass=1.0)

    with pytest.raises(ValueError):
        series.append(1.0, entropy=0.0)

    with pytest.raises(ValueError):
        series.append(0.0, mass=1.0)
