"""Small scenarios shared by the tests."""

from typing import Any, Dict

from kinetic_bte.models import Scenario


SMALL_SCENARIO: Dict[str, Any] = {
    "velocity_grid": {"cutoff": 4.0, "points_per_axis": 6},
    "spatial_grid": {"points_per_axis": 4, "subsamples": 2},
    "kernel": {"n_polar": 1, "n_azimuth": 4},
    "scheme": {"dt": 0.01, "t_end": 0.02, "output_every": 1},
    "characteristics": {"step_fraction": 0.01, "horizon_crossings": 100.0},
    "cycles": {"t": 2.0, "ks": [2, 3], "n_samples": 200},
    "seed": 7,
}


def _merge(base: Dict[str, Any], updates: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in updates.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value

    return merged


def small_data(**updates: Any) -> Dict[str, Any]:
    """Return the raw data of a small scenario with section updates merged in."""
    return _merge(SMALL_SCENARIO, updates)


def small_scenario(**updates: Any) -> Scenario:
    """Return a coarse scenario that keeps the dense operators cheap."""
    return Scenario.model_validate(small_data(**updates))
