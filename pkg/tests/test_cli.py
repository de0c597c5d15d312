"""Test CLI."""

import json

import numpy as np
import pytest
import yaml

from icecream import ic

from kinetic_bte import KineticClient
from kinetic_bte.cli import build_parser, exit_code, load_scenario, main
from kinetic_bte.cli.outputs import read_series_csv, read_snapshot
from kinetic_bte.errors import NonContractive, ScenarioParseError, ScenarioValidationError
from kinetic_bte.models import Scenario

from .scenarios import small_data


PICARD_THRESHOLD = 1e3


def write_scenario(directory, **updates):
    """Write a small scenario file and return its path."""
    path = directory / "scenario.yaml"
    path.write_text(yaml.safe_dump(small_data(**updates)), encoding="utf-8")
    return path


def test_load_scenario(tmp_path):
    """Tests."""
    result = load_scenario(write_scenario(tmp_path))

    assert result.velocity_grid.points_per_axis == 6
    assert result.potential.kind.value == "zero"
    ic(result.content_hash())


def test_load_empty_scenario(tmp_path):
    """Tests."""
    path = tmp_path / "empty.yaml"
    path.write_text("", encoding="utf-8")
    result = load_scenario(path)

    assert result == Scenario()
    ic(result.content_hash())


def test_load_scenario_rejects_small_beta(tmp_path):
    """Tests."""
    path = write_scenario(tmp_path, weight={"beta": 4.0})

    with pytest.raises(ScenarioValidationError, match="beta must exceed 5"):
        load_scenario(path)


def test_load_scenario_rejects_unknown_key(tmp_path):
    """Tests."""
    path = write_scenario(tmp_path, scheme={"time_step": 0.1})

    with pytest.raises(ScenarioValidationError, match="time_step"):
        load_scenario(path)


def test_load_scenario_malformed(tmp_path):
    """Tests."""
    path = tmp_path / "broken.yaml"
    path.write_text("scheme:\n  dt: [0.1\n", encoding="utf-8")

    with pytest.raises(ScenarioParseError, match="broken.yaml:"):
        load_scenario(path)

    path.write_text("- 1\n- 2\n", encoding="utf-8")

    with pytest.raises(ScenarioParseError):
        load_scenario(path)


def test_content_hash_stable(tmp_path):
    """Tests."""
    first = load_scenario(write_scenario(tmp_path))
    second = Scenario.model_validate(small_data())
    result = first.content_hash()

    assert result == second.content_hash()
    assert result != Scenario.model_validate(small_data(seed=8)).content_hash()
    ic(result)


def test_exit_codes():
    """Tests."""
    assert exit_code(ScenarioParseError("bad")) == 2
    assert exit_code(ScenarioValidationError("bad")) == 2
    assert exit_code(NonContractive("diverged")) == 3
    assert exit_code(FileNotFoundError("missing")) == 1

    with pytest.raises(RuntimeError):
        exit_code(RuntimeError("unexpected"))


def test_parser_rejects_unknown_command():
    """Tests."""
    with pytest.raises(SystemExit):
        build_parser().parse_args(["unknown"])


def test_workers_from_environment(monkeypatch):
    """Tests."""
    monkeypatch.setenv("KINETIC_BTE_WORKERS", "0")

    with pytest.raises(ValueError):
        KineticClient(Scenario.model_validate(small_data()))

    monkeypatch.setenv("KINETIC_BTE_WORKERS", "2")
    result = KineticClient(Scenario.model_validate(small_data()))

    assert result.workers == 2
    ic(result.workers)


def test_main_missing_scenario(tmp_path):
    """Tests."""
    result = main(["simulate", "--scenario", str(tmp_path / "missing.yaml"), "--out", str(tmp_path)])

    assert result == 1
    ic(result)


def test_main_invalid_scenario(tmp_path):
    """Tests."""
    path = write_scenario(tmp_path, weight={"beta": 4.0})
    result = main(["simulate", "--scenario", str(path), "--out", str(tmp_path)])

    assert result == 2
    ic(result)


def test_main_simulate_and_report(tmp_path):
    """Tests."""
    path = write_scenario(tmp_path, initial_condition={"kind": "random", "spread": 0.3})
    out = tmp_path / "out"
    result = main(["simulate", "--scenario", str(path), "--out", str(out), "--snapshot-every", "1"])

    assert result == 0
    series = read_series_csv(out / "diagnostics.csv")
    summary = json.loads((out / "simulate.json").read_text(encoding="utf-8"))

    assert series.times == pytest.approx([0.0, 0.01, 0.02])
    assert series.metadata["scenario_hash"] == summary["metadata"]["scenario_hash"]
    assert summary["mass_drift"] <= 1e-3
    ic(summary)

    values, header = read_snapshot(out / "snapshots" / "step_000002")

    assert values.shape == tuple(header["shape"])
    assert values.min() >= 0
    ic(header["metadata"])

    result = main(["report", "--input", str(out / "diagnostics.csv"), "--out", str(out), "--plot"])
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))

    assert result == 0
    assert report["outputs"] == 3
    assert (out / "plots" / "mass.png").exists()
    ic(report)


def test_snapshot_hash_checked(tmp_path):
    """Tests."""
    path = write_scenario(tmp_path)
    out = tmp_path / "out"
    main(["simulate", "--scenario", str(path), "--out", str(out), "--snapshot-every", "2"])
    data = out / "snapshots" / "step_000002.bin"
    payload = bytearray(data.read_bytes())
    payload[0] ^= 0xFF
    data.write_bytes(bytes(payload))

    with pytest.raises(ValueError):
        read_snapshot(out / "snapshots" / "step_000002")


def test_main_cycles_deterministic(tmp_path):
    """Tests."""
    path = write_scenario(tmp_path)
    first, second = tmp_path / "first", tmp_path / "second"

    assert main(["cycles", "--scenario", str(path), "--out", str(first)]) == 0
    assert main(["cycles", "--scenario", str(path), "--out", str(second)]) == 0

    result = (first / "cycles.csv").read_bytes()

    assert result == (second / "cycles.csv").read_bytes()
    ic(result.decode("utf-8"))


def test_main_kernel_check(tmp_path):
    """Tests."""
    path = write_scenario(tmp_path)
    result = main(["kernel-check", "--scenario", str(path), "--out", str(tmp_path)])
    report = json.loads((tmp_path / "kernel_check.json").read_text(encoding="utf-8"))

    assert result == 0
    assert report["equilibrium_residual"] <= 1e-10
    assert report["coercivity"]["spectral_gap"] > 0
    assert report["hydrodynamic_constants"]["beta_c"] == pytest.approx(5.0)
    assert report["raw_symmetry_residual"] == report["coercivity"]["raw_symmetry_residual"]
    assert report["raw_kernel_residual"] > max(report["coercivity"]["kernel_residuals"].values())
    ic(report)

    lines = (tmp_path / "nu.csv").read_text(encoding="utf-8").splitlines()
    header = [line for line in lines if line.startswith("#")]
    rows = np.array([[float(cell) for cell in line.split(",")] for line in lines[len(header) + 1:]])

    assert lines[len(header)] == "speed,nu"
    assert f"# scenario_hash={load_scenario(path).content_hash()}" in header
    assert len(rows) == 6**3
    assert np.all(np.diff(rows[:, 0]) >= 0)
    assert np.all(rows[:, 1] > 0)
    assert np.corrcoef(rows[:, 0], rows[:, 1])[0, 1] > 0.9


def test_main_semigroup(tmp_path):
    """Tests."""
    path = write_scenario(tmp_path)
    result = main(["semigroup", "--scenario", str(path), "--out", str(tmp_path)])
    report = json.loads((tmp_path / "semigroup.json").read_text(encoding="utf-8"))

    assert result == 0
    assert report["mode"] == "nu"
    assert np.isfinite(report["rate"])
    assert 0.9 <= report["rate"] / report["nu0"] <= 1.5
    assert report["r_squared"] >= 0.9
    ic(report)


def test_main_entropy(tmp_path):
    """Tests."""
    path = write_scenario(tmp_path, initial_condition={"kind": "random", "spread": 0.3})
    result = main(["entropy", "--scenario", str(path), "--out", str(tmp_path)])
    report = json.loads((tmp_path / "entropy.json").read_text(encoding="utf-8"))

    assert result == 0
    assert report["entropy0"] > 0
    assert (tmp_path / "entropy.csv").exists()
    assert report["all_passed"]
    assert report["entropy_increases"] == []
    ic(report)


def test_main_picard(tmp_path):
    """Tests."""
    path = write_scenario(tmp_path, scheme={"t_end": 0.01, "picard_max_iterations": 40})
    result = main(["picard", "--scenario", str(path), "--out", str(tmp_path), "--amplitudes", "1e-3", "20", "1e3"])
    report = json.loads((tmp_path / "picard_sweep.json").read_text(encoding="utf-8"))

    assert result == 0
    assert report["threshold"] == PICARD_THRESHOLD
    assert [row["converged"] for row in report["rows"]] == [True, True, False]
    ic(report)


def test_main_picard_non_contractive(tmp_path):
    """Tests."""
    path = write_scenario(
        tmp_path,
        initial_condition={"kind": "small_perturbation", "amplitude": 1e3},
        scheme={"t_end": 0.01, "picard_max_iterations": 40, "picard_smallness": 1e9},
    )
    result = main(["picard", "--scenario", str(path), "--out", str(tmp_path)])

    assert result == 3
    ic(result)


def test_main_picard_smallness(tmp_path):
    """Tests."""
    path = write_scenario(
        tmp_path,
        initial_condition={"kind": "small_perturbation", "amplitude": 20.0},
        scheme={"t_end": 0.01},
    )
    result = main(["picard", "--scenario", str(path), "--out", str(tmp_path)])

    assert result == 3
    assert not (tmp_path / "picard.csv").exists()


def test_main_bump_scenario(tmp_path):
    """Tests."""
    path = write_scenario(
        tmp_path, initial_condition={"kind": "bump", "amplitude": 5.0, "radius": 0.05}, scheme={"t_end": 0.05}
    )
    entropy_result = main(["entropy", "--scenario", str(path), "--out", str(tmp_path)])
    report = json.loads((tmp_path / "entropy.json").read_text(encoding="utf-8"))

    assert entropy_result == 0
    assert report["all_passed"]
    assert report["entropy_increases"] == []
    assert report["warm_up"] is not None
    ic(report)

    simulate_result = main(["simulate", "--scenario", str(path), "--out", str(tmp_path)])
    summary = json.loads((tmp_path / "simulate.json").read_text(encoding="utf-8"))
    series = read_series_csv(tmp_path / "diagnostics.csv")
    late = [ratio for t, ratio in zip(series.times, series.channel("rf_min_ratio")) if t >= report["warm_up"]]

    assert simulate_result == 0
    assert late and min(late) >= 0.5
    assert summary["entropy_increases"] == []
    assert 4.0 <= series.channel("winf_norm")[0] <= 5.0
    assert summary["final_winf_norm"] < PICARD_THRESHOLD
    ic(summary)
