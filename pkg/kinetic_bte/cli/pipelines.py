"""Subcommand pipelines."""

import logging
import math

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..characteristics import Characteristics
from ..client import KineticClient
from ..collision import hydrodynamic_constants
from ..diagnostics import entropy_increases, fit_decay_rate, fit_warm_up
from ..errors import NonPositiveChannel
from ..models.diagnostics import DiagnosticsSeries
from ..models.solver import (
    DampingModeEnum,
    InitialConditionKindEnum,
    PerturbationModeEnum,
    RepresentationEnum,
)
from ..solver import DistributionField
from .outputs import plot_series, read_series_csv, write_json, write_rows_csv, write_series_csv, write_snapshot


logger = logging.getLogger(__name__)


def run_metadata(client: KineticClient) -> Dict[str, str]:
    """Return the metadata embedded in every output file."""
    return {
        "scenario_hash": client.scenario.content_hash(),
        "seed": str(client.context.seed),
        "workers": str(client.workers),
    }


def simulate(client: KineticClient, out: Path) -> Dict[str, Any]:
    """Run the scenario to t_end and write its diagnostics series."""
    metadata = run_metadata(client)

    def snapshot(step: int, t: float, field: DistributionField) -> None:
        write_snapshot(out / "snapshots" / f"step_{step:06d}", field, {**metadata, "t": repr(t)})

    initial = client.solver.initial_condition()
    series = client.solver.run_simulation(initial, on_snapshot=snapshot)
    series.metadata.update(metadata)
    write_series_csv(out / "diagnostics.csv", series)

    mass = series.channel("mass")
    summary = {
        "outputs": len(series.times),
        "cfl": float(series.metadata["cfl"]),
        "mass_drift": float(abs(mass[-1] - mass[0]) / mass[0]) if mass[0] else 0.0,
        "entropy_increases": entropy_increases(series.channel("entropy")),
        "final_winf_norm": float(series.channel("winf_norm")[-1]),
        "final_rf_min_ratio": float(series.channel("rf_min_ratio")[-1]),
    }
    write_json(out / "simulate.json", summary, metadata)

    return summary


def semigroup(client: KineticClient, out: Path) -> Dict[str, Any]:
    """Evolve a bounded h0 by the damped semigroup and fit its sup-norm decay."""
    metadata = run_metadata(client)
    solver = client.solver
    scheme = client.scenario.scheme
    spec = client.scenario.initial_condition
    if spec.kind == InitialConditionKindEnum.EQUILIBRIUM:
        spec = spec.model_copy(
            update={"kind": InitialConditionKindEnum.SMALL_PERTURBATION, "mode": PerturbationModeEnum.RANDOM}
        )
    h = solver.initial_condition(spec, representation=RepresentationEnum.WEIGHTED_PERTURBATION)
    mode = scheme.damping if scheme.damping != DampingModeEnum.NONE else DampingModeEnum.NU
    frozen = h if mode == DampingModeEnum.RF else None

    times, sup = [0.0], [float(np.max(np.abs(h.values)))]
    for step in range(1, scheme.n_steps + 1):
        h = solver.damped_semigroup(h, mode, scheme.dt, frozen=frozen)
        if step % scheme.output_every == 0 or step == scheme.n_steps:
            times.append(step * scheme.dt)
            sup.append(float(np.max(np.abs(h.values))))

    write_rows_csv(out / "semigroup.csv", ["t", "winf_norm"], zip(times, sup), metadata)

    fit = fit_decay_rate(times, sup, window=(0.1 * scheme.t_end, scheme.t_end))
    damping = math.exp(-client.potential.sup_norm) * client.collision.nu0
    summary = {
        "mode": mode.value,
        "rate": fit.rate,
        "r_squared": fit.r_squared,
        "window": list(fit.window),
        "nu0": client.collision.nu0,
        "rate_over_damping": fit.rate / damping,
    }
    write_json(out / "semigroup.json", summary, metadata)

    return summary


def cycles(client: KineticClient, out: Path) -> Dict[str, Any]:
    """Estimate the probabilities that back-time cycles reach index k."""
    metadata = run_metadata(client)
    spec = client.scenario.cycles
    settings = client.scenario.characteristics.model_copy(update={"step_fraction": spec.step_fraction})
    characteristics = Characteristics(client.domain, client.potential, settings=settings, workers=client.workers)

    estimates = characteristics.cycle_reach_probabilities(
        spec.t, spec.x, spec.v, spec.ks, n_samples=spec.n_samples, seed=client.context.seed
    )
    write_rows_csv(
        out / "cycles.csv",
        ["k", "estimate", "std_error", "n_samples", "seed"],
        ([e.k, e.estimate, e.std_error, e.n_samples, e.seed] for e in estimates),
        metadata,
    )

    summary = {"estimates": [estimate.model_dump() for estimate in estimates]}
    write_json(out / "cycles.json", summary, metadata)

    return summary


def kernel_check(client: KineticClient, out: Path) -> Dict[str, Any]:
    """Check the structure of the collision operators on the velocity grid."""
    metadata = run_metadata(client)
    collision = client.collision
    grid = client.context.velocity_grid
    rng = np.random.default_rng(client.context.seed)

    equilibrium = collision.collision(grid.mu, grid.mu)
    sample = grid.mu * (1.0 + 0.5 * rng.uniform(-1.0, 1.0, (4, len(grid))))
    symmetrized = collision.collision(sample, sample, symmetrized=True)
    moments = np.abs(symmetrized @ (grid.invariants() * grid.weights[:, None]))

    report = client.diagnostics.coercivity_report()
    lower, upper = collision.frequency_bounds()
    speeds = np.linalg.norm(grid.nodes, axis=-1)
    order = np.argsort(speeds, kind="stable")
    write_rows_csv(out / "nu.csv", ["speed", "nu"], zip(speeds[order], collision.nu[order]), metadata)
    decay = collision.kernel_decay_fit(
        client.context.linear_operator, client.scenario.weight, client.potential, np.zeros(3)
    )

    summary = {
        "equilibrium_residual": float(np.max(np.abs(equilibrium) / grid.mu)),
        "invariant_residual": float(moments.max()),
        "coercivity": report.model_dump(),
        "raw_symmetry_residual": report.raw_symmetry_residual,
        "raw_kernel_residual": max(report.raw_kernel_residuals.values()),
        "frequency_bounds": [lower, upper],
        "kernel_decay": decay,
        "hydrodynamic_constants": hydrodynamic_constants(),
    }
    write_json(out / "kernel_check.json", summary, metadata)

    return summary


def entropy(client: KineticClient, out: Path) -> Dict[str, Any]:
    """Run the positivity scheme and monitor the entropy inequalities at every output."""
    metadata = run_metadata(client)
    diagnostics = client.diagnostics
    initial = client.solver.initial_condition()
    entropy0 = diagnostics.relative_entropy(initial)
    rows: List[List[Any]] = []

    def check(step: int, t: float, field: DistributionField) -> None:
        report = diagnostics.entropy_l1l2_check(field, entropy0, tolerance=1e-8)
        rows.append([t, report.entropy, report.lhs, report.bound, report.passed])

    series = client.solver.run_simulation(initial, on_output=check)
    write_rows_csv(out / "entropy.csv", ["t", "entropy", "lhs", "bound", "passed"], rows, metadata)

    summary = {
        "entropy0": entropy0,
        "all_passed": all(row[-1] for row in rows),
        "entropy_increases": entropy_increases(series.channel("entropy")),
        "warm_up": fit_warm_up(series.times, series.channel("rf_min_ratio")),
    }
    write_json(out / "entropy.json", summary, metadata)

    return summary


def picard(client: KineticClient, out: Path, amplitudes: Optional[Sequence[float]] = None) -> Dict[str, Any]:
    """Run the Picard iteration on the scenario data, or sweep amplitudes for the contraction threshold."""
    metadata = run_metadata(client)
    solver = client.solver

    if amplitudes:
        sweep = solver.picard_threshold(amplitudes)
        write_rows_csv(
            out / "picard_sweep.csv",
            ["amplitude", "converged", "iterations", "last_residual"],
            (
                [row["amplitude"], row["converged"], len(row["residuals"]), (row["residuals"] or [math.nan])[-1]]
                for row in sweep["rows"]
            ),
            metadata,
        )
        write_json(out / "picard_sweep.json", sweep, metadata)
        return sweep

    h0 = solver.initial_condition(representation=RepresentationEnum.WEIGHTED_PERTURBATION)
    result = solver.picard_mild_iteration(h0)
    write_rows_csv(
        out / "picard.csv",
        ["iteration", "residual", "ratio", "nonlinear_norm"],
        (
            [i.iteration, i.residual, math.nan if i.ratio is None else i.ratio, i.nonlinear_norm]
            for i in result.iterates
        ),
        metadata,
    )

    summary = {
        "converged": result.converged,
        "iterations": len(result.iterates),
        "residuals": [i.residual for i in result.iterates],
        "final_sup": float(np.max(np.abs(result.trajectory[-1]))),
    }
    write_json(out / "picard.json", summary, metadata)

    return summary


def report(series_path: Path, out: Path, plot: bool = False) -> Dict[str, Any]:
    """Summarize a diagnostics CSV into fitted rates and pass/fail checks."""
    series: DiagnosticsSeries = read_series_csv(series_path)
    metadata = dict(series.metadata)
    summary: Dict[str, Any] = {"outputs": len(series.times)}

    if "mass" in series.channels:
        mass = series.channel("mass")
        summary["mass_drift"] = float(abs(mass[-1] - mass[0]) / mass[0]) if mass[0] else 0.0
    if "entropy" in series.channels:
        increases = entropy_increases(series.channel("entropy"))
        summary["entropy_nonincreasing"] = not increases
        summary["entropy_increases"] = increases
    if "winf_norm" in series.channels and len(series.times) > 1:
        try:
            fit = fit_decay_rate(series.times, series.channel("winf_norm"))
            summary["winf_decay"] = fit.model_dump()
        except (NonPositiveChannel, ValueError) as error:
            logger.warning("No decay fit: %s", error)
            summary["winf_decay"] = None
    if "rf_min_ratio" in series.channels:
        summary["rf_warm_up"] = fit_warm_up(series.times, series.channel("rf_min_ratio"))

    if plot:
        summary["plots"] = [str(path) for path in plot_series(series, out / "plots")]

    write_json(out / "report.json", summary, metadata)

    return summary
