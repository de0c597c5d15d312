"""Output writers: CSV series, JSON reports, snapshots and plots."""

import csv
import hashlib
import json
import logging

from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..models.diagnostics import DIAGNOSTICS_COLUMNS, DiagnosticsSeries  # noqa: E402
from ..solver import DistributionField  # noqa: E402


logger = logging.getLogger(__name__)

SNAPSHOT_DTYPE = "<f8"


def _number(value: Any) -> str:
    """Format a number with round-trip precision."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _plain(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def write_rows_csv(
    path: Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    metadata: Dict[str, str],
) -> Path:
    """Write rows under a commented metadata header."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        for key in sorted(metadata):
            handle.write(f"# {key}={metadata[key]}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_number(value) for value in row])

    logger.info("Wrote %s", path)
    return path


def write_series_csv(path: Path, series: DiagnosticsSeries) -> Path:
    """Write a diagnostics series with columns t and the diagnostics channels."""
    names = [name for name in DIAGNOSTICS_COLUMNS if name in series.channels]
    names += sorted(set(series.channels) - set(names))
    rows = zip(series.times, *(series.channels[name] for name in names))

    return write_rows_csv(path, ["t", *names], rows, series.metadata)


def read_rows_csv(path: Path) -> Tuple[Dict[str, str], List[str], List[List[str]]]:
    """Read the metadata header, the column names and the rows of a CSV output."""
    metadata: Dict[str, str] = {}
    with path.open("r", encoding="utf-8", newline="") as handle:
        lines = handle.read().splitlines()

    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            metadata[key] = value
        elif line:
            body.append(line)

    reader = list(csv.reader(body))
    if not reader:
        raise ValueError(f"{path} has no header row")

    return metadata, reader[0], reader[1:]


def read_series_csv(path: Path) -> DiagnosticsSeries:
    """Read a diagnostics series written by write_series_csv."""
    metadata, columns, rows = read_rows_csv(path)
    if not columns or columns[0] != "t":
        raise ValueError(f"{path} does not start with a t column")

    values = np.asarray(rows, dtype=float).reshape(len(rows), len(columns))
    return DiagnosticsSeries(
        times=values[:, 0].tolist(),
        channels={name: values[:, k].tolist() for k, name in enumerate(columns) if k},
        metadata=metadata,
    )


def write_json(path: Path, payload: Dict[str, Any], metadata: Dict[str, str]) -> Path:
    """Write a JSON report carrying the run metadata."""
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {**payload, "metadata": metadata}
    path.write_text(json.dumps(document, indent=2, sort_keys=True, default=_plain) + "\n", encoding="utf-8")

    logger.info("Wrote %s", path)
    return path


def write_snapshot(path: Path, field: DistributionField, metadata: Dict[str, str]) -> Tuple[Path, Path]:
    """Write node values as raw little-endian float64 next to a JSON header."""
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = np.ascontiguousarray(field.values, dtype=SNAPSHOT_DTYPE).tobytes()
    data_path = path.with_suffix(".bin")
    header_path = path.with_suffix(".json")

    header = {
        "shape": list(field.values.shape),
        "dtype": SNAPSHOT_DTYPE,
        "representation": field.representation.value,
        "sha256": hashlib.sha256(payload).hexdigest(),
        "spatial_grid": {
            "points_per_axis": field.spatial_grid.points_per_axis,
            "spacing": field.spatial_grid.spacing,
            "origin": field.spatial_grid.origin.tolist(),
        },
        "velocity_grid": {
            "cutoff": field.velocity_grid.cutoff,
            "points_per_axis": field.velocity_grid.points_per_axis,
        },
        "metadata": metadata,
    }
    data_path.write_bytes(payload)
    header_path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    return header_path, data_path


def read_snapshot(path: Path) -> Tuple[np.ndarray, Dict[str, Any]]:
    """Reload snapshot values and header, checking the content hash."""
    header = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    payload = path.with_suffix(".bin").read_bytes()
    if hashlib.sha256(payload).hexdigest() != header["sha256"]:
        raise ValueError(f"{path} does not match its recorded hash")

    values = np.frombuffer(payload, dtype=header["dtype"]).reshape(header["shape"]).astype(float)
    return values, header


def plot_series(series: DiagnosticsSeries, directory: Path) -> List[Path]:
    """Render every diagnostics channel against time as a PNG."""
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, values in sorted(series.channels.items()):
        figure, axis = plt.subplots(figsize=(6, 4))
        axis.plot(series.times, values, marker=".")
        if name in ("winf_norm", "l2_norm", "gamma_plus_norm") and min(values, default=0.0) > 0:
            axis.set_yscale("log")
        axis.set_xlabel("t")
        axis.set_ylabel(name)
        axis.set_title(f"{name} ({series.metadata.get('scenario_hash', '')})")
        figure.tight_layout()
        path = directory / f"{name}.png"
        figure.savefig(path, dpi=150)
        plt.close(figure)
        paths.append(path)

    logger.info("Wrote %d plots to %s", len(paths), directory)
    return paths
