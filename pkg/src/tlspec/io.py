"""Self-describing delimited output files.

Every file is UTF-8 text: a first line ``# schema=<name> version=1``,
further ``#`` lines carrying ``key=value`` metadata (units spelled out in
the key names), one header row, then comma-separated numeric rows printed
with 12 significant digits.  Reading a file back and writing it again
reproduces the bytes exactly, so outputs are diffable and cacheable.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import ConfigError

FORMAT_VERSION = 1
_FLOAT_FMT = ".12g"


def _fmt(x: float) -> str:
    return format(float(x), _FLOAT_FMT)


def write_table(path, schema: str, metadata: dict, header: list[str], rows: np.ndarray) -> None:
    """Write one delimited table with metadata lines."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.size and rows.shape[1] != len(header):
        raise ValueError(f"{len(header)} header fields but rows have {rows.shape[1]} columns")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# schema={schema} version={FORMAT_VERSION}"]
    for key in sorted(metadata):
        value = metadata[key]
        if isinstance(value, float):
            value = _fmt(value)
        lines.append(f"# {key}={value}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_table(path) -> tuple[str, dict[str, str], list[str], np.ndarray]:
    """Read a table written by :func:`write_table`.

    Returns (schema, metadata, header, data); metadata values stay strings.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8").splitlines()
    if not text or not text[0].startswith("# schema="):
        raise ConfigError([f"{path}: not a recognized table (missing schema line)"])
    first = text[0][2:].split()
    schema = first[0].split("=", 1)[1]
    version = int(first[1].split("=", 1)[1])
    if version != FORMAT_VERSION:
        raise ConfigError([f"{path}: unsupported format version {version}"])
    metadata: dict[str, str] = {}
    i = 1
    while i < len(text) and text[i].startswith("#"):
        key, _, value = text[i][1:].strip().partition("=")
        metadata[key.strip()] = value
        i += 1
    if i >= len(text):
        raise ConfigError([f"{path}: missing header row"])
    header = text[i].split(",")
    data_lines = [ln for ln in text[i + 1 :] if ln.strip()]
    if data_lines:
        data = np.array([[float(v) for v in ln.split(",")] for ln in data_lines])
    else:
        data = np.empty((0, len(header)))
    return schema, metadata, header, data


def write_trajectory(path, traj, metadata: dict) -> None:
    """Trajectory file: time column plus one column per population series."""
    keys = sorted(traj.populations)
    header = ["time_us"] + keys
    rows = np.column_stack([traj.times] + [traj.populations[k] for k in keys])
    write_table(path, "trajectory", metadata, header, rows)


def write_map(path, smap, metadata: dict | None = None) -> None:
    """Map file in long format: one row per (flux, omega) cell."""
    meta = dict(smap.metadata)
    if metadata:
        meta.update(metadata)
    meta["flux_points"] = len(smap.flux_grid)
    meta["omega_points"] = len(smap.omega_grid)
    ff, oo = np.meshgrid(smap.flux_grid, smap.omega_grid, indexing="ij")
    rows = np.column_stack(
        [ff.ravel(), oo.ravel(), smap.values.ravel(), smap.baseline.ravel()]
    )
    write_table(path, "map", meta, ["flux", "omega_mhz", "p1", "baseline"], rows)


def read_map(path):
    """Reconstruct the map grids and matrices from a map file."""
    schema, meta, header, data = read_table(path)
    if schema != "map":
        raise ConfigError([f"{path}: expected schema 'map', found '{schema}'"])
    nf, no = int(meta["flux_points"]), int(meta["omega_points"])
    flux = data[:, 0].reshape(nf, no)[:, 0]
    omega = data[:, 1].reshape(nf, no)[0, :]
    values = data[:, 2].reshape(nf, no)
    baseline = data[:, 3].reshape(nf, no)
    return flux, omega, values, baseline, meta


def write_lines(path, lineset, metadata: dict) -> None:
    """Line-prediction file: flux column plus one resonance column per defect."""
    meta = dict(metadata)
    header = ["flux"]
    cols = [np.asarray(lineset.flux_grid)]
    for line in lineset.lines:
        header.append(f"omega_{line.name}_mhz")
        cols.append(line.omega_mhz)
        meta[f"kind_{line.name}"] = line.kind.value
        meta[f"zero_crossings_{line.name}"] = (
            "|".join(format(x, _FLOAT_FMT) for x in line.zero_crossings) or "none"
        )
    write_table(path, "lines", meta, header, np.column_stack(cols))


def write_surface(path, surface, metadata: dict) -> None:
    """Residual surface in long format with the minimum recorded in metadata."""
    meta = dict(metadata)
    meta["sigma_min"] = surface.sigma_min
    meta["argmin_g_mhz"] = surface.argmin[0]
    meta["argmin_gamma_per_us"] = surface.argmin[1]
    meta["g_points"] = len(surface.g_grid)
    meta["gamma_points"] = len(surface.gamma_grid)
    gg, mm = np.meshgrid(surface.g_grid, surface.gamma_grid, indexing="ij")
    rows = np.column_stack([gg.ravel(), mm.ravel(), surface.sigma.ravel()])
    write_table(path, "surface", meta, ["g_mhz", "gamma_per_us", "sigma"], rows)


def write_region(path, region, metadata: dict) -> None:
    """Acceptance-region mask in long format (in_region is 0 or 1)."""
    meta = dict(metadata)
    meta["threshold"] = region.threshold
    meta["empty"] = str(region.is_empty).lower()
    meta["g_points"] = len(region.g_grid)
    meta["gamma_points"] = len(region.gamma_grid)
    gg, mm = np.meshgrid(region.g_grid, region.gamma_grid, indexing="ij")
    rows = np.column_stack([gg.ravel(), mm.ravel(), region.mask.astype(float).ravel()])
    write_table(path, "region", meta, ["g_mhz", "gamma_per_us", "in_region"], rows)


def write_spectrum(path, flux_grid, freqs, metadata: dict) -> None:
    """Qubit transition table against flux."""
    rows = np.column_stack(
        [
            np.asarray(flux_grid),
            [f.omega01 for f in freqs],
            [f.omega12 for f in freqs],
            [f.anharmonicity for f in freqs],
            [f.omega_b for f in freqs],
        ]
    )
    header = ["flux", "omega01_ghz", "omega12_ghz", "anharmonicity_ghz", "omega_b_ghz"]
    write_table(path, "spectrum", metadata, header, rows)


def write_dataset(path, dataset, metadata: dict | None = None) -> None:
    """Decay dataset file; the acquisition parameters ride in the metadata."""
    meta = dict(metadata or {})
    meta.update(
        {
            "omega_mhz": dataset.meta.omega_mhz,
            "delta_mhz": dataset.meta.delta_mhz,
            "sequence": dataset.meta.sequence.value,
            "gamma1q_per_us": dataset.meta.gamma1q,
            "gamma2q_per_us": dataset.meta.gamma2q,
        }
    )
    rows = np.column_stack([dataset.times, dataset.populations])
    write_table(path, "dataset", meta, ["time_us", "population"], rows)


def read_dataset(path):
    """Load a decay dataset file into a :class:`~tlspec.estimation.DecayDataset`."""
    from .estimation import DatasetMeta, DecayDataset
    from .spectroscopy import Sequence

    schema, meta, header, data = read_table(path)
    if schema != "dataset":
        raise ConfigError([f"{path}: expected schema 'dataset', found '{schema}'"])
    required = ("omega_mhz", "delta_mhz", "sequence", "gamma1q_per_us", "gamma2q_per_us")
    missing = [k for k in required if k not in meta]
    if missing:
        raise ConfigError([f"{path}: dataset metadata missing {', '.join(missing)}"])
    ds_meta = DatasetMeta(
        omega_mhz=float(meta["omega_mhz"]),
        delta_mhz=float(meta["delta_mhz"]),
        sequence=Sequence(meta["sequence"]),
        gamma1q=float(meta["gamma1q_per_us"]),
        gamma2q=float(meta["gamma2q_per_us"]),
    )
    if math.isnan(ds_meta.omega_mhz):
        raise ConfigError([f"{path}: omega_mhz is NaN"])
    return DecayDataset(times=data[:, 0], populations=data[:, 1], meta=ds_meta)
