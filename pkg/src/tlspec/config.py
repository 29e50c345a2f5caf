"""Run configuration: JSON with unit-suffixed keys, validated exhaustively.

Unknown keys are errors (no silent typo absorption), unit suffixes are part
of the key names so a GHz/MHz mix-up cannot parse, and every violation in a
file is reported at once.  Referenced dataset files must exist at parse
time; relative paths resolve against the config file's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .model import CouplingKind, DefectSpec, QubitDeviceParams
from .spectroscopy import DefectCatalog, Sequence

_TOP_KEYS = {"note", "device", "defects", "drive", "simulate", "grids", "estimation", "output"}

_DEVICE_KEYS = {
    "e_cs_ghz": True,
    "e_j_ghz": True,
    "alpha": True,
    "e_c_ghz": False,
    "gamma1q_per_us": False,
    "gamma2q_per_us": False,
}
_DEFECT_KEYS = {
    "name": True,
    "kind": True,
    "omega_tls_ghz": True,
    "g_mhz": True,
    "gamma1tls_per_us": True,
}
_DRIVE_KEYS = {
    "sequence": True,
    "omega_mhz": True,
    "tau_us": True,
    "qubit_levels": False,
    "cycle": False,
    "time_points": False,
}
_SIMULATE_KEYS = {"defect": True, "detuning_mhz": True, "a_ghz": False}
_GRID_KEYS = {
    "flux_min": True,
    "flux_max": True,
    "flux_points": True,
    "omega_min_mhz": True,
    "omega_max_mhz": True,
    "omega_points": True,
}
_ESTIMATION_KEYS = {
    "datasets": True,
    "kind": True,
    "a_ghz": True,
    "qubit_levels": False,
    "g_min_mhz": False,
    "g_max_mhz": False,
    "g_points": False,
    "gamma_min_per_us": False,
    "gamma_max_per_us": False,
    "gamma_points": False,
    "threshold_factor": False,
    "noise_sigma": False,
}
_OUTPUT_KEYS = {"dir": True}


@dataclass
class DriveSection:
    sequence: Sequence
    omega_mhz: float
    tau_us: float
    qubit_levels: int = 3
    cycle: bool = False
    time_points: int = 601


@dataclass
class SimulateSection:
    defect: str
    detuning_mhz: float
    a_ghz: float | None = None


@dataclass
class GridSection:
    flux_min: float
    flux_max: float
    flux_points: int
    omega_min_mhz: float
    omega_max_mhz: float
    omega_points: int


@dataclass
class EstimationSection:
    datasets: list[Path]
    kind: CouplingKind
    a_ghz: float
    qubit_levels: int = 3
    g_min_mhz: float = 1.0
    g_max_mhz: float = 40.0
    g_points: int = 60
    gamma_min_per_us: float = 0.2
    gamma_max_per_us: float = 10.0
    gamma_points: int = 60
    threshold_factor: float = 2.0
    noise_sigma: float = 0.01


@dataclass
class RunConfig:
    """Fully validated run description."""

    source: Path
    note: str = ""
    device: QubitDeviceParams | None = None
    catalog: DefectCatalog = field(default_factory=lambda: DefectCatalog(defects=()))
    drive: DriveSection | None = None
    simulate: SimulateSection | None = None
    grids: GridSection | None = None
    estimation: EstimationSection | None = None
    out_dir: Path = Path("out")

    def require(self, *sections: str):
        missing = [s for s in sections if getattr(self, s) is None]
        if missing:
            raise ConfigError([f"config is missing the '{s}' section required by this command" for s in missing])


def _check_keys(section: str, obj: dict, allowed: dict, violations: list[str]):
    for key in obj:
        if key not in allowed:
            violations.append(f"{section}: unknown key '{key}'")
    for key, required in allowed.items():
        if required and key not in obj:
            violations.append(f"{section}: missing required key '{key}'")


def _number(section: str, obj: dict, key: str, violations: list[str], default=None):
    if key not in obj:
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        violations.append(f"{section}: '{key}' must be a number, got {value!r}")
        return default
    return float(value)


def _integer(section: str, obj: dict, key: str, violations: list[str], default=None):
    if key not in obj:
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        violations.append(f"{section}: '{key}' must be an integer, got {value!r}")
        return default
    return value


def parse_config(path) -> RunConfig:
    """Parse and validate a config file, reporting every violation at once."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError([f"config file not found: {path}"])
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: invalid JSON ({exc})"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError([f"{path}: top level must be an object"])

    violations: list[str] = []
    for key in raw:
        if key not in _TOP_KEYS:
            violations.append(f"top level: unknown key '{key}'")

    cfg = RunConfig(source=path)
    if "note" in raw and not isinstance(raw["note"], str):
        violations.append("note: must be a string")
    else:
        cfg.note = raw.get("note", "")

    if "device" in raw:
        sec = raw["device"]
        if not isinstance(sec, dict):
            violations.append("device: must be an object")
        else:
            _check_keys("device", sec, _DEVICE_KEYS, violations)
            ecs = _number("device", sec, "e_cs_ghz", violations)
            ej = _number("device", sec, "e_j_ghz", violations)
            alpha = _number("device", sec, "alpha", violations)
            ec = _number("device", sec, "e_c_ghz", violations)
            g1 = _number("device", sec, "gamma1q_per_us", violations, 0.0)
            g2 = _number("device", sec, "gamma2q_per_us", violations, 0.0)
            if None not in (ecs, ej, alpha):
                try:
                    cfg.device = QubitDeviceParams(
                        ECS=ecs, EJ=ej, alpha=alpha, gamma1q=g1, gamma2q=g2, EC=ec
                    )
                except ValueError as exc:
                    violations.append(f"device: {exc}")

    if "defects" in raw:
        sec = raw["defects"]
        if not isinstance(sec, list):
            violations.append("defects: must be a list")
        else:
            defects = []
            for n, item in enumerate(sec):
                label = f"defects[{n}]"
                if not isinstance(item, dict):
                    violations.append(f"{label}: must be an object")
                    continue
                _check_keys(label, item, _DEFECT_KEYS, violations)
                name = item.get("name")
                if not isinstance(name, str) or not name:
                    violations.append(f"{label}: 'name' must be a non-empty string")
                    name = f"defect{n}"
                kind_raw = item.get("kind")
                try:
                    kind = CouplingKind(kind_raw)
                except ValueError:
                    violations.append(
                        f"{label}: kind {kind_raw!r} not one of "
                        f"{[k.value for k in CouplingKind]}"
                    )
                    kind = None
                freq = _number(label, item, "omega_tls_ghz", violations)
                g = _number(label, item, "g_mhz", violations)
                gamma = _number(label, item, "gamma1tls_per_us", violations)
                if kind is not None and None not in (freq, g, gamma):
                    try:
                        defects.append(
                            DefectSpec(kind=kind, omega_tls=freq, g=g, gamma1tls=gamma, name=name)
                        )
                    except ValueError as exc:
                        violations.append(f"{label}: {exc}")
            try:
                cfg.catalog = DefectCatalog(defects=tuple(defects))
            except ValueError as exc:
                violations.append(f"defects: {exc}")

    if "drive" in raw:
        sec = raw["drive"]
        if not isinstance(sec, dict):
            violations.append("drive: must be an object")
        else:
            _check_keys("drive", sec, _DRIVE_KEYS, violations)
            seq_raw = sec.get("sequence", "S1")
            try:
                seq = Sequence(seq_raw)
            except ValueError:
                violations.append(f"drive: sequence {seq_raw!r} must be 'S1' or 'S2'")
                seq = Sequence.S1
            omega = _number("drive", sec, "omega_mhz", violations)
            tau = _number("drive", sec, "tau_us", violations)
            levels = _integer("drive", sec, "qubit_levels", violations, 3)
            points = _integer("drive", sec, "time_points", violations, 601)
            cycle = sec.get("cycle", False)
            if not isinstance(cycle, bool):
                violations.append("drive: 'cycle' must be a boolean")
                cycle = False
            if None not in (omega, tau):
                if omega < 0:
                    violations.append("drive: omega_mhz must be non-negative")
                if tau <= 0:
                    violations.append("drive: tau_us must be positive")
                if not 2 <= levels <= 10:
                    violations.append("drive: qubit_levels must be in [2, 10]")
                if points < 2:
                    violations.append("drive: time_points must be at least 2")
                cfg.drive = DriveSection(
                    sequence=seq, omega_mhz=omega, tau_us=tau,
                    qubit_levels=levels, cycle=cycle, time_points=points,
                )

    if "simulate" in raw:
        sec = raw["simulate"]
        if not isinstance(sec, dict):
            violations.append("simulate: must be an object")
        else:
            _check_keys("simulate", sec, _SIMULATE_KEYS, violations)
            target = sec.get("defect")
            if not isinstance(target, str):
                violations.append("simulate: 'defect' must name a catalog entry")
                target = ""
            detuning = _number("simulate", sec, "detuning_mhz", violations)
            a_ghz = _number("simulate", sec, "a_ghz", violations)
            if detuning is not None:
                cfg.simulate = SimulateSection(defect=target, detuning_mhz=detuning, a_ghz=a_ghz)

    if "grids" in raw:
        sec = raw["grids"]
        if not isinstance(sec, dict):
            violations.append("grids: must be an object")
        else:
            _check_keys("grids", sec, _GRID_KEYS, violations)
            fmin = _number("grids", sec, "flux_min", violations)
            fmax = _number("grids", sec, "flux_max", violations)
            fpts = _integer("grids", sec, "flux_points", violations)
            omin = _number("grids", sec, "omega_min_mhz", violations)
            omax = _number("grids", sec, "omega_max_mhz", violations)
            opts = _integer("grids", sec, "omega_points", violations)
            if None not in (fmin, fmax, fpts, omin, omax, opts):
                if fmin >= fmax:
                    violations.append("grids: flux_min must be below flux_max")
                if omin >= omax:
                    violations.append("grids: omega_min_mhz must be below omega_max_mhz")
                if fpts < 1 or opts < 1:
                    violations.append("grids: grid point counts must be positive")
                cfg.grids = GridSection(fmin, fmax, fpts, omin, omax, opts)

    if "estimation" in raw:
        sec = raw["estimation"]
        if not isinstance(sec, dict):
            violations.append("estimation: must be an object")
        else:
            _check_keys("estimation", sec, _ESTIMATION_KEYS, violations)
            datasets_raw = sec.get("datasets")
            datasets: list[Path] = []
            if not isinstance(datasets_raw, list) or not datasets_raw:
                violations.append("estimation: 'datasets' must be a non-empty list of paths")
            else:
                for item in datasets_raw:
                    if not isinstance(item, str):
                        violations.append(f"estimation: dataset path {item!r} must be a string")
                        continue
                    resolved = (path.parent / item).resolve()
                    if not resolved.is_file():
                        violations.append(f"estimation: dataset file not found: {resolved}")
                    datasets.append(resolved)
            kind_raw = sec.get("kind")
            try:
                kind = CouplingKind(kind_raw)
            except ValueError:
                violations.append(f"estimation: kind {kind_raw!r} invalid")
                kind = CouplingKind.NONLINEAR_CURRENT
            a_ghz = _number("estimation", sec, "a_ghz", violations)
            est = EstimationSection(datasets=datasets, kind=kind, a_ghz=a_ghz or 0.0)
            est.qubit_levels = _integer("estimation", sec, "qubit_levels", violations, 3)
            est.g_min_mhz = _number("estimation", sec, "g_min_mhz", violations, est.g_min_mhz)
            est.g_max_mhz = _number("estimation", sec, "g_max_mhz", violations, est.g_max_mhz)
            est.g_points = _integer("estimation", sec, "g_points", violations, est.g_points)
            est.gamma_min_per_us = _number("estimation", sec, "gamma_min_per_us", violations, est.gamma_min_per_us)
            est.gamma_max_per_us = _number("estimation", sec, "gamma_max_per_us", violations, est.gamma_max_per_us)
            est.gamma_points = _integer("estimation", sec, "gamma_points", violations, est.gamma_points)
            est.threshold_factor = _number("estimation", sec, "threshold_factor", violations, est.threshold_factor)
            est.noise_sigma = _number("estimation", sec, "noise_sigma", violations, est.noise_sigma)
            if est.g_min_mhz <= 0 or est.gamma_min_per_us <= 0:
                violations.append("estimation: scan bounds must be positive")
            if est.threshold_factor <= 1.0:
                violations.append("estimation: threshold_factor must exceed 1")
            if a_ghz is not None and a_ghz == 0.0:
                violations.append("estimation: a_ghz must be non-zero")
            cfg.estimation = est

    if "output" in raw:
        sec = raw["output"]
        if not isinstance(sec, dict):
            violations.append("output: must be an object")
        else:
            _check_keys("output", sec, _OUTPUT_KEYS, violations)
            if isinstance(sec.get("dir"), str):
                cfg.out_dir = Path(sec["dir"])
            else:
                violations.append("output: 'dir' must be a string")

    if cfg.simulate is not None and cfg.simulate.defect:
        names = {d.name for d in cfg.catalog.defects}
        if cfg.simulate.defect not in names:
            violations.append(f"simulate: defect '{cfg.simulate.defect}' not in the catalog")

    if violations:
        raise ConfigError(violations)
    return cfg
