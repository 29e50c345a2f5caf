"""Command-line surface: spectrum, simulate, sweep, predict, fit, rabi.

Every command reads one validated config (a user file via ``--config`` or a
bundled preset via ``--preset``), writes self-describing delimited files
into the output directory, and renders matching PNG figures unless
``--no-figures`` is given.  Exit codes: 0 success, 2 config error,
3 numerical error.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import estimation, io, model, plots, spectroscopy
from .config import RunConfig, parse_config
from .errors import ConfigError, ConvergenceError, NumericalInstabilityError
from .model import FluxBias
from .qops import HilbertSpec
from .spectroscopy import SpinLockConfig

PRESETS = ("fig1-offres", "fig1-res", "fig2", "fig4-catalog", "e3-fit")


def _preset_path(name: str) -> Path:
    if name not in PRESETS:
        raise ConfigError([f"unknown preset '{name}'; available: {', '.join(PRESETS)}"])
    return Path(resources.files("tlspec") / "presets" / f"{name}.json")


def _load_config(args) -> RunConfig:
    if bool(args.config) == bool(args.preset):
        raise ConfigError(["give exactly one of --config or --preset"])
    path = Path(args.config) if args.config else _preset_path(args.preset)
    cfg = parse_config(path)
    if args.out:
        cfg.out_dir = Path(args.out)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    return cfg


def _flux_grid(grids) -> np.ndarray:
    return np.linspace(grids.flux_min, grids.flux_max, grids.flux_points)


def _omega_grid(grids) -> np.ndarray:
    return np.linspace(grids.omega_min_mhz, grids.omega_max_mhz, grids.omega_points)


def _spinlock_config(drive) -> SpinLockConfig:
    return SpinLockConfig(
        sequence=drive.sequence,
        omega_mhz=drive.omega_mhz,
        tau_us=drive.tau_us,
        spec=HilbertSpec(drive.qubit_levels),
        time_points=drive.time_points,
    )


def _find_defect(cfg: RunConfig, name: str):
    for d in cfg.catalog.defects:
        if d.name == name:
            return d
    raise ConfigError([f"defect '{name}' not found in the catalog"])


def _anharmonicity(cfg: RunConfig, a_ghz):
    if a_ghz is not None:
        return a_ghz
    if cfg.device is None:
        raise ConfigError(["either simulate.a_ghz or a device section is required"])
    return model.csfq_frequencies(cfg.device, FluxBias(0.5)).anharmonicity


def _common_meta(cfg: RunConfig, args) -> dict:
    return {"config": cfg.source.name, "seed": args.seed}


def cmd_spectrum(cfg: RunConfig, args) -> int:
    cfg.require("device", "grids")
    flux = _flux_grid(cfg.grids)
    freqs = [model.csfq_frequencies(cfg.device, FluxBias(f)) for f in flux]
    out = cfg.out_dir / "spectrum.csv"
    io.write_spectrum(out, flux, freqs, _common_meta(cfg, args))
    print(f"wrote {out}")
    if not args.no_figures:
        plots.render_spectrum(flux, freqs, cfg.out_dir / "spectrum.png", title=cfg.note)
    return 0


def cmd_simulate(cfg: RunConfig, args) -> int:
    cfg.require("drive", "simulate")
    defect = _find_defect(cfg, cfg.simulate.defect)
    a_ghz = _anharmonicity(cfg, cfg.simulate.a_ghz)
    slc = _spinlock_config(cfg.drive)
    gamma1q = cfg.device.gamma1q if cfg.device else 0.0
    gamma2q = cfg.device.gamma2q if cfg.device else 0.0
    traj = spectroscopy.simulate_spinlock(
        slc, defect, cfg.simulate.detuning_mhz, a_ghz, (gamma1q, gamma2q, defect.gamma1tls)
    )
    meta = _common_meta(cfg, args)
    meta.update(
        {
            "defect": defect.name,
            "detuning_mhz": cfg.simulate.detuning_mhz,
            "omega_mhz": cfg.drive.omega_mhz,
            "sequence": cfg.drive.sequence.value,
            "a_ghz": a_ghz,
        }
    )
    out = cfg.out_dir / "trajectory.csv"
    io.write_trajectory(out, traj, meta)
    print(f"wrote {out}")
    if not args.no_figures:
        plots.render_trajectory(traj, cfg.out_dir / "trajectory.png", title=cfg.note)
    return 0


def cmd_sweep(cfg: RunConfig, args) -> int:
    cfg.require("device", "drive", "grids")
    flux = _flux_grid(cfg.grids)
    omegas = _omega_grid(cfg.grids)
    slc = _spinlock_config(cfg.drive)
    smap = spectroscopy.sweep_map(
        cfg.device, cfg.catalog, flux, omegas, slc, cycle=cfg.drive.cycle, workers=args.workers
    )
    lines = spectroscopy.predict_lines(cfg.device, cfg.catalog, flux)
    meta = _common_meta(cfg, args)
    map_path = cfg.out_dir / "map.csv"
    io.write_map(map_path, smap, meta)
    lines_path = cfg.out_dir / "lines.csv"
    io.write_lines(lines_path, lines, meta)
    print(f"wrote {map_path}")
    print(f"wrote {lines_path}")
    if not args.no_figures:
        plots.render_map(smap, cfg.out_dir / "map.png", lineset=lines, title=cfg.note)
    return 0


def cmd_predict(cfg: RunConfig, args) -> int:
    cfg.require("device", "grids")
    flux = _flux_grid(cfg.grids)
    lines = spectroscopy.predict_lines(cfg.device, cfg.catalog, flux)
    out = cfg.out_dir / "lines.csv"
    io.write_lines(out, lines, _common_meta(cfg, args))
    print(f"wrote {out}")
    if not args.no_figures:
        plots.render_lines(
            lines,
            cfg.out_dir / "lines.png",
            omega_range=(cfg.grids.omega_min_mhz, cfg.grids.omega_max_mhz),
            title=cfg.note,
        )
    return 0


def cmd_fit(cfg: RunConfig, args) -> int:
    cfg.require("estimation")
    est = cfg.estimation
    fit = estimation.FitModel(kind=est.kind, a_ghz=est.a_ghz, spec=HilbertSpec(est.qubit_levels))
    g_grid = np.geomspace(est.g_min_mhz, est.g_max_mhz, est.g_points)
    gamma_grid = np.geomspace(est.gamma_min_per_us, est.gamma_max_per_us, est.gamma_points)
    regions = []
    labels = []
    for k, ds_path in enumerate(est.datasets):
        data = io.read_dataset(ds_path)
        surface = estimation.grid_scan(data, fit, g_grid, gamma_grid, workers=args.workers)
        region = estimation.optimal_region(surface, est.threshold_factor)
        regions.append(region)
        labels.append(f"delta_omega={data.meta.delta_omega_mhz:g} MHz")
        meta = _common_meta(cfg, args)
        meta["dataset"] = Path(ds_path).name
        meta["delta_omega_mhz"] = data.meta.delta_omega_mhz
        io.write_surface(cfg.out_dir / f"surface_{k}.csv", surface, meta)
        io.write_region(cfg.out_dir / f"region_{k}.csv", region, meta)
        print(f"wrote {cfg.out_dir / f'surface_{k}.csv'} (sigma_min={surface.sigma_min:.4g}, "
              f"argmin g={surface.argmin[0]:.3g} MHz, gamma={surface.argmin[1]:.3g} /us)")
        if not args.no_figures:
            plots.render_surface(
                surface, cfg.out_dir / f"surface_{k}.png", region=region, title=labels[-1]
            )
    overlap = regions[0]
    for region in regions[1:]:
        overlap = estimation.region_overlap(overlap, region)
    if len(regions) < 2:
        print("warning: a single dataset leaves the coupling/relaxation valley degenerate; "
              "add a detuned dataset for a bounded estimate")
    meta = _common_meta(cfg, args)
    meta["empty"] = str(overlap.is_empty).lower()
    io.write_region(cfg.out_dir / "overlap.csv", overlap, meta)
    print(f"wrote {cfg.out_dir / 'overlap.csv'} (empty={overlap.is_empty})")
    if not args.no_figures:
        plots.render_regions(regions, labels, cfg.out_dir / "regions.png", overlap=overlap, title=cfg.note)
    return 0


def cmd_rabi(cfg: RunConfig, args) -> int:
    cfg.require("device", "drive", "simulate")
    defect = _find_defect(cfg, cfg.simulate.defect)
    traj = spectroscopy.simulate_rabi(
        cfg.device,
        defect,
        cfg.drive.omega_mhz,
        cfg.simulate.detuning_mhz,
        cfg.drive.tau_us,
        spec=HilbertSpec(cfg.drive.qubit_levels),
        time_points=cfg.drive.time_points,
    )
    meta = _common_meta(cfg, args)
    meta.update({"defect": defect.name, "detuning_mhz": cfg.simulate.detuning_mhz})
    out = cfg.out_dir / "rabi.csv"
    io.write_trajectory(out, traj, meta)
    print(f"wrote {out}")
    if not args.no_figures:
        plots.render_trajectory(traj, cfg.out_dir / "rabi.png", title=cfg.note)
    return 0


_COMMANDS = {
    "spectrum": (cmd_spectrum, "qubit transition table vs flux from exact diagonalization"),
    "simulate": (cmd_simulate, "one spin-locking trajectory at a fixed detuning"),
    "sweep": (cmd_sweep, "synthesize the (flux x drive-amplitude) spectroscopy map"),
    "predict": (cmd_predict, "defect resonance curves and polarity-flip fluxes"),
    "fit": (cmd_fit, "residual-grid defect estimation from decay datasets"),
    "rabi": (cmd_rabi, "Rabi-drive decay from the bare qubit ground state"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tlspec",
        description="Strong-drive TLS-defect spectroscopy: simulation, map synthesis and fitting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="path to a run configuration file")
        p.add_argument("--preset", help=f"bundled preset: {', '.join(PRESETS)}")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, default=0, help="seed for any synthetic randomness")
        p.add_argument("--workers", type=int, default=1, help="parallel grid workers")
        p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        return _COMMANDS[args.command][0](cfg, args)
    except ConfigError as exc:
        for line in exc.violations:
            print(f"config error: {line}", file=sys.stderr)
        return 2
    except (ConvergenceError, NumericalInstabilityError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
