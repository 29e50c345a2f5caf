"""Figure rendering for the report path.

Each CLI command writes its delimited output and, unless figures are
disabled, a PNG rendition next to it.  Figures carry no timestamps so
repeated runs stay byte-stable.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_PNG_META = {"Software": None}


def _save(fig, path):
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)


def render_trajectory(traj, path, title: str = ""):
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    for key in sorted(traj.populations):
        ax.plot(traj.times, traj.populations[key], label=key)
    ax.set_xlabel("time (us)")
    ax.set_ylabel("population")
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_map(smap, path, lineset=None, title: str = ""):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    extent = [
        smap.flux_grid[0],
        smap.flux_grid[-1],
        smap.omega_grid[0],
        smap.omega_grid[-1],
    ]
    im = ax.imshow(
        smap.values.T,
        origin="lower",
        aspect="auto",
        extent=extent,
        cmap="RdBu_r",
        vmin=0.0,
        vmax=1.0,
    )
    if lineset is not None:
        for line in lineset.lines:
            visible = (line.omega_mhz >= smap.omega_grid[0]) & (line.omega_mhz <= smap.omega_grid[-1])
            masked = np.where(visible, line.omega_mhz, np.nan)
            ax.plot(lineset.flux_grid, masked, "k--", lw=0.8)
    ax.set_xlabel("flux (Phi_e / Phi_0)")
    ax.set_ylabel("Rabi amplitude (MHz)")
    if title:
        ax.set_title(title)
    fig.colorbar(im, ax=ax, label="P1")
    fig.tight_layout()
    _save(fig, path)


def render_lines(lineset, path, omega_range=None, title: str = ""):
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    for line in lineset.lines:
        ax.plot(lineset.flux_grid, line.omega_mhz, label=line.name)
    if omega_range is not None:
        ax.set_ylim(*omega_range)
    ax.set_xlabel("flux (Phi_e / Phi_0)")
    ax.set_ylabel("resonant Rabi amplitude (MHz)")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_surface(surface, path, region=None, title: str = ""):
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    gg, mm = np.meshgrid(surface.g_grid, surface.gamma_grid, indexing="ij")
    pc = ax.pcolormesh(gg, mm, surface.sigma, shading="auto", cmap="viridis")
    if region is not None and not region.is_empty:
        ax.contour(gg, mm, region.mask.astype(float), levels=[0.5], colors="k", linewidths=1.0)
    ax.plot(*surface.argmin, "r+", ms=10)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("coupling g (MHz)")
    ax.set_ylabel("defect relaxation rate (1/us)")
    if title:
        ax.set_title(title)
    fig.colorbar(pc, ax=ax, label="sigma")
    fig.tight_layout()
    _save(fig, path)


def render_regions(regions, labels, path, overlap=None, title: str = ""):
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    colors = ["tab:red", "tab:blue", "tab:green", "tab:orange"]
    for region, label, color in zip(regions, labels, colors):
        gg, mm = np.meshgrid(region.g_grid, region.gamma_grid, indexing="ij")
        ax.contour(gg, mm, region.mask.astype(float), levels=[0.5], colors=[color], linewidths=1.0)
        ax.plot([], [], color=color, label=label)
    if overlap is not None and not overlap.is_empty:
        gg, mm = np.meshgrid(overlap.g_grid, overlap.gamma_grid, indexing="ij")
        ax.contourf(gg, mm, overlap.mask.astype(float), levels=[0.5, 1.5], colors=["gold"], alpha=0.6)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("coupling g (MHz)")
    ax.set_ylabel("defect relaxation rate (1/us)")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_spectrum(flux_grid, freqs, path, title: str = ""):
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    ax.plot(flux_grid, [f.omega01 for f in freqs], label="omega01")
    ax.plot(flux_grid, [f.omega12 for f in freqs], label="omega12")
    ax.plot(flux_grid, [f.anharmonicity for f in freqs], label="anharmonicity")
    ax.set_xlabel("flux (Phi_e / Phi_0)")
    ax.set_ylabel("frequency (GHz)")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, path)
