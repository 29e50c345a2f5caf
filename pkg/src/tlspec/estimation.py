"""Defect parameter estimation from time-domain spin-locking decay data.

The fitting procedure mirrors the measurement protocol: a dense residual
scan over the (coupling, defect-relaxation) plane, an optimal region at
2 * sigma_min per dataset, and the intersection of regions across datasets.
A single on-resonance dataset leaves the (g^2 / Gamma) Purcell valley
degenerate; a second, detuned dataset is what pins the estimate down, so
the grid scan is preferred over gradient descent by design.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory, population, propagate, liouvillian
from .model import CouplingKind, DefectSpec
from .qops import HilbertSpec
from .spectroscopy import (
    Sequence,
    _hamiltonian,
    _initial_state,
    _iplus_projectors,
    collapse_set,
)

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi

# Toolkit default scan bounds: g/2pi in [1, 40] MHz, Gamma in [0.2, 10] /us,
# 60 x 60 log-spaced.
DEFAULT_G_GRID = tuple(np.geomspace(1.0, 40.0, 60))
DEFAULT_GAMMA_GRID = tuple(np.geomspace(0.2, 10.0, 60))
DEFAULT_NOISE_SIGMA = 0.01


@dataclass(frozen=True)
class DatasetMeta:
    """Acquisition parameters of one decay dataset."""

    omega_mhz: float
    delta_mhz: float
    sequence: Sequence
    gamma1q: float
    gamma2q: float

    @property
    def delta_omega_mhz(self) -> float:
        """Effective rotating-frame detuning delta_Omega = Delta - Omega."""
        return self.delta_mhz - self.omega_mhz


@dataclass(frozen=True)
class DecayDataset:
    """Measured (or synthetic) population decay sampled at given times."""

    times: np.ndarray
    populations: np.ndarray
    meta: DatasetMeta

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        y = np.asarray(self.populations, dtype=float)
        if t.ndim != 1 or t.shape != y.shape:
            raise ValueError("times and populations must be 1-D and equally long")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if y.size and (y.min() < -1e-9 or y.max() > 1.0 + 1e-9):
            raise ValueError("populations must lie in [0, 1]")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "populations", y)


@dataclass(frozen=True)
class FitModel:
    """Fixed model parameters of the residual evaluation."""

    kind: CouplingKind
    a_ghz: float
    spec: HilbertSpec


@dataclass
class ResidualSurface:
    """RMS deviation sigma over a (coupling, relaxation-rate) grid."""

    g_grid: np.ndarray
    gamma_grid: np.ndarray
    sigma: np.ndarray
    sigma_min: float
    argmin: tuple[float, float]


@dataclass
class ParamRegion:
    """Boolean acceptance mask over the scan grid."""

    g_grid: np.ndarray
    gamma_grid: np.ndarray
    mask: np.ndarray
    threshold: float

    @property
    def is_empty(self) -> bool:
        return not bool(self.mask.any())

    def contains(self, g_mhz: float, gamma_per_us: float) -> bool:
        """Membership of the grid cell nearest to (g, Gamma) in log space."""
        i = int(np.argmin(np.abs(np.log(self.g_grid) - np.log(g_mhz))))
        j = int(np.argmin(np.abs(np.log(self.gamma_grid) - np.log(gamma_per_us))))
        return bool(self.mask[i, j])


def model_decay(
    data_times: np.ndarray,
    meta: DatasetMeta,
    fit: FitModel,
    g_mhz: float,
    gamma_tls: float,
) -> np.ndarray:
    """Simulated decay curve at the dataset sample times.

    The reported population matches the prepared state of the sequence:
    |i+> for Sequence 1 and |i-> for Sequence 2.
    """
    times = np.asarray(data_times, dtype=float)
    sim_times = times
    prepend = times[0] != 0.0
    if prepend:
        sim_times = np.concatenate(([0.0], times))
    defect = DefectSpec(kind=fit.kind, omega_tls=1.0, g=g_mhz, gamma1tls=gamma_tls)
    h = _hamiltonian(defect, meta.delta_mhz, fit.a_ghz, meta.omega_mhz, fit.spec)
    lind = liouvillian(h, collapse_set(fit.spec, meta.gamma1q, meta.gamma2q, gamma_tls))
    traj = propagate(_initial_state(meta.sequence, fit.spec), lind, sim_times)
    p_plus, p_minus = _iplus_projectors(fit.spec)
    proj = p_plus if meta.sequence is Sequence.S1 else p_minus
    y = population(traj, proj)
    return y[1:] if prepend else y


def rms_deviation(y_exp, y_fit) -> float:
    """Root-mean-square deviation over the sample set (order independent)."""
    y_exp = np.asarray(y_exp, dtype=float)
    y_fit = np.asarray(y_fit, dtype=float)
    if y_exp.shape != y_fit.shape:
        raise ValueError("series lengths differ")
    return float(np.sqrt(np.mean((y_exp - y_fit) ** 2)))


def residual_sigma(data: DecayDataset, fit: FitModel, g_mhz: float, gamma_tls: float) -> float:
    """RMS deviation between the dataset and the model at (g, Gamma1TLS)."""
    y_fit = model_decay(data.times, data.meta, fit, g_mhz, gamma_tls)
    return rms_deviation(data.populations, y_fit)


def _scan_row(payload):
    i, g, data, fit, gamma_grid = payload
    return i, [residual_sigma(data, fit, g, gam) for gam in gamma_grid]


def grid_scan(
    data: DecayDataset,
    fit: FitModel,
    g_grid=DEFAULT_G_GRID,
    gamma_grid=DEFAULT_GAMMA_GRID,
    workers: int = 1,
) -> ResidualSurface:
    """Dense residual evaluation over the (g, Gamma1TLS) grid."""
    g_grid = np.asarray(g_grid, dtype=float)
    gamma_grid = np.asarray(gamma_grid, dtype=float)
    if g_grid.size == 0 or gamma_grid.size == 0:
        raise ValueError("scan grids must be non-empty")
    if np.any(g_grid <= 0) or np.any(gamma_grid <= 0):
        raise ValueError("scan grids must be positive")
    sigma = np.empty((g_grid.size, gamma_grid.size))
    payloads = [(i, float(g), data, fit, gamma_grid) for i, g in enumerate(g_grid)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, row in pool.map(_scan_row, payloads, chunksize=2):
                sigma[i] = row
    else:
        for payload in payloads:
            i, row = _scan_row(payload)
            sigma[i] = row
    imin, jmin = np.unravel_index(np.argmin(sigma), sigma.shape)
    return ResidualSurface(
        g_grid=g_grid,
        gamma_grid=gamma_grid,
        sigma=sigma,
        sigma_min=float(sigma[imin, jmin]),
        argmin=(float(g_grid[imin]), float(gamma_grid[jmin])),
    )


def optimal_region(surface: ResidualSurface, factor: float = 2.0) -> ParamRegion:
    """Acceptance region sigma <= factor * sigma_min."""
    if factor <= 1.0:
        raise ValueError("threshold factor must exceed 1")
    threshold = factor * surface.sigma_min
    return ParamRegion(
        g_grid=surface.g_grid,
        gamma_grid=surface.gamma_grid,
        mask=surface.sigma <= threshold,
        threshold=threshold,
    )


def region_overlap(a: ParamRegion, b: ParamRegion) -> ParamRegion:
    """Pointwise intersection of two regions on identical grids."""
    if not (np.array_equal(a.g_grid, b.g_grid) and np.array_equal(a.gamma_grid, b.gamma_grid)):
        raise ValueError("regions live on different grids")
    out = ParamRegion(
        g_grid=a.g_grid,
        gamma_grid=a.gamma_grid,
        mask=a.mask & b.mask,
        threshold=min(a.threshold, b.threshold),
    )
    if out.is_empty:
        log.warning("region overlap is empty: the datasets do not share optimal parameters")
    return out


def purcell_rate(g_eff_mhz: float, gamma_tls: float, linear_convention: bool = False) -> float:
    """Defect-mediated qubit relaxation rate in 1/us.

    Default: Gamma_P = 4 (2*pi*g_eff)^2 / Gamma1TLS.  With
    ``linear_convention`` the charge-defect form g_C^2 / Gamma1TLS is used,
    equivalent to the default at effective coupling g_C / 2.
    """
    if gamma_tls <= 0:
        raise ValueError("defect relaxation rate must be positive")
    g_ang = TWO_PI * g_eff_mhz
    if linear_convention:
        return g_ang**2 / gamma_tls
    return 4.0 * g_ang**2 / gamma_tls


def stationary_population(
    traj: Trajectory, window_us: tuple[float, float], key: str, baseline: float
) -> tuple[float, int]:
    """Mean population over a late-time window and its sign against baseline."""
    t0, t1 = window_us
    times = traj.times
    if t0 < times[0] or t1 > times[-1] or t1 <= t0:
        raise ValueError(f"window {window_us} outside trajectory span [{times[0]}, {times[-1]}]")
    sel = (times >= t0) & (times <= t1)
    if not np.any(sel):
        raise ValueError("window contains no samples")
    value = float(np.mean(traj.populations[key][sel]))
    return value, int(np.sign(value - baseline))


def synthetic_dataset(
    meta: DatasetMeta,
    fit: FitModel,
    g_mhz: float,
    gamma_tls: float,
    times: np.ndarray,
    noise_sigma: float = DEFAULT_NOISE_SIGMA,
    seed: int = 0,
) -> DecayDataset:
    """Model-generated decay with additive Gaussian noise, clipped to [0, 1]."""
    y = model_decay(np.asarray(times, dtype=float), meta, fit, g_mhz, gamma_tls)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        y = y + rng.normal(0.0, noise_sigma, size=y.shape)
    return DecayDataset(times=np.asarray(times, dtype=float), populations=np.clip(y, 0.0, 1.0), meta=meta)
