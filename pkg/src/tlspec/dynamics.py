"""Lindblad propagation by dense superoperator exponentiation.

All rotating-frame Hamiltonians in the toolkit are time independent, so a
trajectory costs one matrix exponential per distinct time step; the
exponentials are cached and reused across uniform grids.  Generic ODE
stepping was rejected: the anharmonicity term makes the generator stiff on
the 2*pi GHz scale while exp(L*dt) is exact regardless.

Vectorization is column-stacking: vec(A X B) = (B^T kron A) vec(X).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import NumericalInstabilityError
from .qops import check_hermitian, hermiticity_defect

TRACE_DRIFT_TOL = 1e-9
HERMITICITY_DRIFT_TOL = 1e-8
PROJECTOR_TOL = 1e-10
POPULATION_IMAG_TOL = 1e-10
POPULATION_CLIP = 1e-9
_STEP_KEY_DECIMALS = 12


@dataclass(frozen=True)
class CollapseSet:
    """Collapse channels stored pre-scaled as sqrt(rate) * op."""

    scaled_ops: tuple[np.ndarray, ...]

    @classmethod
    def from_pairs(cls, pairs) -> "CollapseSet":
        """Build from (operator, rate-in-1/us) pairs; zero-rate channels are dropped."""
        scaled = []
        for op, rate in pairs:
            if rate < 0:
                raise ValueError(f"collapse rate {rate} must be non-negative")
            if rate > 0:
                scaled.append(np.sqrt(rate) * np.asarray(op, dtype=complex))
        return cls(scaled_ops=tuple(scaled))

    def __len__(self):
        return len(self.scaled_ops)


@dataclass
class Trajectory:
    """Time series of density matrices with named population series."""

    times: np.ndarray
    states: list[np.ndarray]
    populations: dict[str, np.ndarray] = field(default_factory=dict)

    def final_state(self) -> np.ndarray:
        return self.states[-1]


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stack a matrix."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return np.asarray(v).reshape((dim, dim), order="F")


def liouvillian(h: np.ndarray, collapse: CollapseSet) -> np.ndarray:
    """Dense Lindblad generator acting on column-stacked density matrices.

    L(rho) = -i[H, rho] + sum_k C_k rho C_k^dag - {C_k^dag C_k, rho}/2,
    with H in rad/us and the C_k pre-scaled by sqrt(rate).
    """
    h = np.asarray(h, dtype=complex)
    check_hermitian(h, tol=1e-9)
    dim = h.shape[0]
    eye = np.eye(dim)
    lind = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for c in collapse.scaled_ops:
        if c.shape != h.shape:
            raise ValueError(f"collapse operator shape {c.shape} does not match H {h.shape}")
        cdc = c.conj().T @ c
        lind += np.kron(c.conj(), c) - 0.5 * (np.kron(eye, cdc) + np.kron(cdc.T, eye))
    return lind


def propagate(rho0: np.ndarray, lind: np.ndarray, times) -> Trajectory:
    """Evolve rho0 under exp(L t) at the requested times (us).

    Times must start at 0 and be strictly increasing.  One exponential is
    computed per distinct step size.  Trace drift beyond 1e-9 or a
    hermiticity defect beyond 1e-8 raises instead of being silently
    repaired.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-D sequence")
    if times[0] != 0.0:
        raise ValueError("trajectories start at t = 0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    rho0 = np.asarray(rho0, dtype=complex)
    dim = rho0.shape[0]
    if lind.shape != (dim * dim, dim * dim):
        raise ValueError(f"superoperator shape {lind.shape} does not match state dim {dim}")

    states = [rho0.copy()]
    v = vec(rho0)
    step_cache: dict[float, np.ndarray] = {}
    for dt in np.diff(times):
        key = round(float(dt), _STEP_KEY_DECIMALS)
        e = step_cache.get(key)
        if e is None:
            e = expm(lind * dt)
            step_cache[key] = e
        v = e @ v
        rho = unvec(v, dim)
        drift = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
        if drift > TRACE_DRIFT_TOL:
            raise NumericalInstabilityError(f"trace drift {drift:.3e} exceeds {TRACE_DRIFT_TOL:g}")
        if hermiticity_defect(rho) > HERMITICITY_DRIFT_TOL:
            raise NumericalInstabilityError("propagated state lost hermiticity")
        states.append(rho)
    return Trajectory(times=times, states=states)


def population(traj: Trajectory, proj: np.ndarray) -> np.ndarray:
    """Population series trace(P rho(t)) for a projector P.

    The input must square to itself within 1e-10; the output is checked to
    be real within 1e-10 and clipped to [-1e-9, 1 + 1e-9].
    """
    proj = np.asarray(proj, dtype=complex)
    if np.max(np.abs(proj @ proj - proj)) > PROJECTOR_TOL:
        raise ValueError("operator is not a projector within tolerance")
    out = np.empty(len(traj.states))
    for i, rho in enumerate(traj.states):
        val = np.trace(proj @ rho)
        if abs(val.imag) > POPULATION_IMAG_TOL:
            raise ValueError(f"population has imaginary part {val.imag:.3e}")
        out[i] = val.real
    return np.clip(out, -POPULATION_CLIP, 1.0 + POPULATION_CLIP)


def final_population(rho: np.ndarray, proj: np.ndarray) -> float:
    """Single-state counterpart of :func:`population`."""
    proj = np.asarray(proj, dtype=complex)
    if np.max(np.abs(proj @ proj - proj)) > PROJECTOR_TOL:
        raise ValueError("operator is not a projector within tolerance")
    val = np.trace(proj @ rho)
    if abs(val.imag) > POPULATION_IMAG_TOL:
        raise ValueError(f"population has imaginary part {val.imag:.3e}")
    return float(np.clip(val.real, -POPULATION_CLIP, 1.0 + POPULATION_CLIP))
