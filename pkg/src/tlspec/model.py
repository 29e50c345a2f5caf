"""Device and defect models: circuit Hamiltonians, couplings, rotating frames.

Unit convention (applies to every public interface in the package): cyclic
frequencies throughout -- GHz for qubit transitions and anharmonicity, MHz
for drives, detunings and couplings, 1/us for decay rates.  The single
conversion to angular units (x 2*pi) happens inside the rotating-frame
Hamiltonian builders, which return matrices in rad/us so that evolution
times are plain microseconds.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh

from .errors import ConvergenceError
from .qops import HilbertSpec, ladder_ops, pauli_ops, qubit_operator, tls_operator

GHZ_TO_RAD_PER_US = 2.0 * math.pi * 1e3
MHZ_TO_RAD_PER_US = 2.0 * math.pi

# Charge-basis diagonalization: cutoffs double from 30 and stop at 200.
CUTOFF_LADDER = (30, 60, 120, 200)
FREQ_CONVERGENCE_GHZ = 1e-6

SWEEP_FLUX_SOFT_MIN = 0.48
SWEEP_FLUX_SOFT_MAX = 0.52


class CouplingKind(str, Enum):
    """How a defect couples to the qubit degrees of freedom."""

    LINEAR_CHARGE = "linear_charge"
    NONLINEAR_CURRENT = "nonlinear_current"


@dataclass(frozen=True)
class QubitDeviceParams:
    """C-shunt flux qubit circuit energies (GHz) and decay rates (1/us).

    ``EC`` is the junction charging energy; it is carried for bookkeeping
    but enters no formula here.  ``gamma2q`` is the pure-dephasing-
    equivalent rate feeding the b_dag*b collapse channel.
    """

    ECS: float
    EJ: float
    alpha: float
    gamma1q: float = 0.0
    gamma2q: float = 0.0
    EC: float | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 0.5:
            raise ValueError(f"alpha={self.alpha} outside the single-well range (0, 0.5)")
        if self.ECS <= 0 or self.EJ <= 0:
            raise ValueError("ECS and EJ must be positive")
        if self.gamma1q < 0 or self.gamma2q < 0:
            raise ValueError("decay rates must be non-negative")


@dataclass(frozen=True)
class DefectSpec:
    """One TLS defect: coupling kind, frequency (GHz), coupling (MHz), rate (1/us)."""

    kind: CouplingKind
    omega_tls: float
    g: float
    gamma1tls: float
    name: str = ""

    def __post_init__(self):
        if self.omega_tls <= 0:
            raise ValueError("defect frequency must be positive")
        if self.gamma1tls <= 0:
            raise ValueError("defect relaxation rate must be positive")


@dataclass(frozen=True)
class TlsMicroscopic:
    """Standard tunneling-model parameters: asymmetry and tunneling splitting.

    Both are angular frequencies in rad/us; :func:`tls_eigen` is
    unit-preserving.
    """

    epsilon: float
    delta0: float


@dataclass(frozen=True)
class DerivedQubitFreqs:
    """Transition frequencies from diagonalization, all in GHz.

    ``omega_b`` is the perturbative small-oscillation frequency, reported
    alongside for comparison; ``anharmonicity = omega12 - omega01``.
    """

    omega01: float
    omega12: float
    anharmonicity: float
    omega_b: float


@dataclass(frozen=True)
class FluxBias:
    """External flux in units of the flux quantum."""

    f: float

    def __post_init__(self):
        if not SWEEP_FLUX_SOFT_MIN <= self.f <= SWEEP_FLUX_SOFT_MAX:
            warnings.warn(
                f"flux bias f={self.f} outside the usual sweep range "
                f"[{SWEEP_FLUX_SOFT_MIN}, {SWEEP_FLUX_SOFT_MAX}]",
                stacklevel=2,
            )

    @property
    def delta_f(self) -> float:
        return self.f - 0.5


def csfq_hamiltonian_1d(p: QubitDeviceParams, flux: FluxBias, charge_cutoff: int) -> np.ndarray:
    """One-dimensional c-shunt flux qubit Hamiltonian in the charge basis.

    Basis: Cooper-pair number n in [-N, N].  Diagonal ``ECS*n^2`` plus the
    constant offsets ``2*EJ + alpha*EJ``; the single-junction cosine couples
    n <-> n+-1 with -EJ; the reduced junction's double-phase cosine couples
    n <-> n+-2 with -(alpha*EJ/2)*exp(+-2i*pi*f).  Units: GHz*h.
    """
    if charge_cutoff < 20:
        raise ConvergenceError(f"charge cutoff {charge_cutoff} too small for a converged spectrum")
    n = np.arange(-charge_cutoff, charge_cutoff + 1)
    dim = n.size
    h = np.zeros((dim, dim), dtype=complex)
    h[np.diag_indices(dim)] = p.ECS * n**2 + 2.0 * p.EJ + p.alpha * p.EJ
    idx = np.arange(dim - 1)
    h[idx, idx + 1] = -p.EJ
    h[idx + 1, idx] = -p.EJ
    phase = np.exp(2j * np.pi * flux.f)
    idx2 = np.arange(dim - 2)
    h[idx2 + 2, idx2] = -(p.alpha * p.EJ / 2.0) * phase
    h[idx2, idx2 + 2] = -(p.alpha * p.EJ / 2.0) * np.conj(phase)
    return h


@lru_cache(maxsize=16384)
def _frequencies_cached(ecs: float, ej: float, alpha: float, f: float) -> tuple[float, float]:
    p = QubitDeviceParams(ECS=ecs, EJ=ej, alpha=alpha)
    flux = FluxBias(f) if SWEEP_FLUX_SOFT_MIN <= f <= SWEEP_FLUX_SOFT_MAX else None
    if flux is None:
        # re-raise the soft-bound warning only once at the caller's level
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            flux = FluxBias(f)
    prev = None
    for cutoff in CUTOFF_LADDER:
        w = eigh(csfq_hamiltonian_1d(p, flux, cutoff), eigvals_only=True, subset_by_index=(0, 2))
        w01, w12 = float(w[1] - w[0]), float(w[2] - w[1])
        if prev is not None and abs(w01 - prev) < FREQ_CONVERGENCE_GHZ:
            return w01, w12
        prev = w01
    raise ConvergenceError(
        f"qubit spectrum not converged to {FREQ_CONVERGENCE_GHZ} GHz at cutoff {CUTOFF_LADDER[-1]}"
    )


def csfq_frequencies(p: QubitDeviceParams, flux: FluxBias) -> DerivedQubitFreqs:
    """Diagonalize the charge-basis Hamiltonian with automatic cutoff doubling.

    Stops once omega01 changes by less than 1e-6 GHz between successive
    cutoffs.  The perturbative omega_b is reported alongside the exact
    transitions.
    """
    w01, w12 = _frequencies_cached(p.ECS, p.EJ, p.alpha, flux.f)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        omega_b, _ = duffing_params(p)
    return DerivedQubitFreqs(omega01=w01, omega12=w12, anharmonicity=w12 - w01, omega_b=omega_b)


def duffing_params(p: QubitDeviceParams) -> tuple[float, float]:
    """Perturbative Duffing frequency and anharmonicity (GHz).

    omega_b = sqrt(4*ECS*EJ*(1-2*alpha)), A = (8*alpha-1)/(4*(1-2*alpha))*ECS.
    Warns when A > omega_b/4, where the quartic expansion stops being a
    small correction and the exact diagonalization should be preferred.
    """
    if p.alpha >= 0.5:
        raise ValueError("duffing expansion requires alpha < 0.5")
    omega_b = math.sqrt(4.0 * p.ECS * p.EJ * (1.0 - 2.0 * p.alpha))
    anharm = (8.0 * p.alpha - 1.0) / (4.0 * (1.0 - 2.0 * p.alpha)) * p.ECS
    if anharm > omega_b / 4.0:
        warnings.warn(
            f"perturbative anharmonicity A={anharm:.3f} GHz is not small against "
            f"omega_b={omega_b:.3f} GHz; quartic-expansion values are unreliable here",
            stacklevel=2,
        )
    return omega_b, anharm


def coupling_g_linear(delta_n_tls: float, omega_b_ghz: float, ecs_ghz: float) -> float:
    """Charge-defect coupling g_C in MHz.

    ``delta_n_tls`` is the charge fluctuation induced across the junction in
    units of 2e; g_C = (delta_n/2)*sqrt(omega_b*ECS).
    """
    if omega_b_ghz <= 0 or ecs_ghz <= 0:
        raise ValueError("omega_b and ECS must be positive")
    return 0.5 * delta_n_tls * math.sqrt(omega_b_ghz * ecs_ghz) * 1e3


def coupling_g_current(p: QubitDeviceParams, r: float, flux: FluxBias) -> tuple[float, float]:
    """Critical-current-defect couplings (g1, g2) in MHz.

    ``r`` is the relative critical-current fluctuation delta_I/(alpha*Ic).
    g1 is proportional to the flux detuning and vanishes identically at the
    sweet spot; g2 is the quadratic-term coupling used in sweeps.  Signs are
    kept as derived (both negative for r > 0 at delta_f > 0); observables
    downstream depend on |g| only.
    """
    if r < 0:
        raise ValueError("relative fluctuation r must be non-negative")
    if p.alpha >= 0.5:
        raise ValueError("single-well regime requires alpha < 0.5")
    omega_b, _ = duffing_params(p)
    g1 = -math.pi * flux.delta_f * (p.alpha / math.sqrt(1.0 - 2.0 * p.alpha)) * r * math.sqrt(omega_b * p.EJ)
    g2 = -(p.alpha / (4.0 * (1.0 - 2.0 * p.alpha))) * r * omega_b
    return g1 * 1e3, g2 * 1e3


def r_from_g_current(p: QubitDeviceParams, g2_mhz: float) -> float:
    """Invert the quadratic-coupling formula: |g2| -> relative fluctuation r."""
    omega_b, _ = duffing_params(p)
    scale = (p.alpha / (4.0 * (1.0 - 2.0 * p.alpha))) * omega_b * 1e3
    return abs(g2_mhz) / scale


def tls_eigen(m: TlsMicroscopic) -> tuple[float, float]:
    """Defect eigenfrequency and mixing angle from the tunneling model.

    Returns (omega, theta) with omega = sqrt(epsilon^2 + delta0^2) in the
    same units as the inputs and theta = atan2(delta0, epsilon).  For a
    symmetric defect (epsilon = 0) theta = pi/2 and the position-basis
    operators map onto the eigenbasis as (sx, sy, sz) -> (sz, sy, -sx).
    """
    if m.epsilon == 0.0 and m.delta0 == 0.0:
        raise ValueError("degenerate defect: epsilon and delta0 cannot both vanish")
    omega = math.hypot(m.epsilon, m.delta0)
    theta = math.atan2(m.delta0, m.epsilon)
    return omega, theta


def _anharmonic_number_term(a_ghz: float, spec: HilbertSpec) -> np.ndarray:
    b, bd = ladder_ops(spec.qubit_levels)
    nop = bd @ b
    a_ang = a_ghz * GHZ_TO_RAD_PER_US
    return qubit_operator(0.5 * a_ang * (nop @ nop - nop), spec)


def _drive_term(omega_mhz: float, spec: HilbertSpec) -> np.ndarray:
    b, bd = ladder_ops(spec.qubit_levels)
    om_ang = omega_mhz * MHZ_TO_RAD_PER_US
    return qubit_operator(0.5j * om_ang * (bd - b), spec)


def _detuning_term(delta_mhz: float, spec: HilbertSpec) -> np.ndarray:
    _, _, sz, _, _ = pauli_ops()
    d_ang = delta_mhz * MHZ_TO_RAD_PER_US
    return tls_operator(0.5 * d_ang * sz, spec)


def h_rot_linear(
    a_ghz: float, omega_mhz: float, delta_l_mhz: float, g_c_mhz: float, spec: HilbertSpec
) -> np.ndarray:
    """Rotating-frame Hamiltonian for a linearly (charge) coupled defect.

    H = (A/2)[(n_hat)^2 - n_hat] + i(Omega/2)(b_dag - b) + (Delta_L/2) sz
        + i g_C (b_dag sm - b sp),  returned in rad/us.
    """
    b, bd = ladder_ops(spec.qubit_levels)
    _, _, _, sp, sm = pauli_ops()
    g_ang = g_c_mhz * MHZ_TO_RAD_PER_US
    h = _anharmonic_number_term(a_ghz, spec)
    h = h + _drive_term(omega_mhz, spec) + _detuning_term(delta_l_mhz, spec)
    h = h + 1j * g_ang * (np.kron(bd, sm) - np.kron(b, sp))
    return h


def h_rot_nonlinear(
    a_ghz: float, omega_mhz: float, delta_nl_mhz: float, g2_mhz: float, spec: HilbertSpec
) -> np.ndarray:
    """Rotating-frame Hamiltonian for a nonlinearly (critical-current) coupled defect.

    H = (A/2)[(n_hat)^2 - n_hat] + i(Omega/2)(b_dag - b) + (Delta_NL/2) sz
        + g2 (b_dag^2 sm + b^2 sp),  returned in rad/us.  The two-photon
    coupling vanishes identically on two qubit levels, so at least three
    are required.
    """
    if spec.qubit_levels < 3:
        raise ValueError("nonlinear coupling needs at least three qubit levels")
    b, bd = ladder_ops(spec.qubit_levels)
    _, _, _, sp, sm = pauli_ops()
    g_ang = g2_mhz * MHZ_TO_RAD_PER_US
    h = _anharmonic_number_term(a_ghz, spec)
    h = h + _drive_term(omega_mhz, spec) + _detuning_term(delta_nl_mhz, spec)
    h = h + g_ang * (np.kron(bd @ bd, sm) + np.kron(b @ b, sp))
    return h


def g_eff_virtual(g2_mhz: float, omega_mhz: float, a_ghz: float) -> float:
    """Effective coupling g2*Omega/(2A) mediated by the second qubit level (MHz)."""
    if a_ghz == 0:
        raise ValueError("anharmonicity must be non-zero")
    if omega_mhz > abs(a_ghz) * 1e3 / 10.0:
        warnings.warn(
            "drive amplitude is not small against the anharmonicity; "
            "the second-order effective coupling is inaccurate",
            stacklevel=2,
        )
    return g2_mhz * omega_mhz / (2.0 * a_ghz * 1e3)


def g_eff_counter_rotating(g2_mhz: float, omega_mhz: float, omega_q_ghz: float) -> float:
    """Counter-rotating-term effective coupling g2*Omega/(4*omega_q) (MHz).

    Applies on the two-photon resonance Omega = |omega_TLS - 2*omega_q|;
    always smaller than :func:`g_eff_virtual` by A/(2*omega_q) < 1.
    """
    if omega_q_ghz <= 0:
        raise ValueError("qubit frequency must be positive")
    return g2_mhz * omega_mhz / (4.0 * omega_q_ghz * 1e3)
