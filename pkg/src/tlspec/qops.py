"""Dense operator algebra on the truncated qubit (x) TLS Hilbert space.

Conventions, fixed throughout the toolkit:

* Tensor products put the qubit factor first and the TLS factor second,
  so the qubit index varies slower than the TLS index.
* The TLS basis is ordered (|g>, |e>).  The Pauli set returned by
  :func:`pauli_ops` satisfies ``sigma_z = |e><e| - |g><g|`` and
  ``sigma_plus |g> = |e>``, matching the usual spin-boson sign choice
  where the excited defect level sits at +omega/2.
* All matrices are dense complex numpy arrays; composite dimensions never
  exceed 20, so sparse storage is deliberately avoided.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Default numerical tolerances for sanity checks.
HERMITICITY_TOL = 1e-10
NORM_TOL = 1e-12
TRACE_TOL = 1e-9
EIGENVALUE_FLOOR = -1e-8

MIN_QUBIT_LEVELS = 2
MAX_QUBIT_LEVELS = 10


@dataclass(frozen=True)
class HilbertSpec:
    """Truncation of the composite space: qubit levels (x) two TLS levels."""

    qubit_levels: int
    tls_levels: int = 2

    def __post_init__(self):
        if not MIN_QUBIT_LEVELS <= self.qubit_levels <= MAX_QUBIT_LEVELS:
            raise ValueError(
                f"qubit_levels must be in [{MIN_QUBIT_LEVELS}, {MAX_QUBIT_LEVELS}], "
                f"got {self.qubit_levels}"
            )
        if self.tls_levels != 2:
            raise ValueError("the TLS factor is fixed at two levels")

    @property
    def dim(self) -> int:
        return self.qubit_levels * self.tls_levels


def ladder_ops(n_levels: int) -> tuple[np.ndarray, np.ndarray]:
    """Truncated bosonic annihilation and creation operators (b, b_dag).

    ``b_dag[k+1, k] = sqrt(k+1)``; the commutator [b, b_dag] equals the
    identity except for the truncation corner.
    """
    if not MIN_QUBIT_LEVELS <= n_levels <= MAX_QUBIT_LEVELS:
        raise ValueError(f"n_levels must be in [{MIN_QUBIT_LEVELS}, {MAX_QUBIT_LEVELS}], got {n_levels}")
    b = np.zeros((n_levels, n_levels), dtype=complex)
    for k in range(n_levels - 1):
        b[k, k + 1] = np.sqrt(k + 1.0)
    return b, b.conj().T


def pauli_ops() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """TLS Pauli operators (sx, sy, sz, s+, s-) in the (|g>, |e>) basis."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, 1j], [-1j, 0]], dtype=complex)
    sz = np.array([[-1, 0], [0, 1]], dtype=complex)
    sp = 0.5 * (sx + 1j * sy)
    sm = 0.5 * (sx - 1j * sy)
    return sx, sy, sz, sp, sm


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the fixed qubit-first ordering."""
    return np.kron(np.asarray(a), np.asarray(b))


def ket(dim: int, index: int) -> np.ndarray:
    """Computational basis vector |index> on ``dim`` levels."""
    if not 0 <= index < dim:
        raise ValueError(f"index {index} outside 0..{dim - 1}")
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def ket_rotating_eigenstates(n_levels: int) -> tuple[np.ndarray, np.ndarray]:
    """Driven-frame qubit eigenstates (|i->, |i+>) = (|0> -+ i|1>)/sqrt(2).

    Amplitudes on levels >= 2 are zero by convention.
    """
    if n_levels < 2:
        raise ValueError("need at least two qubit levels")
    v0, v1 = ket(n_levels, 0), ket(n_levels, 1)
    return (v0 - 1j * v1) / np.sqrt(2.0), (v0 + 1j * v1) / np.sqrt(2.0)


def projector(state: np.ndarray) -> np.ndarray:
    """Rank-one projector |psi><psi|."""
    state = np.asarray(state)
    return np.outer(state, state.conj())


def density_from_ket(state: np.ndarray) -> np.ndarray:
    """Pure-state density matrix, validated."""
    rho = projector(state)
    check_density_matrix(rho)
    return rho


def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def check_hermitian(m: np.ndarray, tol: float = HERMITICITY_TOL) -> None:
    d = hermiticity_defect(m)
    if d > tol:
        raise ValueError(f"matrix is not Hermitian within {tol:g} (defect {d:.3e})")


def check_state_vector(v: np.ndarray, tol: float = NORM_TOL) -> None:
    n = float(np.linalg.norm(v))
    if abs(n - 1.0) > tol:
        raise ValueError(f"state vector norm {n!r} deviates from 1 beyond {tol:g}")


def check_density_matrix(
    rho: np.ndarray,
    trace_tol: float = TRACE_TOL,
    herm_tol: float = HERMITICITY_TOL,
    eig_floor: float = EIGENVALUE_FLOOR,
) -> None:
    """Validate trace, hermiticity and positivity of a density matrix."""
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"trace {tr!r} deviates from 1 beyond {trace_tol:g}")
    check_hermitian(rho, herm_tol)
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if w[0] < eig_floor:
        raise ValueError(f"smallest eigenvalue {w[0]:.3e} below floor {eig_floor:g}")


def qubit_operator(op: np.ndarray, spec: HilbertSpec) -> np.ndarray:
    """Embed a qubit-space operator into the composite space."""
    if op.shape != (spec.qubit_levels, spec.qubit_levels):
        raise ValueError(f"operator shape {op.shape} does not match {spec.qubit_levels} qubit levels")
    return tensor(op, np.eye(spec.tls_levels))


def tls_operator(op: np.ndarray, spec: HilbertSpec) -> np.ndarray:
    """Embed a TLS-space operator into the composite space."""
    if op.shape != (spec.tls_levels, spec.tls_levels):
        raise ValueError(f"operator shape {op.shape} does not match {spec.tls_levels} TLS levels")
    return tensor(np.eye(spec.qubit_levels), op)
