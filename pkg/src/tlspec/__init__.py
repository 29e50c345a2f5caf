"""Strong-drive spectroscopy of TLS defects coupled to a superconducting qubit.

The package simulates spin-locking and Rabi measurements of a driven
c-shunt flux qubit coupled to two-level-system defects (linear charge-type
or nonlinear critical-current-type coupling), synthesizes spectroscopy maps
over flux and drive amplitude, predicts defect spectral lines, and
estimates defect parameters from time-domain decay data by residual-grid
scanning.
"""

from .dynamics import CollapseSet, Trajectory, liouvillian, population, propagate
from .errors import ConfigError, ConvergenceError, NumericalInstabilityError, TlspecError
from .estimation import (
    DatasetMeta,
    DecayDataset,
    FitModel,
    ParamRegion,
    ResidualSurface,
    grid_scan,
    optimal_region,
    purcell_rate,
    region_overlap,
    residual_sigma,
    stationary_population,
    synthetic_dataset,
)
from .model import (
    CouplingKind,
    DefectSpec,
    DerivedQubitFreqs,
    FluxBias,
    QubitDeviceParams,
    TlsMicroscopic,
    coupling_g_current,
    coupling_g_linear,
    csfq_frequencies,
    csfq_hamiltonian_1d,
    duffing_params,
    g_eff_counter_rotating,
    g_eff_virtual,
    h_rot_linear,
    h_rot_nonlinear,
    r_from_g_current,
    tls_eigen,
)
from .qops import HilbertSpec, ket_rotating_eigenstates, ladder_ops, pauli_ops, tensor
from .spectroscopy import (
    DefectCatalog,
    LineSet,
    Sequence,
    SpectroscopyMap,
    SpinLockConfig,
    phase_cycle_combine,
    predict_lines,
    rabi_amplitude_model,
    simulate_rabi,
    simulate_spinlock,
    sweep_map,
)

__version__ = "0.1.0"
