import numpy as np
import pytest

from tlspec.estimation import (
    DatasetMeta,
    DecayDataset,
    FitModel,
    ParamRegion,
    ResidualSurface,
    grid_scan,
    model_decay,
    optimal_region,
    purcell_rate,
    region_overlap,
    residual_sigma,
    rms_deviation,
    stationary_population,
    synthetic_dataset,
)
from tlspec.model import CouplingKind
from tlspec.qops import HilbertSpec
from tlspec.spectroscopy import Sequence, SpinLockConfig, decoupled_defect, simulate_spinlock

E3_META = DatasetMeta(omega_mhz=23.4, delta_mhz=23.4, sequence=Sequence.S2, gamma1q=0.02, gamma2q=0.03)
E3_META_DETUNED = DatasetMeta(omega_mhz=22.2, delta_mhz=23.4, sequence=Sequence.S2, gamma1q=0.02, gamma2q=0.03)
E3_FIT = FitModel(kind=CouplingKind.NONLINEAR_CURRENT, a_ghz=1.0, spec=HilbertSpec(3))
E3_TIMES = np.arange(0.0, 60.0 + 1e-9, 1.0)


def test_rms_deviation_arithmetic():
    assert rms_deviation([0.0, 1.0], [0.0, 0.0]) == pytest.approx(np.sqrt(0.5))
    with pytest.raises(ValueError):
        rms_deviation([0.0], [0.0, 1.0])


def test_rms_order_invariance(rng):
    a = rng.uniform(size=20)
    b = rng.uniform(size=20)
    perm = rng.permutation(20)
    assert rms_deviation(a, b) == pytest.approx(rms_deviation(a[perm], b[perm]), abs=1e-15)


def test_delta_omega_definition():
    assert E3_META.delta_omega_mhz == pytest.approx(0.0)
    assert E3_META_DETUNED.delta_omega_mhz == pytest.approx(1.2)


def test_dataset_validation():
    with pytest.raises(ValueError, match="increasing"):
        DecayDataset(times=np.array([0.0, 0.0]), populations=np.array([1.0, 1.0]), meta=E3_META)
    with pytest.raises(ValueError, match="0, 1"):
        DecayDataset(times=np.array([0.0, 1.0]), populations=np.array([0.5, 1.5]), meta=E3_META)


def test_residual_self_consistency():
    data = synthetic_dataset(E3_META, E3_FIT, 15.0, 2.0, E3_TIMES, noise_sigma=0.0)
    assert residual_sigma(data, E3_FIT, 15.0, 2.0) <= 1e-9


def test_residual_nonzero_times_supported():
    times = np.arange(0.5, 10.0, 0.5)
    data = synthetic_dataset(E3_META, E3_FIT, 15.0, 2.0, times, noise_sigma=0.0)
    assert data.times[0] == 0.5
    assert residual_sigma(data, E3_FIT, 15.0, 2.0) <= 1e-9


def test_grid_scan_single_cell():
    data = synthetic_dataset(E3_META, E3_FIT, 15.0, 2.0, E3_TIMES, noise_sigma=0.01, seed=7)
    surface = grid_scan(data, E3_FIT, [15.0], [2.0])
    assert surface.sigma.shape == (1, 1)
    assert surface.sigma_min == pytest.approx(residual_sigma(data, E3_FIT, 15.0, 2.0))
    assert surface.argmin == (15.0, 2.0)


def test_grid_refinement_never_raises_minimum():
    data = synthetic_dataset(E3_META, E3_FIT, 15.0, 2.0, E3_TIMES, noise_sigma=0.01, seed=3)
    coarse_g = np.geomspace(5.0, 30.0, 5)
    coarse_gam = np.geomspace(0.5, 8.0, 5)
    fine_g = np.geomspace(5.0, 30.0, 9)  # superset of the coarse grid
    fine_gam = np.geomspace(0.5, 8.0, 9)
    coarse = grid_scan(data, E3_FIT, coarse_g, coarse_gam)
    fine = grid_scan(data, E3_FIT, fine_g, fine_gam)
    assert fine.sigma_min <= coarse.sigma_min + 1e-12


def test_grid_scan_worker_determinism():
    data = synthetic_dataset(E3_META, E3_FIT, 15.0, 2.0, np.arange(0.0, 20.1, 2.0), noise_sigma=0.01, seed=5)
    g = np.geomspace(10.0, 20.0, 3)
    gam = np.geomspace(1.0, 4.0, 3)
    one = grid_scan(data, E3_FIT, g, gam, workers=1)
    two = grid_scan(data, E3_FIT, g, gam, workers=2)
    assert np.array_equal(one.sigma, two.sigma)


def test_purcell_valley_scaling():
    # along g^2/Gamma = const the on-resonance residual is nearly flat
    data = synthetic_dataset(E3_META, E3_FIT, 15.0, 2.0, E3_TIMES, noise_sigma=0.0)
    sigma_ref = residual_sigma(data, E3_FIT, 15.0, 2.0)
    for k in (0.5, 2.0):
        sigma_k = residual_sigma(data, E3_FIT, 15.0 * np.sqrt(k), 2.0 * k)
        assert abs(sigma_k - sigma_ref) < 0.02


def test_optimal_region_basics():
    g = np.array([1.0, 2.0])
    gam = np.array([1.0, 2.0])
    flat = ResidualSurface(g, gam, np.full((2, 2), 0.3), 0.3, (1.0, 1.0))
    region = optimal_region(flat)
    assert region.mask.all()
    with pytest.raises(ValueError):
        optimal_region(flat, factor=0.9)


def test_argmin_always_inside_region():
    data = synthetic_dataset(E3_META, E3_FIT, 15.0, 2.0, np.arange(0.0, 30.1, 1.5), noise_sigma=0.01, seed=11)
    surface = grid_scan(data, E3_FIT, np.geomspace(8.0, 25.0, 6), np.geomspace(0.8, 5.0, 6))
    region = optimal_region(surface)
    assert region.contains(*surface.argmin)


def test_region_overlap_rules():
    g = np.array([1.0, 2.0])
    gam = np.array([1.0])
    a = ParamRegion(g, gam, np.array([[True], [False]]), 0.1)
    b = ParamRegion(g, gam, np.array([[True], [True]]), 0.2)
    empty = ParamRegion(g, gam, np.array([[False], [False]]), 0.2)
    assert np.array_equal(region_overlap(a, a).mask, a.mask)
    assert np.array_equal(region_overlap(a, b).mask, a.mask)
    assert region_overlap(a, empty).is_empty
    other = ParamRegion(np.array([1.0, 3.0]), gam, a.mask, 0.1)
    with pytest.raises(ValueError, match="grids"):
        region_overlap(a, other)


def test_two_dataset_overlap_contains_truth():
    # single-trial version of the round-trip protocol
    g_grid = np.geomspace(5.0, 40.0, 16)
    gamma_grid = np.geomspace(0.5, 8.0, 16)
    times = np.arange(0.0, 60.1, 1.0)
    regions = []
    for meta, seed in ((E3_META, 21), (E3_META_DETUNED, 22)):
        data = synthetic_dataset(meta, E3_FIT, 15.0, 2.0, times, noise_sigma=0.01, seed=seed)
        surf = grid_scan(data, E3_FIT, g_grid, gamma_grid)
        regions.append(optimal_region(surf))
    overlap = region_overlap(*regions)
    assert not overlap.is_empty
    assert overlap.contains(15.0, 2.0)


def test_purcell_rate_values():
    assert purcell_rate(0.0, 1.0) == 0.0
    assert purcell_rate(0.025, 1.0) == pytest.approx(0.09870, abs=2e-5)
    assert purcell_rate(0.05, 1.0) == pytest.approx(4 * purcell_rate(0.025, 1.0), rel=1e-12)
    # the linear-defect convention absorbs the factor 4 at g_C = 2 g_eff
    assert purcell_rate(0.05, 1.0, linear_convention=True) == pytest.approx(
        purcell_rate(0.025, 1.0), rel=1e-12
    )
    with pytest.raises(ValueError):
        purcell_rate(0.1, 0.0)


def test_stationary_population_window():
    cfg = SpinLockConfig(Sequence.S1, 25.0, 60.0, HilbertSpec(2))
    null = decoupled_defect(CouplingKind.LINEAR_CHARGE)
    traj = simulate_spinlock(cfg, null, 10.0, 0.0, (0.03, 0.0, 1.0))
    sel = (traj.times >= 55.0) & (traj.times <= 60.0)
    # closed-form oracle evaluated on the same window samples
    oracle = float(np.mean(0.5 * (1.0 + np.exp(-0.03 * traj.times[sel] / 2.0))))
    value, polarity = stationary_population(traj, (55.0, 60.0), "i_plus", baseline=0.5)
    assert oracle == pytest.approx(0.71109, abs=1e-4)
    assert value == pytest.approx(oracle, abs=1e-3)
    assert polarity == 1
    with pytest.raises(ValueError, match="window"):
        stationary_population(traj, (55.0, 61.0), "i_plus", baseline=0.5)


def test_stationary_population_constant_series():
    cfg = SpinLockConfig(Sequence.S1, 25.0, 5.0, HilbertSpec(2), time_points=6)
    null = decoupled_defect(CouplingKind.LINEAR_CHARGE)
    traj = simulate_spinlock(cfg, null, 10.0, 0.0, (0.0, 0.0, 1.0))
    value, _ = stationary_population(traj, (0.0, 5.0), "i_plus", baseline=0.5)
    assert value == pytest.approx(1.0, abs=1e-9)


def test_stationary_polarity_signs():
    from tlspec.model import DefectSpec

    cfg = SpinLockConfig(Sequence.S1, 25.0, 60.0, HilbertSpec(2))
    defect = DefectSpec(CouplingKind.LINEAR_CHARGE, 3.85, 0.05, 1.0, "c")
    base_traj = simulate_spinlock(cfg, decoupled_defect(CouplingKind.LINEAR_CHARGE), 0.0, 0.0, (0.03, 0.0, 1.0))
    base, _ = stationary_population(base_traj, (50.0, 60.0), "i_plus", baseline=0.5)
    pol = {}
    for delta in (+25.0, -25.0):
        traj = simulate_spinlock(cfg, defect, delta, 0.0, (0.03, 0.0, 1.0))
        _, pol[delta] = stationary_population(traj, (50.0, 60.0), "i_plus", baseline=base)
    assert pol[+25.0] == -pol[-25.0] != 0


def test_model_decay_matches_sequence_population():
    y = model_decay(np.array([0.0, 5.0, 10.0]), E3_META, E3_FIT, 15.0, 2.0)
    assert y[0] == pytest.approx(1.0, abs=1e-9)  # S2 starts in |i->
    assert y.shape == (3,)
