import json
from pathlib import Path

import numpy as np
import pytest

import tlspec.model
from tlspec.cli import main
from tlspec.config import parse_config
from tlspec.errors import ConfigError
from tlspec.io import read_dataset, read_map, read_table, write_table


MINIMAL_DEVICE = {
    "e_cs_ghz": 0.24,
    "e_j_ghz": 160.0,
    "alpha": 0.457,
    "gamma1q_per_us": 0.03,
}


def write_config(tmp_path, payload, name="run.json") -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


def test_table_round_trip(tmp_path):
    rows = np.array([[0.0, 1.0 / 3.0], [1.5, 0.123456789012345]])
    path = tmp_path / "t.csv"
    write_table(path, "trajectory", {"omega_mhz": 25.0, "label": "x"}, ["a", "b"], rows)
    first = path.read_bytes()
    schema, meta, header, data = read_table(path)
    assert schema == "trajectory"
    assert meta["label"] == "x"
    assert header == ["a", "b"]
    write_table(path, schema, {k: v for k, v in meta.items()}, header, data)
    assert path.read_bytes() == first


def test_table_is_self_describing(tmp_path):
    path = tmp_path / "t.csv"
    write_table(path, "surface", {"sigma_min": 0.01}, ["g_mhz", "sigma"], np.array([[1.0, 0.02]]))
    text = path.read_text().splitlines()
    assert text[0] == "# schema=surface version=1"
    assert any(line.startswith("# sigma_min=") for line in text)


def test_minimal_config_parses(tmp_path):
    path = write_config(tmp_path, {"device": MINIMAL_DEVICE})
    cfg = parse_config(path)
    assert cfg.device.ECS == pytest.approx(0.24)
    assert cfg.device.alpha == pytest.approx(0.457)


def test_config_rejects_alpha_outside_single_well(tmp_path):
    payload = {"device": dict(MINIMAL_DEVICE, alpha=0.6)}
    with pytest.raises(ConfigError, match="single-well"):
        parse_config(write_config(tmp_path, payload))


def test_config_rejects_unknown_and_missuffixed_keys(tmp_path):
    payload = {
        "device": dict(MINIMAL_DEVICE, e_cs_mhz=240.0),
        "drive": {"sequence": "S1", "omega_ghz": 0.025, "tau_us": 60.0},
        "mystery": 1,
    }
    with pytest.raises(ConfigError) as err:
        parse_config(write_config(tmp_path, payload))
    text = "\n".join(err.value.violations)
    assert "e_cs_mhz" in text
    assert "omega_ghz" in text
    assert "mystery" in text
    assert "omega_mhz" in text  # the missing correctly-suffixed key is named


def test_config_rejects_duplicate_defects(tmp_path):
    defect = {
        "name": "TLS1",
        "kind": "linear_charge",
        "omega_tls_ghz": 3.795,
        "g_mhz": 0.3,
        "gamma1tls_per_us": 1.0,
    }
    payload = {"device": MINIMAL_DEVICE, "defects": [defect, defect]}
    with pytest.raises(ConfigError, match="unique"):
        parse_config(write_config(tmp_path, payload))


def test_config_collects_all_violations(tmp_path):
    payload = {
        "device": {"e_cs_ghz": -1.0, "e_j_ghz": 160.0, "alpha": 0.7},
        "grids": {"flux_min": 0.51, "flux_max": 0.5, "flux_points": 3,
                  "omega_min_mhz": 5.0, "omega_max_mhz": 100.0, "omega_points": 4},
    }
    with pytest.raises(ConfigError) as err:
        parse_config(write_config(tmp_path, payload))
    assert len(err.value.violations) >= 2


def test_config_requires_existing_datasets(tmp_path):
    payload = {
        "estimation": {
            "datasets": ["missing.csv"],
            "kind": "nonlinear_current",
            "a_ghz": 1.0,
        }
    }
    with pytest.raises(ConfigError, match="not found"):
        parse_config(write_config(tmp_path, payload))


def test_cli_requires_exactly_one_source(tmp_path, capsys):
    assert main(["spectrum"]) == 2
    assert "exactly one" in capsys.readouterr().err


def test_cli_unknown_preset(capsys):
    assert main(["simulate", "--preset", "nope"]) == 2
    assert "unknown preset" in capsys.readouterr().err


def test_cli_simulate_deterministic(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert main(["simulate", "--preset", "fig1-offres", "--out", str(out1), "--no-figures"]) == 0
    assert main(["simulate", "--preset", "fig1-offres", "--out", str(out2), "--no-figures"]) == 0
    assert (out1 / "trajectory.csv").read_bytes() == (out2 / "trajectory.csv").read_bytes()


def test_cli_simulate_matches_reference_decay(tmp_path):
    out = tmp_path / "o"
    assert main(["simulate", "--preset", "fig1-offres", "--out", str(out), "--no-figures"]) == 0
    schema, meta, header, data = read_table(out / "trajectory.csv")
    assert schema == "trajectory"
    t = data[:, header.index("time_us")]
    p = data[:, header.index("i_plus")]
    ref = 0.5 * (1.0 + np.exp(-0.03 * t / 2.0))
    assert np.max(np.abs(p - ref)) <= 0.01


def test_cli_sweep_predict_consistency(tmp_path, calibrated_device):
    # tiny cross-command check: map ridge and predicted line agree per column
    from tlspec.model import FluxBias, csfq_frequencies

    wq = csfq_frequencies(calibrated_device, FluxBias(0.5)).omega01
    payload = {
        "device": {"e_cs_ghz": 0.24, "e_j_ghz": 160.0, "alpha": 0.49021,
                   "gamma1q_per_us": 0.03},
        "defects": [{"name": "d", "kind": "linear_charge",
                     "omega_tls_ghz": round(wq + 0.02, 6), "g_mhz": 0.3,
                     "gamma1tls_per_us": 1.0}],
        "drive": {"sequence": "S1", "omega_mhz": 25.0, "tau_us": 60.0, "qubit_levels": 2},
        "grids": {"flux_min": 0.4999, "flux_max": 0.5001, "flux_points": 3,
                  "omega_min_mhz": 12.0, "omega_max_mhz": 28.0, "omega_points": 9},
        "output": {"dir": "unused"},
    }
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "map.png").exists()
    flux, omega, values, baseline, meta = read_map(out / "map.csv")
    schema, lmeta, lheader, ldata = read_table(out / "lines.csv")
    step = omega[1] - omega[0]
    for i in range(len(flux)):
        pred = ldata[i, lheader.index("omega_d_mhz")]
        ridge = omega[np.argmax(np.abs(values[i] - baseline[i]))]
        assert abs(ridge - pred) <= step
    # identical bytes regardless of the worker count
    out2 = tmp_path / "sweep2"
    assert main(["sweep", "--config", str(cfg), "--out", str(out2), "--workers", "2", "--no-figures"]) == 0
    assert (out / "map.csv").read_bytes() == (out2 / "map.csv").read_bytes()


def test_cli_predict_writes_crossings(tmp_path):
    payload = {
        "device": {"e_cs_ghz": 0.24, "e_j_ghz": 160.0, "alpha": 0.49021},
        "defects": [{"name": "TLS2", "kind": "linear_charge", "omega_tls_ghz": 3.895,
                     "g_mhz": 0.3, "gamma1tls_per_us": 1.0}],
        "grids": {"flux_min": 0.498, "flux_max": 0.508, "flux_points": 21,
                  "omega_min_mhz": 5.0, "omega_max_mhz": 100.0, "omega_points": 5},
    }
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "pred"
    assert main(["predict", "--config", str(cfg), "--out", str(out), "--no-figures"]) == 0
    schema, meta, header, data = read_table(out / "lines.csv")
    assert schema == "lines"
    assert float(meta["zero_crossings_TLS2"]) == pytest.approx(0.50237, abs=5e-4)


def test_cli_spectrum_and_figures(tmp_path):
    payload = {
        "device": MINIMAL_DEVICE,
        "grids": {"flux_min": 0.499, "flux_max": 0.501, "flux_points": 3,
                  "omega_min_mhz": 5.0, "omega_max_mhz": 100.0, "omega_points": 3},
    }
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "spec"
    assert main(["spectrum", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "spectrum.csv").exists()
    assert (out / "spectrum.png").exists()
    schema, meta, header, data = read_table(out / "spectrum.csv")
    assert data[1, header.index("omega01_ghz")] == pytest.approx(4.720660, abs=1e-5)


def test_cli_rabi_runs(tmp_path):
    out = tmp_path / "rabi"
    assert main(["rabi", "--preset", "fig1-res", "--out", str(out), "--no-figures"]) == 0
    schema, meta, header, data = read_table(out / "rabi.csv")
    assert data[0, header.index("p0")] == pytest.approx(1.0, abs=1e-9)


def test_cli_simulate_derives_anharmonicity_from_device(tmp_path):
    # with a_ghz left out, the anharmonicity comes from the device spectrum
    payload = {
        "device": {"e_cs_ghz": 0.24, "e_j_ghz": 160.0, "alpha": 0.49021,
                   "gamma1q_per_us": 0.03},
        "defects": [{"name": "n", "kind": "nonlinear_current", "omega_tls_ghz": 7.9,
                     "g_mhz": 2.0, "gamma1tls_per_us": 1.0}],
        "drive": {"sequence": "S1", "omega_mhz": 25.0, "tau_us": 10.0,
                  "qubit_levels": 3, "time_points": 21},
        "simulate": {"defect": "n", "detuning_mhz": 25.0},
    }
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "derived"
    assert main(["simulate", "--config", str(cfg), "--out", str(out), "--no-figures"]) == 0
    schema, meta, header, data = read_table(out / "trajectory.csv")
    assert float(meta["a_ghz"]) == pytest.approx(1.0288, abs=1e-3)


def test_cli_numerical_error_exit_code(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(tlspec.model, "CUTOFF_LADDER", (30,))
    tlspec.model._frequencies_cached.cache_clear()
    payload = {
        "device": dict(MINIMAL_DEVICE, alpha=0.31),
        "grids": {"flux_min": 0.499, "flux_max": 0.501, "flux_points": 2,
                  "omega_min_mhz": 5.0, "omega_max_mhz": 10.0, "omega_points": 2},
    }
    cfg = write_config(tmp_path, payload)
    assert main(["spectrum", "--config", str(cfg), "--out", str(tmp_path / "x"), "--no-figures"]) == 3
    assert "numerical error" in capsys.readouterr().err


def test_bundled_datasets_read_back():
    from importlib import resources

    for name, delta_omega in (("e3_detuning0.csv", 0.0), ("e3_detuning1p2.csv", 1.2)):
        path = resources.files("tlspec") / "presets" / "data" / name
        data = read_dataset(path)
        assert data.meta.delta_omega_mhz == pytest.approx(delta_omega)
        assert data.times[0] == 0.0
        assert data.times[-1] == pytest.approx(60.0)


def test_cli_fit_on_bundled_datasets(tmp_path):
    out = tmp_path / "fit"
    assert main(["fit", "--preset", "e3-fit", "--out", str(out)]) == 0
    for name in ("surface_0.csv", "surface_1.csv", "region_0.csv", "region_1.csv",
                 "surface_0.png", "regions.png"):
        assert (out / name).exists()
    schema, meta, header, data = read_table(out / "overlap.csv")
    assert meta["empty"] == "false"
    g, gam, inr = data[:, 0], data[:, 1], data[:, 2].astype(bool)
    gs, gams = np.unique(g), np.unique(gam)
    gi = gs[np.argmin(np.abs(np.log(gs / 15.0)))]
    gj = gams[np.argmin(np.abs(np.log(gams / 2.0)))]
    assert inr[(g == gi) & (gam == gj)][0]
