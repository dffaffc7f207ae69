"""Command-line interface: smoke runs, determinism, and exit codes."""

from __future__ import annotations

import json

import pytest

from garchtails import cli


def _run(argv):
    return cli.main(argv)


def test_simulate_smoke_and_determinism(tmp_path):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    argv = ["simulate", "--model", "C3", "--n", "5000", "--burnin", "500",
            "--seed", "9"]
    assert _run(argv + ["--out", str(out1)]) == 0
    assert _run(argv + ["--out", str(out2)]) == 0
    # same seed: byte-identical artifacts
    assert (out1 / "simulate.json").read_bytes() == (out2 / "simulate.json").read_bytes()
    assert (out1 / "path.csv").read_bytes() == (out2 / "path.csv").read_bytes()
    payload = json.loads((out1 / "simulate.json").read_text())
    assert payload["seed"] == 9 and payload["x2_post_mean"] > 0


def test_simulate_other_seed_differs(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    base = ["simulate", "--model", "C3", "--n", "2000", "--burnin", "100"]
    _run(base + ["--seed", "1", "--out", str(out1)])
    _run(base + ["--seed", "2", "--out", str(out2)])
    assert (out1 / "path.csv").read_bytes() != (out2 / "path.csv").read_bytes()


def test_stationarity_smoke(tmp_path):
    rc = _run(["stationarity", "--model", "A3", "--t", "2000",
               "--replicates", "3", "--naive", "--force-gamma",
               "--out", str(tmp_path)])
    assert rc == 0
    payload = json.loads((tmp_path / "stationarity.json").read_text())
    assert payload["verdict"] in {
        "StationaryBySufficiency", "StationaryByGamma",
        "NotStationary", "Inconclusive",
    }
    assert payload["report"] is not None
    assert (tmp_path / "stationarity_trace.csv").exists()
    assert (tmp_path / "gamma_naive_trace.csv").exists()


def test_stationarity_short_circuit_reports_null(tmp_path):
    rc = _run(["stationarity", "--model", "C3", "--t", "1000",
               "--replicates", "2", "--out", str(tmp_path)])
    assert rc == 0
    payload = json.loads((tmp_path / "stationarity.json").read_text())
    assert payload["verdict"] == "StationaryBySufficiency"
    assert payload["report"] is None


def test_not_stationary_model_exits_zero(tmp_path):
    # an explosive model is a valid analysis outcome, not a CLI failure
    model = tmp_path / "explosive.toml"
    model.write_text(
        'p = 1\nq = 1\nalpha0 = 1.0\nalpha = [0.5]\nbeta = [1.2]\n'
        '[innovation]\nkind = "gaussian"\n'
    )
    rc = _run(["stationarity", "--model", str(model), "--t", "500",
               "--replicates", "2", "--out", str(tmp_path)])
    assert rc == 0
    payload = json.loads((tmp_path / "stationarity.json").read_text())
    assert payload["verdict"] == "NotStationary"


def test_spectral_smoke(tmp_path):
    rc = _run(["spectral", "--model", "C3", "--kappa", "1.0",
               "--J", "500", "--n", "600000", "--burnin", "20000",
               "--seed", "4", "--out", str(tmp_path)])
    assert rc == 0
    payload = json.loads((tmp_path / "spectral.json").read_text())
    assert payload["converged_at"] is not None
    assert (tmp_path / "particles.csv").exists()


def test_clusters_smoke(tmp_path):
    rc = _run(["clusters", "--model", "C3", "--kappa", "1.0",
               "--J", "500", "--n", "600000", "--burnin", "20000",
               "--N", "2000", "--T", "50", "--taumax", "5",
               "--seed", "4", "--out", str(tmp_path)])
    assert rc == 0
    payload = json.loads((tmp_path / "clusters.json").read_text())
    assert 0 < payload["theta_x2"] <= 1
    assert payload["delta"] == 0.5
    assert (tmp_path / "extremogram_limit.csv").exists()


def test_tailchain_smoke_with_stored_chains(tmp_path):
    rc = _run(["tailchain", "--model", "C3", "--kappa", "1.0",
               "--J", "500", "--n", "600000", "--burnin", "20000",
               "--N", "1000", "--T", "30", "--taumax", "5",
               "--store-chains", "2", "--out", str(tmp_path)])
    assert rc == 0
    payload = json.loads((tmp_path / "tailchain.json").read_text())
    assert payload["n_chains"] == 1000
    lines = (tmp_path / "chains.csv").read_text().strip().splitlines()
    assert len(lines) == 1 + 2 * 31  # header + 2 chains x (T+1) rows


def test_validate_smoke(tmp_path):
    rc = _run(["validate", "--model", "C3", "--n", "200000",
               "--burnin", "5000", "--taumax", "5", "--out", str(tmp_path)])
    assert rc == 0
    for name in ("runs_estimates.csv", "empirical_extremogram.csv",
                 "tail_qq.csv", "validate.json"):
        assert (tmp_path / name).exists()


def test_config_error_exit_code(tmp_path, capsys):
    rc = _run(["simulate", "--model", "/no/such/file.toml",
               "--out", str(tmp_path)])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_kappa_smoke_arch1(tmp_path):
    model = tmp_path / "arch.toml"
    model.write_text(
        'p = 0\nq = 1\nalpha0 = 1.0\nalpha = [0.5]\nbeta = []\n'
        '[innovation]\nkind = "gaussian"\n'
    )
    rc = _run(["kappa", "--model", str(model), "--J", "500",
               "--n", "600000", "--burnin", "20000",
               "--grid", "0.5:4.0:0.5", "--seed", "3", "--out", str(tmp_path)])
    assert rc == 0
    payload = json.loads((tmp_path / "kappa.json").read_text())
    # analytic root for alpha=0.5 Gaussian is ~2.365; smoke budget is loose
    assert payload["kappa_hat"] == pytest.approx(2.365, abs=0.15)
    assert (tmp_path / "rho_curve.csv").exists()
