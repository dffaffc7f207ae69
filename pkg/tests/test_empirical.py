"""Path-based estimators: rolling maxima, runs estimator, extremogram, tail QQ.

Oracles: brute-force window scans, hand-built sequences with known answers,
and i.i.d. samples with analytic tail behaviour.
"""

from __future__ import annotations

import numpy as np
import pytest

from garchtails import empirical
from garchtails.errors import NoExceedances
from garchtails.sre import ProcessPath


def _path(x2):
    x2 = np.asarray(x2, dtype=float)
    return ProcessPath(x2=x2, sigma2=np.ones_like(x2), n=x2.size, n_b=0)


@pytest.mark.parametrize("m", [1, 2, 3, 7, 50, 200])
def test_forward_window_max_brute_force(m, rng):
    x = rng.normal(size=120)
    out = empirical.forward_window_max(x, m)
    for j in range(x.size):
        window = x[j + 1: j + m + 1]
        expect = window.max() if window.size else -np.inf
        assert out[j] == expect


def test_runs_counting_on_known_sequence():
    # exceedances of u=10 at t=0 (followed by one at t=2) and t=6 (isolated)
    x2 = np.array([11.0, 1, 12, 1, 1, 1, 13, 1, 1, 1, 1, 1], dtype=float)
    theta, n_exceed = empirical._runs_theta(x2, 10.0, 2)
    assert n_exceed == 3  # t = 0, 2, 6 (t=6 still has a full window)
    # isolated: t=2 (next two below u) and t=6; t=0 is followed by t=2
    assert theta == pytest.approx(2 / 3)


def test_runs_estimator_iid_has_no_clustering(rng):
    x2 = rng.exponential(size=300_000)
    path = _path(x2)
    u = float(np.quantile(x2, 0.9995))
    est = empirical.runs_estimator(path, u, 20, rng=rng)
    # i.i.d. limit is theta = 1; finite-level bias is (1-p)^m ~ 0.99
    assert est.theta_tilde > 0.93
    assert est.ci95[0] <= est.theta_tilde <= est.ci95[1]
    assert est.n_exceed > 50


def test_runs_estimator_clustered_series(rng):
    # duplicate every point: exceedances always come in pairs, theta ~ 1/2
    base = rng.exponential(size=150_000)
    x2 = np.repeat(base, 2)
    u = float(np.quantile(x2, 0.999))
    est = empirical.runs_estimator(_path(x2), u, 10, rng=rng)
    assert est.theta_tilde == pytest.approx(0.5, abs=0.08)


def test_recapture_correction_inverts_known_map():
    # forward map theta -> theta * exp(-theta * m * p) at theta = 0.6, mp = 1
    raw = 0.6 * np.exp(-0.6)
    assert empirical._recapture_correct(raw, 10, 0.1) == pytest.approx(0.6, abs=1e-9)
    # no exceedance pressure: identity
    assert empirical._recapture_correct(0.37, 100, 0.0) == 0.37
    # values above the attainable maximum clamp to the cap
    assert empirical._recapture_correct(0.9, 10, 0.1) == pytest.approx(1.0)
    assert empirical._recapture_correct(0.9, 100, 0.05) == pytest.approx(0.2)


def test_runs_estimator_correction_on_iid_with_long_window(rng):
    # i.i.d. data has theta = 1; with m*p = 0.5 the raw ratio sits near
    # exp(-0.5) while the corrected estimate recovers the truth
    x2 = rng.exponential(size=400_000)
    path = _path(x2)
    u = float(np.quantile(x2, 0.999))
    est = empirical.runs_estimator(path, u, 500, rng=rng)
    assert est.theta_tilde == pytest.approx(np.exp(-0.5), abs=0.08)
    assert est.theta_corrected == pytest.approx(1.0, abs=0.12)
    assert est.ci95[0] <= est.theta_corrected <= est.ci95[1]


def test_runs_family_widens_by_cross_threshold_drift(rng):
    x2 = rng.exponential(size=300_000)
    path = _path(x2)
    family = empirical.runs_family(
        path, u_quantiles=(0.99, 0.999), ms=(50,), rng=np.random.default_rng(0)
    )
    shared = np.random.default_rng(0)  # same draw order as inside runs_family
    singles = {
        uq: empirical.runs_estimator(
            path, float(np.quantile(x2, uq)), 50, rng=shared
        )
        for uq in (0.99, 0.999)
    }
    drift = abs(
        singles[0.99].theta_corrected - singles[0.999].theta_corrected
    )
    for uq in (0.99, 0.999):
        fam, single = family[(uq, 50)], singles[uq]
        assert fam.theta_tilde == single.theta_tilde
        assert fam.ci95[0] == pytest.approx(max(0.0, single.ci95[0] - drift))
        assert fam.ci95[1] == pytest.approx(min(1.0, single.ci95[1] + drift))
    # a single threshold level has no drift information: intervals unchanged
    solo = empirical.runs_family(
        path, u_quantiles=(0.999,), ms=(50,), rng=np.random.default_rng(0)
    )
    direct = empirical.runs_estimator(
        path, float(np.quantile(x2, 0.999)), 50, rng=np.random.default_rng(0)
    )
    assert solo[(0.999, 50)].ci95 == direct.ci95


def test_runs_estimator_no_exceedances(rng):
    with pytest.raises(NoExceedances):
        empirical._runs_theta(np.ones(1_000), 10.0, 5)


def test_empirical_extremogram_iid(rng):
    x2 = rng.exponential(size=200_000)
    chi = empirical.empirical_extremogram(_path(x2), float(np.quantile(x2, 0.999)), 5)
    assert chi[0] == pytest.approx(1.0)
    assert np.all(chi[1:] < 0.02)


def test_empirical_extremogram_known_sequence():
    x2 = np.array([11, 12, 1, 11, 1, 1, 1, 1, 1, 1], dtype=float)
    chi = empirical.empirical_extremogram(_path(x2), 10.0, 2)
    # exceedances at t=0,1,3 within the valid range t < 8
    assert chi[0] == 1.0
    assert chi[1] == pytest.approx(1 / 3)  # only t=0 is followed at lag 1
    assert chi[2] == pytest.approx(1 / 3)  # only t=1 is followed at lag 2


def test_tail_qq_recovers_pareto_index(rng):
    kappa = 2.0
    x2 = rng.pareto(kappa, size=500_000) + 1.0
    qq = empirical.tail_qq(x2, 0.99, np.geomspace(1.0, 30.0, 15))
    assert qq.slope == pytest.approx(-kappa, abs=max(4 * qq.slope_stderr, 0.05))
    assert qq.n_cond > 1_000


def test_tail_qq_accepts_process_path(rng):
    x2 = rng.pareto(1.5, size=50_000) + 1.0
    qq = empirical.tail_qq(_path(x2), 0.99, np.geomspace(1.0, 10.0, 10))
    assert qq.slope < -1.0
