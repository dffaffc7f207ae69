"""Particle approximation of the angular measure and the moment curve.

Oracles: brute-force Monte Carlo over innovation draws with dense matrix
products, scipy's two-sample KS statistic, and for a one-dimensional state
(ARCH(1)) the fully analytic moment curve.
"""

from __future__ import annotations

import numpy as np
import pytest
from scipy import integrate, optimize, stats

from garchtails import innovations, models, spectral, sre
from garchtails.errors import MomentDiverged, TooFewParticles
from garchtails.spectral import (
    KappaSearchConfig,
    SpectralConfig,
    averaged_rho,
    find_kappa,
    garch11_spectral_cdf,
    init_ensemble,
    rho,
    run_to_convergence,
    step,
    uniform_simplex_ensemble,
    weighted_ks,
)

from conftest import make_arch1


@pytest.fixture(scope="module")
def spec_c3():
    return models.builtin("C", 3)


@pytest.fixture(scope="module")
def spec_a3():
    return models.builtin("A", 3)


def test_weighted_ks_against_scipy(rng):
    x1 = rng.normal(size=400)
    x2 = rng.normal(0.3, 1.0, size=300)
    w1 = np.full(400, 1.0 / 400)
    w2 = np.full(300, 1.0 / 300)
    ours = weighted_ks(x1, w1, x2, w2)
    ref = stats.ks_2samp(x1, x2).statistic
    assert ours == pytest.approx(ref, abs=1e-12)


def test_weighted_ks_degenerate_cases(rng):
    x = rng.normal(size=100)
    w = np.full(100, 0.01)
    assert weighted_ks(x, w, x, w) == 0.0
    assert weighted_ks(x, w, x + 100.0, w) == pytest.approx(1.0)


def test_step_preserves_simplex_invariants(spec_a3, rng):
    ens = uniform_simplex_ensemble(spec_a3, 2_000, rng)
    for kappa in (0.5, 1.5, 2.37):
        nxt = step(ens, spec_a3, kappa, rng)
        nxt.validate()
        assert nxt.iteration == ens.iteration + 1
        assert nxt.kappa_used == kappa
        assert 1.0 <= nxt.ess <= nxt.size


def test_norm_is_affine_in_z2(spec_a3, rng):
    ens = uniform_simplex_ensemble(spec_a3, 64, rng)
    s, c = spectral._norm_coefficients(ens, spec_a3)
    for z2 in (0.0, 0.5, 3.7):
        dense = np.array(
            [sre.build_matrix(spec_a3, z2).a @ th for th in ens.particles]
        ).sum(axis=1)
        np.testing.assert_allclose(s * z2 + c, dense, rtol=0, atol=1e-13)


@pytest.mark.parametrize("model,code", [("A", 3), ("C", 1), ("E", 2)])
def test_rho_quadrature_matches_brute_force(model, code, rng):
    spec = models.builtin(model, code)
    ens = uniform_simplex_ensemble(spec, 500, rng)
    ens.weights = rng.dirichlet(np.ones(500))
    k = 0.6
    est, _ = rho(ens, spec, k)
    # oracle: explicit norms over many innovation draws
    z = innovations.sample(spec.innovation, 20_000, rng)
    s, c = spectral._norm_coefficients(ens, spec)
    norms = np.power(np.outer(z * z, s) + c[None, :], k)
    brute = float(norms.mean(axis=0) @ ens.weights)
    se = float((norms @ ens.weights).std(ddof=1) / np.sqrt(z.size))
    assert est == pytest.approx(brute, abs=5 * se + 1e-4)


def test_rho_mc_and_quadrature_agree(spec_c3, rng):
    ens = uniform_simplex_ensemble(spec_c3, 1_000, rng)
    q, _ = rho(ens, spec_c3, 1.0)
    m, se = rho(ens, spec_c3, 1.0, z_replicates=4_000, rng=rng, method="mc")
    assert m == pytest.approx(q, abs=5 * se)


def test_rho_divergence_guard(rng):
    spec = models.builtin("C", 1)
    ens = uniform_simplex_ensemble(spec, 200, rng)
    with pytest.raises(MomentDiverged):
        rho(ens, spec, 1.6)


def test_init_ensemble_threshold_and_floor(spec_c3, rng):
    ens = init_ensemble(spec_c3, 200_000, 20_000, 0.995, rng)
    ens.validate()
    assert ens.size >= 500
    with pytest.raises(TooFewParticles):
        init_ensemble(spec_c3, 50_000, 5_000, 0.9999, rng, min_particles=500)


def test_run_to_convergence_diagnostics(spec_c3, rng):
    cfg = SpectralConfig(j=2_000, n=200_000, n_b=20_000, u_quantile=0.99)
    ens, diag = run_to_convergence(spec_c3, 1.0, cfg, rng)
    assert diag.converged_at is not None
    assert diag.first_stable == diag.converged_at - cfg.window + 1
    assert len(diag.ks_trace) == diag.converged_at
    assert len(diag.tol_trace) == len(diag.ks_trace)
    ens.validate()


def test_closed_form_angular_cdf_against_weighted_draws(spec_c3, rng):
    # oracle: importance-weighted draws from the tilted innovation law
    kappa = 1.0
    z = innovations.sample(spec_c3.innovation, 400_000, rng)
    w = (1 + z * z) ** kappa
    w /= w.sum()
    first_coord = z * z / (1 + z * z)
    grid = np.linspace(0.01, 0.99, 25)
    cdf = garch11_spectral_cdf(spec_c3, kappa, grid)
    order = np.argsort(first_coord)
    cw = np.cumsum(w[order])
    emp = cw[np.searchsorted(first_coord[order], grid, side="right") - 1]
    np.testing.assert_allclose(cdf, emp, atol=5e-3)
    assert garch11_spectral_cdf(spec_c3, kappa, [0.0])[0] == 0.0
    assert garch11_spectral_cdf(spec_c3, kappa, [1.0])[0] == 1.0
    with pytest.raises(ValueError):
        garch11_spectral_cdf(models.builtin("A", 3), 1.0, [0.5])


def test_averaged_rho_matches_analytic_arch1(gaussian, rng):
    # one-dimensional state: the moment curve is exactly E (alpha Z^2)^k
    spec = make_arch1(0.5, gaussian)
    cfg = KappaSearchConfig()
    cfg.spectral = SpectralConfig(j=1_000, n=100_000, n_b=10_000, u_quantile=0.99)
    ens, _ = run_to_convergence(spec, 2.0, cfg.spectral, rng)
    val, se, ens = averaged_rho(ens, spec, 2.0, rng, cfg, min_steps=20, max_steps=60)
    exact = integrate.quad(
        lambda z: (0.5 * z * z) ** 2 * float(innovations.density(gaussian, z)),
        -np.inf, np.inf, limit=200,
    )[0]
    assert val == pytest.approx(exact, abs=max(5 * se, 1e-6))


def test_find_kappa_arch1_analytic_root(gaussian):
    spec = make_arch1(0.5, gaussian)

    def h(k):
        m = integrate.quad(
            lambda z: (0.5 * z * z) ** k * float(innovations.density(gaussian, z)),
            0, np.inf, limit=200,
        )[0] * 2.0
        return m - 1.0

    oracle = optimize.brentq(h, 1.5, 4.0, xtol=1e-10)
    cfg = KappaSearchConfig()
    cfg.spectral = SpectralConfig(j=1_000, n=150_000, n_b=15_000, u_quantile=0.99)
    curve = find_kappa(spec, cfg, np.random.default_rng(11))
    assert curve.kappa_hat == pytest.approx(oracle, abs=0.02)
    assert curve.bracket[0] <= curve.kappa_hat <= curve.bracket[1]
    assert np.all(np.diff(curve.ks) >= 0)


def _operator_kappa(spec, k_lo=0.05, k_hi=3.5, n_v=2500, n_x=1500):
    """Deterministic tail-index oracle for two-lag models (p <= 2, q = 2).

    The norm process obeys s_t = (a1 V_t + b1) s_{t-1} + (a2 V_{t-1} + b2)
    s_{t-2} with V_t = Z_t^2, and with x_t = (a2 V_t + b2) / (s_t / s_{t-1})
    the growth rate of E[s_t^k] is the dominant eigenvalue of the 1-D
    weighted operator
        (T_k g)(x) = E_V[(a1 V + b1 + x)^k g((a2 V + b2) / (a1 V + b1 + x))],
    so kappa is a quadrature + power-iteration root with no Monte Carlo.
    """
    a1, a2 = spec.alpha[0], spec.alpha[1]
    b1 = spec.beta[0] if spec.p >= 1 else 0.0
    b2 = spec.beta[1] if spec.p >= 2 else 0.0
    u = np.linspace(-40.0, 60.0, n_v)
    v = np.exp(u)
    z = np.sqrt(v)
    fz = innovations.density(spec.innovation, z) + innovations.density(
        spec.innovation, -z
    )
    w = fz / (2.0 * z) * v * (u[1] - u[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    base = a1 * v + b1
    cnew = a2 * v + b2
    x_hi = cnew.max() / base.min()
    x = np.geomspace(max(cnew.min() / (base.max() + x_hi), 1e-12), x_hi, n_x)

    def log_rho(k):
        r_mat = base[None, :] + x[:, None]
        rk = r_mat**k * w[None, :]
        targets = (cnew[None, :] / r_mat).ravel()
        g = np.ones(n_x)
        lam = np.inf
        for _ in range(2000):
            gi = np.interp(targets, x, g).reshape(n_x, n_v)
            gn = (rk * gi).sum(axis=1)
            new = gn.max()
            g = gn / new
            if abs(new - lam) < 1e-12 * new:
                break
            lam = new
        return np.log(new)

    return optimize.brentq(log_rho, k_lo, k_hi, xtol=1e-5)


def test_operator_oracle_exact_cases():
    # a2 = b2 = 0 collapses the oracle to the scalar GARCH(1,1) moment root
    spec = sre.GarchSpec(
        p=2, q=2, alpha0=1.0, alpha=(0.1, 1e-13), beta=(0.9, 1e-13),
        innovation=models.builtin("C", 1).innovation,
    )
    assert _operator_kappa(spec, 0.5, 2.0) == pytest.approx(1.0, abs=1e-3)
    # integrated two-lag models have kappa = 1 exactly
    for code in (1, 3):
        assert _operator_kappa(models.builtin("D", code), 0.5, 2.5) == (
            pytest.approx(1.0, abs=1e-3)
        )


@pytest.mark.slow
@pytest.mark.parametrize(
    "model,code,expected",
    [
        ("A", 1, 1.2446), ("A", 2, 1.2190), ("A", 3, 2.3699),
        ("B", 1, 1.1070), ("B", 2, 1.0902), ("B", 3, 1.9319),
        ("E", 1, 0.6473), ("E", 2, 0.6772), ("E", 3, 0.2426),
    ],
)
def test_operator_oracle_benchmark_roots(model, code, expected):
    # regression-pins the deterministic roots backing models.EXPECTED kappa;
    # values are grid-refinement stable to 1e-4
    spec = models.builtin(model, code)
    assert _operator_kappa(spec) == pytest.approx(expected, abs=5e-3)


def test_sigma_component_samples_shapes(spec_a3, rng):
    ens = uniform_simplex_ensemble(spec_a3, 100, rng)
    s, w = spectral.sigma_component_samples(ens, spec_a3)
    np.testing.assert_allclose(s, ens.particles[:, spec_a3.q])
    spec_e = models.builtin("E", 3)
    ens_e = uniform_simplex_ensemble(spec_e, 100, rng)
    s_e, _ = spectral.sigma_component_samples(ens_e, spec_e)
    np.testing.assert_allclose(s_e, ens_e.particles @ np.asarray(spec_e.alpha))
