"""Tail-chain generation: initial law, conditioning, and batch reductions.

Oracles: the closed-form Pareto law of the initial radius, direct
re-simulation of single chains, and exact conditioning predicates.
"""

from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from garchtails import models, spectral, tailchain
from garchtails.spectral import SpectralConfig, run_to_convergence
from garchtails.tailchain import Condition


@pytest.fixture(scope="module")
def c3_setup():
    spec = models.builtin("C", 3)
    rng = np.random.default_rng(42)
    cfg = SpectralConfig(j=2_000, n=300_000, n_b=30_000, u_quantile=0.99)
    ens, _ = run_to_convergence(spec, 1.0, cfg, rng)
    return spec, ens


def test_initial_radius_is_pareto(c3_setup, rng):
    _, ens = c3_setup
    kappa = 1.0
    r0, idx = tailchain.propose_initial(ens, kappa, 50_000, rng)
    assert r0.min() >= 1.0
    assert idx.min() >= 0 and idx.max() < ens.size
    res = stats.kstest(r0, lambda r: 1.0 - np.power(r, -kappa))
    assert res.pvalue > 1e-3


def test_accepted_initial_states_satisfy_conditioning(c3_setup, rng):
    spec, ens = c3_setup
    r0, theta, used = tailchain._accept_initial(spec, ens, 1.0, 2_000, Condition.ON_X2, rng)
    assert np.all(r0 * theta[:, 0] > 1.0)
    assert used >= 2_000
    r0s, thetas, _ = tailchain._accept_initial(
        spec, ens, 1.0, 2_000, Condition.ON_SIGMA2, rng
    )
    assert np.all(r0s * thetas[:, spec.q] > 1.0)


def test_sigma_conditioning_requires_volatility_state(rng):
    spec = models.builtin("E", 3)
    ens = spectral.uniform_simplex_ensemble(spec, 100, rng)
    with pytest.raises(ValueError):
        tailchain.batch_chains(spec, 0.25, ens, 10, 100, Condition.ON_SIGMA2, rng)


def test_single_chain_structure(c3_setup, rng):
    spec, ens = c3_setup
    chain = tailchain.sample_chain(spec, 1.0, ens, 200, Condition.ON_X2, rng)
    assert chain.x2hat.shape == (201,)
    assert chain.sigma2hat.shape == (201,)
    assert chain.x2hat[0] > 1.0
    assert chain.r0 >= 1.0
    assert np.all(chain.x2hat >= 0)


def test_batch_reduction_counts(c3_setup, rng):
    spec, ens = c3_setup
    N, T, tau_max = 5_000, 100, 10
    summary = tailchain.batch_chains(
        spec, 1.0, ens, T, N, Condition.ON_X2, rng, tau_max=tau_max
    )
    assert summary.n_chains == N
    assert summary.exceed_counts.shape == (tau_max + 1,)
    # every chain exceeds at lag zero by construction
    assert summary.exceed_counts[0] == N
    assert summary.count_hist.sum() == N
    assert summary.count_hist[0] == 0  # at least the time-0 exceedance
    assert 0 <= summary.alive_at_end <= N
    assert 0 < summary.acceptance_rate <= 1.0
    # lag exceedance probabilities should broadly decay for this model
    chi = summary.exceed_counts / N
    assert chi[tau_max] < chi[0]


def test_batch_matches_single_chain_law(c3_setup):
    # the chunked batch reduction and the single-chain sampler implement the
    # same process: compare lag-1 exceedance rates
    spec, ens = c3_setup
    rng1 = np.random.default_rng(5)
    rng2 = np.random.default_rng(6)
    summary = tailchain.batch_chains(
        spec, 1.0, ens, 30, 4_000, Condition.ON_X2, rng1, tau_max=5
    )
    p_batch = summary.exceed_counts[1] / summary.n_chains
    singles = sum(
        tailchain.sample_chain(spec, 1.0, ens, 1, Condition.ON_X2, rng2).x2hat[1] > 1.0
        for _ in range(1_500)
    )
    p_single = singles / 1_500
    se = np.sqrt(p_batch * (1 - p_batch) / 4_000 + p_single * (1 - p_single) / 1_500)
    assert abs(p_batch - p_single) < 4 * se + 1e-9


def test_tau_max_clamped_to_horizon(c3_setup, rng):
    spec, ens = c3_setup
    summary = tailchain.batch_chains(
        spec, 1.0, ens, 5, 500, Condition.ON_X2, rng, tau_max=50
    )
    assert summary.tau_max == 5
    assert summary.exceed_counts.shape == (6,)
