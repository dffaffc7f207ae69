"""Distribution-level checks for the innovation laws.

Oracles: quadrature of the density for moments and tail probabilities,
inverse-cdf sampling as an independent sampler, and scipy's KS machinery
for distributional agreement.
"""

from __future__ import annotations

import numpy as np
import pytest
from scipy import integrate, stats

from garchtails import innovations
from garchtails.errors import InvalidDof

ALL_KINDS = [
    innovations.standardize(innovations.GAUSSIAN),
    innovations.standardize(innovations.SCALED_T, nu=3.0),
    innovations.standardize(innovations.SCALED_T, nu=5.0),
    innovations.standardize(innovations.SKEW_T, nu=3.0, xi=1.0),
    innovations.standardize(innovations.SKEW_T, nu=4.0, xi=-0.7),
]

IDS = ["gauss", "t3", "t5", "skewt3_pos", "skewt4_neg"]


@pytest.mark.parametrize("inn", ALL_KINDS, ids=IDS)
def test_density_is_standardized(inn):
    total = integrate.quad(lambda z: float(innovations.density(inn, z)), -np.inf, np.inf, limit=200)[0]
    mean = integrate.quad(lambda z: z * float(innovations.density(inn, z)), -np.inf, np.inf, limit=200)[0]
    assert total == pytest.approx(1.0, abs=1e-8)
    assert mean == pytest.approx(0.0, abs=1e-8)
    if inn.kind == innovations.GAUSSIAN or inn.nu > 2.5:
        # variance quadrature converges slowly very close to nu = 2
        var = integrate.quad(
            lambda z: z * z * float(innovations.density(inn, z)),
            -np.inf, np.inf, limit=400,
        )[0]
        assert var == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("inn", ALL_KINDS, ids=IDS)
def test_cdf_survival_and_quantile_consistency(inn):
    pts = np.array([-3.0, -1.0, -0.2, 0.0, 0.4, 1.5, 4.0])
    c = innovations.cdf(inn, pts)
    s = innovations.survival(inn, pts)
    np.testing.assert_allclose(c + s, 1.0, atol=1e-8)
    assert np.all(np.diff(c) > 0)
    # cdf matches its own density integral
    for x in (-1.3, 0.7):
        direct = integrate.quad(
            lambda z: float(innovations.density(inn, z)), -np.inf, x, limit=200
        )[0]
        assert float(innovations.cdf(inn, x)) == pytest.approx(direct, abs=1e-7)
    for p in (0.05, 0.5, 0.93):
        x = innovations.quantile(inn, p)
        assert float(innovations.cdf(inn, x)) == pytest.approx(p, abs=1e-7)


@pytest.mark.parametrize("inn", ALL_KINDS, ids=IDS)
def test_sampler_matches_cdf(inn, rng):
    x = innovations.sample(inn, 20_000, rng)
    res = stats.kstest(x, lambda v: np.asarray(innovations.cdf(inn, v), dtype=float))
    assert res.pvalue > 1e-3


def test_direct_and_inverse_cdf_samplers_agree(rng):
    inn = innovations.standardize(innovations.SKEW_T, nu=3.0, xi=1.0)
    a = innovations.sample(inn, 4_000, rng)
    b = innovations.sample_inverse_cdf(inn, 1_500, rng)
    res = stats.ks_2samp(a, b)
    assert res.pvalue > 1e-3


@pytest.mark.parametrize("inn", ALL_KINDS, ids=IDS)
def test_tail_skewness_limit(inn):
    d = innovations.delta_z(inn)
    if inn.kind != innovations.SKEW_T or inn.xi == 0.0:
        assert d == 0.5
        return
    # oracle: the ratio P(Z > x) / P(|Z| > x) evaluated far in the tail
    x = 2_000.0
    up = float(innovations.survival(inn, x))
    lo = float(innovations.cdf(inn, -x))
    assert d == pytest.approx(up / (up + lo), abs=2e-3)
    assert 0.0 < d < 1.0


def test_moment_finiteness_boundaries():
    t3 = innovations.standardize(innovations.SCALED_T, nu=3.0)
    g = innovations.standardize(innovations.GAUSSIAN)
    assert innovations.abs_moment_finite(g, 50.0)
    assert innovations.abs_moment_finite(t3, 2.9)
    assert not innovations.abs_moment_finite(t3, 3.0)
    assert not innovations.abs_moment_finite(t3, 4.0)


def test_invalid_degrees_of_freedom():
    with pytest.raises(InvalidDof):
        innovations.standardize(innovations.SCALED_T, nu=2.0)
    with pytest.raises(InvalidDof):
        innovations.standardize(innovations.SKEW_T, nu=1.5, xi=0.5)
    with pytest.raises(ValueError):
        innovations.standardize("cauchy")


def test_skewness_constant_sign():
    assert innovations.skewness_constant(3.0, 1.0) > 0
    assert innovations.skewness_constant(3.0, -1.0) < 0
    assert innovations.skewness_constant(3.0, 0.0) == 0.0
