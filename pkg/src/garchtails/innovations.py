"""Innovation distributions: standard normal, scaled Student-t, skew Student-t.

Every distribution is standardised to zero mean and unit variance.  For the
t-family that fixes the location/scale pair (mu, omega) as a function of the
degrees of freedom nu and the skewness xi:

    b = xi/sqrt(1+xi^2) * sqrt(nu/pi) * Gamma((nu-1)/2)/Gamma(nu/2)
    omega = [nu/(nu-2) - b^2]^{-1/2},   mu = -omega*b

The scaled Student-t is the xi=0 special case, Z = T * sqrt((nu-2)/nu).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special
from scipy import stats as st

from .errors import InvalidDof, NonPositiveVariance

GAUSSIAN = "gaussian"
SCALED_T = "scaled_t"
SKEW_T = "skew_t"

KINDS = (GAUSSIAN, SCALED_T, SKEW_T)


@dataclass(frozen=True)
class Innovation:
    kind: str
    nu: float | None = None
    xi: float = 0.0
    mu: float = 0.0
    omega: float = 1.0

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind != GAUSSIAN:
            d["nu"] = self.nu
        if self.kind == SKEW_T:
            d["xi"] = self.xi
        d["mu"] = self.mu
        d["omega"] = self.omega
        return d


def skewness_constant(nu: float, xi: float) -> float:
    """b such that the unit skew-t variate has mean b."""
    g = math.exp(math.lgamma((nu - 1) / 2) - math.lgamma(nu / 2))
    return xi / math.sqrt(1 + xi * xi) * math.sqrt(nu / math.pi) * g


def standardize(kind: str, nu: float | None = None, xi: float = 0.0) -> Innovation:
    """Build an Innovation with the derived (mu, omega) standardisation."""
    if kind not in KINDS:
        raise ValueError(f"unknown innovation kind {kind!r}")
    if kind == GAUSSIAN:
        return Innovation(GAUSSIAN)
    if nu is None or nu <= 2:
        raise InvalidDof(f"nu must exceed 2, got {nu}")
    if kind == SCALED_T:
        xi = 0.0
    b = skewness_constant(nu, xi)
    v = nu / (nu - 2) - b * b
    if v <= 0:
        raise NonPositiveVariance(f"nu={nu}, xi={xi} give non-positive variance {v}")
    omega = v**-0.5
    return Innovation(kind, nu=float(nu), xi=float(xi), mu=-omega * b, omega=omega)


def sample(inn: Innovation, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. standardised draws."""
    if inn.kind == GAUSSIAN:
        return rng.standard_normal(n)
    nu = inn.nu
    if inn.kind == SCALED_T:
        return rng.standard_t(nu, size=n) * math.sqrt((nu - 2) / nu)
    # skew-t via the skew-normal over chi-squared mixture representation
    d = inn.xi / math.sqrt(1 + inn.xi**2)
    w = d * np.abs(rng.standard_normal(n)) + math.sqrt(1 - d * d) * rng.standard_normal(n)
    t = w / np.sqrt(rng.chisquare(nu, size=n) / nu)
    return inn.mu + inn.omega * t


def density(inn: Innovation, z) -> np.ndarray:
    """Probability density of Z at z (vectorised)."""
    z = np.asarray(z, dtype=float)
    if inn.kind == GAUSSIAN:
        return np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
    zs = (z - inn.mu) / inn.omega
    base = st.t.pdf(zs, inn.nu) / inn.omega
    if inn.kind == SCALED_T or inn.xi == 0.0:
        return base
    skew = st.t.cdf(zs * inn.xi * np.sqrt((inn.nu + 1) / (inn.nu + zs * zs)), inn.nu + 1)
    return 2.0 * base * skew


def cdf(inn: Innovation, z) -> np.ndarray:
    """Distribution function of Z at z (vectorised)."""
    z = np.asarray(z, dtype=float)
    if inn.kind == GAUSSIAN:
        return special.ndtr(z)
    if inn.kind == SCALED_T or inn.xi == 0.0:
        return st.t.cdf((z - inn.mu) / inn.omega, inn.nu)

    def one(x):
        if x <= inn.mu:
            val, _ = integrate.quad(lambda s: density(inn, s), -np.inf, x)
            return val
        val, _ = integrate.quad(lambda s: density(inn, s), x, np.inf)
        return 1.0 - val

    return np.vectorize(one)(z)


def survival(inn: Innovation, z) -> np.ndarray:
    """P(Z > z), computed on the tail side for accuracy."""
    z = np.asarray(z, dtype=float)
    if inn.kind == GAUSSIAN:
        return special.ndtr(-z)
    if inn.kind == SCALED_T or inn.xi == 0.0:
        return st.t.sf((z - inn.mu) / inn.omega, inn.nu)

    def one(x):
        if x >= inn.mu:
            val, _ = integrate.quad(lambda s: density(inn, s), x, np.inf)
            return val
        val, _ = integrate.quad(lambda s: density(inn, s), -np.inf, x)
        return 1.0 - val

    return np.vectorize(one)(z)


def quantile(inn: Innovation, p: float) -> float:
    """Inverse cdf by bracketed root find (slow; used as a sampling oracle)."""
    if inn.kind == GAUSSIAN:
        return float(special.ndtri(p))
    if inn.kind == SCALED_T or inn.xi == 0.0:
        return float(st.t.ppf(p, inn.nu) * inn.omega + inn.mu)
    lo, hi = -1.0, 1.0
    while cdf(inn, lo) > p:
        lo *= 2
    while cdf(inn, hi) < p:
        hi *= 2
    return float(optimize.brentq(lambda z: float(cdf(inn, z)) - p, lo, hi, xtol=1e-10))


def sample_inverse_cdf(inn: Innovation, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-cdf sampler; oracle cross-check for `sample`."""
    u = rng.uniform(size=n)
    return np.array([quantile(inn, ui) for ui in u])


def abs_moment_finite(inn: Innovation, r: float) -> bool:
    """Whether E|Z|^r is finite (t-family tails have index nu)."""
    if inn.kind == GAUSSIAN:
        return True
    return r < inn.nu


def delta_z(inn: Innovation) -> float:
    """Limiting P(Z > x | |Z| > x) as x grows: the innovation tail skewness.

    For the skew-t this is F_T(xi*sqrt(nu+1); nu+1), the limit of the ratio of
    the upper and two-sided tail weights; symmetric innovations give 1/2.
    """
    if inn.kind != SKEW_T or inn.xi == 0.0:
        return 0.5
    return float(st.t.cdf(inn.xi * math.sqrt(inn.nu + 1), inn.nu + 1))
