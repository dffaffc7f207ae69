"""Cluster functionals of the squared process and their signed-tail versions.

From a batch of tail chains conditioned on an exceedance at time 0 we read
off the limit extremogram chi(tau), the ladder theta^(i) = P(exactly i
exceedances along the chain), the cluster-size pmf pi, and the extremal
index theta = theta^(1).  The identity sum_i i*pi(i) = 1/theta holds by
construction of the ladder.

The signed upper/lower-tail versions follow by Bernoulli thinning with the
tail-skewness parameter delta: each exceedance of X^2 is an upper exceedance
of X independently with probability delta.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import stats as st

from . import innovations
from .errors import NumericalError
from .sre import GarchSpec
from .spectral import ParticleEnsemble, sigma_component_samples
from .tailchain import ChainBatchSummary, Condition

_DELTA_EPS = 1e-12


class TruncationWarning(UserWarning):
    """Cluster-size mass beyond i_max exceeded the documented bound."""


@dataclass
class ClusterLadder:
    theta_ladder: np.ndarray       # theta^(i) = P(count = i), i = 1..i_max
    theta_ladder_stderr: np.ndarray
    pi: np.ndarray                 # cluster-size pmf, index i-1 <-> size i
    theta: float                   # extremal index = theta^(1)
    theta_stderr: float
    i_max: int
    tail_mass: float               # observed mass beyond i_max


@dataclass
class SignedFunctionals:
    delta: float
    Pi_up: float
    Pi_lo: float
    pi_up: np.ndarray
    pi_lo: np.ndarray
    theta_up: float
    theta_lo: float
    chi_up: np.ndarray | None = None
    chi_lo: np.ndarray | None = None


@dataclass
class ClusterReport:
    chi_x2: np.ndarray
    chi_x2_stderr: np.ndarray
    theta_ladder: np.ndarray
    pi_x2: np.ndarray
    theta_x2: float
    theta_x2_stderr: float
    delta: float
    chi_up: np.ndarray
    chi_lo: np.ndarray
    pi_up: np.ndarray
    pi_lo: np.ndarray
    theta_up: float
    theta_lo: float
    theta_up_stderr: float
    theta_lo_stderr: float
    Pi_up: float
    Pi_lo: float
    n_chains: int

    def to_dict(self) -> dict:
        return {
            "chi_x2": self.chi_x2.tolist(),
            "chi_x2_stderr": self.chi_x2_stderr.tolist(),
            "theta_ladder": self.theta_ladder.tolist(),
            "pi_x2": self.pi_x2.tolist(),
            "theta_x2": self.theta_x2,
            "theta_x2_stderr": self.theta_x2_stderr,
            "delta": self.delta,
            "chi_up": self.chi_up.tolist(),
            "chi_lo": self.chi_lo.tolist(),
            "pi_up": self.pi_up.tolist(),
            "pi_lo": self.pi_lo.tolist(),
            "theta_up": self.theta_up,
            "theta_lo": self.theta_lo,
            "theta_up_stderr": self.theta_up_stderr,
            "theta_lo_stderr": self.theta_lo_stderr,
            "Pi_up": self.Pi_up,
            "Pi_lo": self.Pi_lo,
            "n_chains": self.n_chains,
        }


def extremogram_limit(summary: ChainBatchSummary) -> tuple[np.ndarray, np.ndarray]:
    """chi(tau) = fraction of chains exceeding at lag tau, with binomial SE."""
    if summary.condition != Condition.ON_X2:
        raise ValueError("extremogram needs chains conditioned on x2hat[0] > 1")
    n = summary.n_chains
    chi = summary.exceed_counts / n
    stderr = np.sqrt(chi * (1.0 - chi) / n)
    return chi, stderr


def cluster_ladder(
    summary: ChainBatchSummary, i_max: int = 200, tail_tol: float = 1e-3
) -> ClusterLadder:
    """Ladder, cluster-size pmf and extremal index from the count histogram.

    theta^(i) is the probability the chain collects exactly i exceedances;
    the forward-count construction makes pi(i) =
    (theta^(i) - theta^(i+1)) / theta^(1) the cluster-size pmf and
    theta = theta^(1) the extremal index.  Tiny negative pmf entries from
    Monte Carlo wiggle are clipped and the pmf renormalized.
    """
    hist = summary.count_hist
    n = summary.n_chains
    if hist[1:].sum() == 0:
        raise NumericalError("no chains with any exceedance")
    upper = min(i_max, hist.size - 2)
    theta_ladder = hist[1: upper + 1] / n
    theta_next = hist[2: upper + 2] / n
    tail_mass = float(hist[upper + 1:].sum() / n)
    if tail_mass > tail_tol:
        warnings.warn(
            f"cluster-size mass {tail_mass:.2e} beyond i_max={i_max}",
            TruncationWarning,
            stacklevel=2,
        )
    theta = float(theta_ladder[0])
    if theta <= 0:
        raise NumericalError("no chains with exactly one exceedance")
    pi_raw = (theta_ladder - theta_next) / theta
    pi = np.maximum(pi_raw, 0.0)
    pi /= pi.sum()
    stderr = np.sqrt(theta_ladder * (1.0 - theta_ladder) / n)
    return ClusterLadder(
        theta_ladder=theta_ladder,
        theta_ladder_stderr=stderr,
        pi=pi,
        theta=theta,
        theta_stderr=float(np.sqrt(theta * (1.0 - theta) / n)),
        i_max=upper,
        tail_mass=tail_mass,
    )


def tail_ratio(inn: innovations.Innovation, x: np.ndarray) -> np.ndarray:
    """P(Z > x | |Z| > x), the signed share of a two-sided exceedance at x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    up = np.asarray(innovations.survival(inn, x), dtype=float)
    lo = np.asarray(innovations.cdf(inn, -x), dtype=float)
    tot = up + lo
    limit = innovations.delta_z(inn)
    return np.where(tot > 0, up / np.maximum(tot, 1e-300), limit)


def delta_eval(
    spec: GarchSpec,
    sigma2hat_samples: np.ndarray,
    weights: np.ndarray | None = None,
    grid_points: int = 256,
) -> float:
    """Tail skewness delta = E[ P(Z > S^{-1/2} | |Z| > S^{-1/2}) ].

    The expectation is over the volatility component S of the angular
    measure (weighted samples).  Symmetric innovations give exactly 1/2.
    The ratio is evaluated on a log-spaced grid of thresholds and
    interpolated, since each skew-t tail probability needs a quadrature.
    """
    inn = spec.innovation
    if inn.kind != innovations.SKEW_T or inn.xi == 0.0:
        return 0.5
    s = np.asarray(sigma2hat_samples, dtype=float)
    if weights is None:
        weights = np.full(s.size, 1.0 / s.size)
    limit = innovations.delta_z(inn)
    x = np.where(s > 0, s, np.inf) ** -0.5
    cap = 1e4
    finite = x < cap
    out = np.full(s.shape, limit)
    if finite.any():
        xf = x[finite]
        glo, ghi = xf.min(), xf.max()
        if ghi / max(glo, 1e-300) < 1.0 + 1e-9:
            out[finite] = tail_ratio(inn, np.array([glo]))[0]
        else:
            grid = np.geomspace(glo, ghi, grid_points)
            vals = tail_ratio(inn, grid)
            out[finite] = np.interp(np.log(xf), np.log(grid), vals)
    return float(out @ weights)


def delta_from_ensemble(
    spec: GarchSpec, ensemble: ParticleEnsemble, kappa: float | None = None
) -> float:
    """delta via the volatility component of a converged spectral ensemble."""
    s, w = sigma_component_samples(ensemble, spec)
    return delta_eval(spec, s, weights=w)


def delta_limit(inn: innovations.Innovation, kappa: float) -> float:
    """Tail skewness delta = E[Z_+^{2 kappa}] / E[|Z|^{2 kappa}].

    Because X = sigma * Z with sigma independent of Z and the tail of X^2
    regularly varying with index -kappa, the upper share of a two-sided
    exceedance converges to this moment ratio whenever E[|Z|^{2 kappa}] is
    finite.  When the moment diverges (2 kappa >= nu for the t family) the
    extreme |Z| factor dominates and the share is the raw tail-probability
    limit delta_z instead.  Symmetric innovations give exactly 1/2.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if inn.kind != innovations.SKEW_T or inn.xi == 0.0:
        return 0.5
    if not innovations.abs_moment_finite(inn, 2.0 * kappa):
        return innovations.delta_z(inn)

    def moment(sign: float) -> float:
        val, _ = integrate.quad(
            lambda z: z ** (2.0 * kappa) * float(innovations.density(inn, sign * z)),
            0.0,
            np.inf,
            limit=400,
        )
        return val

    up, lo = moment(1.0), moment(-1.0)
    return up / (up + lo)


def signed_transforms(
    pi: np.ndarray,
    theta: float,
    delta: float,
    chi: np.ndarray | None = None,
) -> SignedFunctionals:
    """Upper/lower-tail functionals by Bernoulli thinning with delta.

    Each squared-process exceedance is an upper exceedance independently
    with probability delta; a cluster of size k therefore contributes an
    upper cluster of Binomial(k, delta) exceedances, conditioned positive.
    delta in {0, 1} returns the continuous limits.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    pi = np.asarray(pi, dtype=float)

    def one_side(d: float) -> tuple[float, np.ndarray, float]:
        sizes = np.arange(1, pi.size + 1)
        if d < _DELTA_EPS:
            # this tail sees almost no exceedances: every retained cluster
            # is a singleton and the extremal index tends to theta * mean size
            Pi = 1.0
            pmf = np.zeros(pi.size)
            pmf[0] = 1.0
            th = theta * float(sizes @ pi)
            return Pi, pmf, th
        Pi = float(pi @ (1.0 - d) ** sizes)
        j = sizes
        pmf_matrix = st.binom.pmf(j[None, :], sizes[:, None], d)
        pmf = pi @ pmf_matrix
        pmf /= pmf.sum()  # analytically a pmf; remove cancellation rounding
        th = theta * (1.0 - Pi) / d
        return Pi, pmf, th

    Pi_up, pi_up, theta_up = one_side(delta)
    Pi_lo, pi_lo, theta_lo = one_side(1.0 - delta)
    chi_up = chi_lo = None
    if chi is not None:
        chi = np.asarray(chi, dtype=float)
        chi_up = delta * chi
        chi_lo = chi - chi_up
        # nudge chi_up by <= 1 ulp where rounding breaks chi_up + chi_lo == chi
        bad = (chi_up + chi_lo) != chi
        chi_up[bad] = chi[bad] - chi_lo[bad]
    return SignedFunctionals(
        delta=delta,
        Pi_up=Pi_up,
        Pi_lo=Pi_lo,
        pi_up=pi_up,
        pi_lo=pi_lo,
        theta_up=theta_up,
        theta_lo=theta_lo,
        chi_up=chi_up,
        chi_lo=chi_lo,
    )


def build_cluster_report(
    spec: GarchSpec,
    ensemble: ParticleEnsemble,
    summary: ChainBatchSummary,
    i_max: int = 200,
    kappa: float | None = None,
) -> ClusterReport:
    """Assemble the full squared + signed cluster report for one model.

    When kappa is supplied, delta uses the exact moment-ratio limit; otherwise
    it falls back to the ensemble average of finite-threshold tail ratios.
    """
    chi, chi_stderr = extremogram_limit(summary)
    ladder = cluster_ladder(summary, i_max=i_max)
    if kappa is not None:
        delta = delta_limit(spec.innovation, kappa)
    else:
        delta = delta_from_ensemble(spec, ensemble)
    signed = signed_transforms(ladder.pi, ladder.theta, delta, chi=chi)
    scale_up = (1.0 - signed.Pi_up) / max(delta, _DELTA_EPS)
    scale_lo = (1.0 - signed.Pi_lo) / max(1.0 - delta, _DELTA_EPS)
    return ClusterReport(
        chi_x2=chi,
        chi_x2_stderr=chi_stderr,
        theta_ladder=ladder.theta_ladder,
        pi_x2=ladder.pi,
        theta_x2=ladder.theta,
        theta_x2_stderr=ladder.theta_stderr,
        delta=delta,
        chi_up=signed.chi_up,
        chi_lo=signed.chi_lo,
        pi_up=signed.pi_up,
        pi_lo=signed.pi_lo,
        theta_up=signed.theta_up,
        theta_lo=signed.theta_lo,
        theta_up_stderr=ladder.theta_stderr * scale_up,
        theta_lo_stderr=ladder.theta_stderr * scale_lo,
        Pi_up=signed.Pi_up,
        Pi_lo=signed.Pi_lo,
        n_chains=summary.n_chains,
    )
