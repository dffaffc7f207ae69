"""Tail chains: the limiting behaviour of the process after an extreme value.

A chain starts from an asymptotically independent pair (R0, Theta0) with
R0 Pareto(kappa) and Theta0 drawn from the spectral ensemble, conditioned on
the relevant component of R0 * Theta0 exceeding 1.  The angle is then pushed
through fresh A draws WITHOUT renormalization, so the chain keeps the full
multiplicative decay:

    x2hat[t]     = R0 * theta_t[0]
    sigma2hat[t] = R0 * theta_t[q]      (p >= 1 only)

Batches are generated in chunks with streaming per-lag exceedance counts and
a total-count histogram, so memory stays bounded at millions of chains.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import innovations, sre
from .errors import RejectionStall
from .sre import GarchSpec
from .spectral import ParticleEnsemble


class Condition(Enum):
    ON_X2 = "x2"
    ON_SIGMA2 = "sigma2"


STOP_EPS = 1e-4     # radius * ||theta||_1 level below which a chain may stop
GRACE_STEPS = 50    # consecutive sub-threshold steps required before stopping


@dataclass
class TailChain:
    r0: float
    x2hat: np.ndarray                 # length T+1
    sigma2hat: np.ndarray | None      # length T+1, None when p = 0
    condition: Condition


@dataclass
class ChainBatchSummary:
    """Streaming reduction over a batch of chains."""

    n_chains: int
    t_max: int
    tau_max: int
    condition: Condition
    exceed_counts: np.ndarray     # (tau_max+1,): chains with x2hat[tau] > 1
    count_hist: np.ndarray        # count_hist[i] = chains with i total exceedances
    alive_at_end: int             # chains with x2hat[t_max] > 1
    proposals: int                # rejection-sampler proposals consumed

    @property
    def acceptance_rate(self) -> float:
        return self.n_chains / max(self.proposals, 1)


def _cond_component(spec: GarchSpec, condition: Condition) -> int:
    if condition == Condition.ON_X2:
        return 0
    if spec.p < 1:
        raise ValueError("sigma2 conditioning needs p >= 1")
    return spec.q


def propose_initial(
    ensemble: ParticleEnsemble,
    kappa: float,
    n: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """n unconditioned proposals (r0 Pareto(kappa), particle indices)."""
    r0 = rng.uniform(size=n) ** (-1.0 / kappa)
    idx = rng.choice(ensemble.size, size=n, p=ensemble.weights)
    return r0, idx


def _accept_initial(
    spec: GarchSpec,
    ensemble: ParticleEnsemble,
    kappa: float,
    n: int,
    condition: Condition,
    rng: np.random.Generator,
    probe_window: int = 1_000_000,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Rejection-sample n accepted (r0, theta0) pairs; returns proposals used."""
    comp = _cond_component(spec, condition)
    r0_out = np.empty(n)
    th_out = np.empty((n, spec.dim))
    got = 0
    proposals = 0
    window_proposals = 0
    window_accepts = 0
    batch = max(4 * n, 4096)
    while got < n:
        r0, idx = propose_initial(ensemble, kappa, batch, rng)
        ok = r0 * ensemble.particles[idx, comp] > 1.0
        proposals += batch
        window_proposals += batch
        window_accepts += int(ok.sum())
        take = min(int(ok.sum()), n - got)
        sel = np.nonzero(ok)[0][:take]
        r0_out[got: got + take] = r0[sel]
        th_out[got: got + take] = ensemble.particles[idx[sel]]
        got += take
        if window_proposals >= probe_window:
            if window_accepts / window_proposals < 1e-6:
                raise RejectionStall(
                    "initial-state acceptance rate collapsed below 1e-6; "
                    "the ensemble and kappa are likely inconsistent"
                )
            window_proposals = window_accepts = 0
    return r0_out, th_out, proposals


def sample_chain(
    spec: GarchSpec,
    kappa: float,
    ensemble: ParticleEnsemble,
    T: int,
    condition: Condition,
    rng: np.random.Generator,
) -> TailChain:
    """One full chain, stored in full (arrays of length T+1)."""
    r0, theta0, _ = _accept_initial(spec, ensemble, kappa, 1, condition, rng)
    r0 = float(r0[0])
    theta = theta0  # (1, d), unnormalized from here on
    x2 = np.zeros(T + 1)
    s2 = np.zeros(T + 1) if spec.p >= 1 else None
    x2[0] = r0 * theta[0, 0]
    if s2 is not None:
        s2[0] = r0 * theta[0, spec.q]
    quiet = 0
    for t in range(1, T + 1):
        z = innovations.sample(spec.innovation, 1, rng)
        theta = sre.apply_matrices(spec, theta, z * z)
        x2[t] = r0 * theta[0, 0]
        if s2 is not None:
            s2[t] = r0 * theta[0, spec.q]
        if r0 * theta.sum() < STOP_EPS:
            quiet += 1
            if quiet >= GRACE_STEPS:
                break
        else:
            quiet = 0
    return TailChain(r0=r0, x2hat=x2, sigma2hat=s2, condition=condition)


def batch_chains(
    spec: GarchSpec,
    kappa: float,
    ensemble: ParticleEnsemble,
    T: int,
    N: int,
    condition: Condition,
    rng: np.random.Generator,
    tau_max: int = 25,
    chunk: int = 20_000,
) -> ChainBatchSummary:
    """N chains reduced to per-lag exceedance counts and a count histogram."""
    tau_max = min(tau_max, T)
    exceed = np.zeros(tau_max + 1, dtype=np.int64)
    # total exceedance counts can reach T+1; accumulate in a dict-free array
    hist = np.zeros(T + 2, dtype=np.int64)
    alive = 0
    proposals = 0
    done = 0
    while done < N:
        m = min(chunk, N - done)
        r0, theta, used = _accept_initial(spec, ensemble, kappa, m, condition, rng)
        proposals += used
        counts = (r0 * theta[:, 0] > 1.0).astype(np.int64)
        exceed[0] += int(counts.sum())
        active = np.ones(m, dtype=bool)
        quiet = np.zeros(m, dtype=np.int64)
        final_exceed = np.zeros(m, dtype=bool)
        for t in range(1, T + 1):
            na = int(active.sum())
            if na == 0:
                break
            z = innovations.sample(spec.innovation, na, rng)
            theta[active] = sre.apply_matrices(spec, theta[active], z * z)
            x2_t = r0[active] * theta[active, 0]
            exc = x2_t > 1.0
            counts_active = counts[active]
            counts_active += exc
            counts[active] = counts_active
            if t <= tau_max:
                exceed[t] += int(exc.sum())
            if t == T:
                final_exceed[active] = exc
            level = r0[active] * theta[active].sum(axis=1)
            q_active = quiet[active]
            q_active = np.where(level < STOP_EPS, q_active + 1, 0)
            quiet[active] = q_active
            still = q_active < GRACE_STEPS
            if not still.all():
                idx_active = np.nonzero(active)[0]
                active[idx_active[~still]] = False
        np.add.at(hist, counts, 1)
        alive += int(final_exceed.sum())
        done += m
    return ChainBatchSummary(
        n_chains=N,
        t_max=T,
        tau_max=tau_max,
        condition=condition,
        exceed_counts=exceed,
        count_hist=hist,
        alive_at_end=alive,
        proposals=proposals,
    )
