"""Sequential importance sampling for the spectral (angular) measure H.

The angular part Theta = Y/||Y||_1 of the state vector, conditioned on a
large radius, converges to a distribution H on the unit simplex that is the
fixed point of the map

    theta  ->  A theta / ||A theta||_1,   weighted by ||A theta||_1^kappa.

The particle scheme here iterates that map: resample from the weighted
ensemble, push each particle through an independent A draw, renormalize, and
reweight.  The same ensemble yields the moment curve

    rho_k = E ||A Theta||_1^k   (expectation over both A and Theta ~ H),

whose unique crossing of 1 in k is the tail index kappa.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import innovations, sre
from .errors import (
    DegenerateWeights,
    MomentDiverged,
    NoConvergence,
    NoCrossing,
    NumericalError,
    TooFewParticles,
)
from .sre import GarchSpec

SIMPLEX_TOL = 1e-12


@dataclass
class ParticleEnsemble:
    """J weighted points on the (p+q) unit simplex."""

    particles: np.ndarray    # (J, d)
    weights: np.ndarray      # (J,), nonneg, sums to 1
    iteration: int
    kappa_used: float

    @property
    def size(self) -> int:
        return self.particles.shape[0]

    @property
    def ess(self) -> float:
        """Effective sample size 1 / sum(weights^2)."""
        return float(1.0 / np.square(self.weights).sum())

    def validate(self) -> None:
        if np.any(self.particles < -SIMPLEX_TOL):
            raise NumericalError("negative particle coordinate")
        sums = self.particles.sum(axis=1)
        if np.abs(sums - 1.0).max() > 1e-9:
            raise NumericalError("particle L1 norms drifted from 1")
        if abs(self.weights.sum() - 1.0) > 1e-9 or np.any(self.weights < 0):
            raise NumericalError("weights are not a probability vector")

    def marginal_cdf(self, coord: int, x: np.ndarray) -> np.ndarray:
        """Weighted empirical CDF of one coordinate at points x."""
        order = np.argsort(self.particles[:, coord], kind="stable")
        xs = self.particles[order, coord]
        cw = np.cumsum(self.weights[order])
        idx = np.searchsorted(xs, x, side="right")
        return np.concatenate(([0.0], cw))[idx]


@dataclass
class ConvergenceDiagnostics:
    ks_trace: list[float] = field(default_factory=list)   # max marginal KS per iter
    weight_ks_trace: list[float] = field(default_factory=list)
    tol_trace: list[float] = field(default_factory=list)
    converged_at: int | None = None
    first_stable: int | None = None


@dataclass
class RhoCurve:
    ks: np.ndarray
    rhos: np.ndarray
    stderrs: np.ndarray
    bracket: tuple[float, float]
    kappa_hat: float

    def to_dict(self) -> dict:
        return {
            "k": self.ks.tolist(),
            "rho": self.rhos.tolist(),
            "stderr": self.stderrs.tolist(),
            "bracket": list(self.bracket),
            "kappa_hat": self.kappa_hat,
        }


@dataclass
class SpectralConfig:
    j: int = 10_000               # resampled ensemble size per iteration
    max_s: int = 100
    window: int = 3               # consecutive passing iterations to declare convergence
    tol_ks: float | None = None   # None: auto-scale to the resampling noise floor
    ess_floor: float = 3.0
    resampling: str = "multinomial"
    # empirical initialization
    n: int = 1_100_000
    n_b: int = 100_000
    u_quantile: float = 0.999
    min_particles: int = 500


@dataclass
class KappaSearchConfig:
    grid_lo: float = 0.05
    grid_hi: float = 4.0
    grid_step: float = 0.25
    tol_kappa: float = 0.005
    z_replicates: int = 1_000
    rho_repeats: int = 3          # retained for the "mc" rho method
    refine_points: int = 5
    stage2_halfwidth: float = 0.06
    burn_steps: int = 10
    coarse_min_steps: int = 10
    coarse_max_steps: int = 30
    rho_min_steps: int = 40
    rho_max_steps: int = 400
    rho_se_floor: float = 3e-4
    # near-root evaluations target a rho error of (local slope) * root_tol,
    # so flat moment curves automatically get longer averaging
    root_tol: float = 0.012
    stage2_max_steps: int = 8_000
    stage2_se_floor: float = 4e-5
    # lower-variance resampling during long rho averaging; the convergence
    # phase keeps the literal multinomial scheme
    averaging_resampling: str = "systematic"
    spectral: SpectralConfig = field(default_factory=SpectralConfig)


def init_ensemble(
    spec: GarchSpec,
    n: int,
    n_b: int,
    u_quantile: float,
    rng: np.random.Generator,
    min_particles: int = 500,
) -> ParticleEnsemble:
    """Equal-weight angles of simulated states with radius above a quantile."""
    if not 0.0 < u_quantile < 1.0:
        raise ValueError("u_quantile must be in (0, 1)")
    path = sre.simulate(spec, n, n_b, rng)
    r, t0 = sre.radii(path, spec)
    # drop burn-in (radius index i corresponds to path index t0 + i)
    keep_from = max(n_b - t0, 0)
    r_post = r[keep_from:]
    u = np.quantile(r_post, u_quantile)
    idx = np.nonzero(r_post > u)[0] + keep_from + t0
    if idx.size < min_particles:
        raise TooFewParticles(
            f"only {idx.size} exceedance angles retained (need {min_particles})"
        )
    y = sre.state_vectors(path, spec, idx)
    theta = y / y.sum(axis=1, keepdims=True)
    j = theta.shape[0]
    return ParticleEnsemble(
        particles=theta,
        weights=np.full(j, 1.0 / j),
        iteration=0,
        kappa_used=np.nan,
    )


def uniform_simplex_ensemble(
    spec: GarchSpec, j: int, rng: np.random.Generator
) -> ParticleEnsemble:
    """Equal-weight Dirichlet(1,..,1) particles; alternative initialization."""
    theta = rng.dirichlet(np.ones(spec.dim), size=j)
    return ParticleEnsemble(theta, np.full(j, 1.0 / j), 0, np.nan)


def _resample(weights: np.ndarray, j: int, rng: np.random.Generator, scheme: str) -> np.ndarray:
    if scheme == "multinomial":
        return rng.choice(weights.size, size=j, p=weights)
    if scheme == "systematic":
        positions = (rng.uniform() + np.arange(j)) / j
        return np.searchsorted(np.cumsum(weights), positions)
    raise ValueError(f"unknown resampling scheme {scheme!r}")


def propagate(
    spec: GarchSpec, theta: np.ndarray, z2: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Map theta -> A(z2) theta / ||A(z2) theta||_1; returns (angles, norms)."""
    y = sre.apply_matrices(spec, theta, z2)
    norms = y.sum(axis=1)
    if np.any(norms <= 0.0):
        raise NumericalError("A theta collapsed to the zero vector")
    return y / norms[:, None], norms


def _tilted_z(
    inn, kappa: float, j: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """z draws from a heavier t proposal, with density-ratio corrections.

    Weighting by ||A(z) theta||^kappa ~ z^{2 kappa} pushes the particle
    weights into the infinite-variance regime when 2 kappa is close to the
    innovation tail index nu.  Drawing z from a t with nu - 2 kappa degrees
    of freedom instead and multiplying the weight by f(z)/proposal(z) keeps
    the combined weight tails bounded, restoring a healthy effective sample
    size and removing the slowly-decaying self-normalisation bias.
    """
    from scipy import stats as st

    nu_prop = max(inn.nu - 2.0 * kappa, 0.5)
    z = inn.mu + inn.omega * rng.standard_t(nu_prop, size=j)
    ratio = innovations.density(inn, z) / (
        st.t.pdf((z - inn.mu) / inn.omega, nu_prop) / inn.omega
    )
    return z, ratio


def step(
    ensemble: ParticleEnsemble,
    spec: GarchSpec,
    kappa: float,
    rng: np.random.Generator,
    target_j: int | None = None,
    resampling: str = "multinomial",
    ess_floor: float = 3.0,
) -> ParticleEnsemble:
    """One resample / propagate / reweight iteration."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    j = target_j or ensemble.size
    idx = _resample(ensemble.weights, j, rng, resampling)
    if spec.innovation.kind == innovations.GAUSSIAN:
        z = innovations.sample(spec.innovation, j, rng)
        ratio = 1.0
    else:
        z, ratio = _tilted_z(spec.innovation, kappa, j, rng)
    theta, norms = propagate(spec, ensemble.particles[idx], z * z)
    raw = norms**kappa * ratio
    total = raw.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise NumericalError("particle weights overflowed or vanished")
    weights = raw / total
    ess = 1.0 / np.square(weights).sum()
    if ess < ess_floor:
        raise DegenerateWeights(
            f"effective sample size {ess:.1f} below floor {ess_floor}"
        )
    return ParticleEnsemble(theta, weights, ensemble.iteration + 1, kappa)


def weighted_ks(
    x1: np.ndarray, w1: np.ndarray, x2: np.ndarray, w2: np.ndarray
) -> float:
    """KS distance between two weighted empirical distributions."""
    grid = np.concatenate([x1, x2])
    grid.sort(kind="stable")

    def ecdf(x, w):
        order = np.argsort(x, kind="stable")
        xs, cw = x[order], np.cumsum(w[order])
        cw /= cw[-1]
        return np.concatenate(([0.0], cw))[np.searchsorted(xs, grid, side="right")]

    return float(np.abs(ecdf(x1, w1) - ecdf(x2, w2)).max())


def _auto_tol(prev: ParticleEnsemble, cur: ParticleEnsemble, floor: float = 0.004) -> float:
    """Convergence threshold scaled to the two-sample KS noise at current ESS.

    1.36 * sqrt(1/n1 + 1/n2) is the 95% two-sample KS quantile; a 1.5 safety
    factor absorbs the extra dependence that resampling introduces.
    """
    noise = 1.36 * np.sqrt(1.0 / prev.ess + 1.0 / cur.ess)
    return max(floor, 1.5 * noise)


def run_to_convergence(
    spec: GarchSpec,
    kappa: float,
    config: SpectralConfig,
    rng: np.random.Generator,
    start: ParticleEnsemble | None = None,
) -> tuple[ParticleEnsemble, ConvergenceDiagnostics]:
    """Iterate `step` until successive ensembles stop moving.

    Convergence requires, for `window` consecutive iterations, every marginal
    KS distance between successive ensembles and the KS distance between
    their weight distributions to fall below the tolerance (auto-scaled to
    the resampling noise floor unless fixed in the config).
    """
    if start is None:
        start = init_ensemble(
            spec,
            config.n,
            config.n_b,
            config.u_quantile,
            rng,
            min_particles=config.min_particles,
        )
    diag = ConvergenceDiagnostics()
    cur = start
    passes = 0
    for s in range(1, config.max_s + 1):
        nxt = step(
            cur,
            spec,
            kappa,
            rng,
            target_j=config.j,
            resampling=config.resampling,
            ess_floor=config.ess_floor,
        )
        nxt.validate()
        ks = max(
            weighted_ks(
                cur.particles[:, c], cur.weights, nxt.particles[:, c], nxt.weights
            )
            for c in range(spec.dim)
        )
        # weight values as a distribution, on a common per-particle scale
        wks = weighted_ks(
            cur.weights * cur.size,
            np.full(cur.size, 1.0 / cur.size),
            nxt.weights * nxt.size,
            np.full(nxt.size, 1.0 / nxt.size),
        )
        tol = config.tol_ks if config.tol_ks is not None else _auto_tol(cur, nxt)
        diag.ks_trace.append(ks)
        diag.weight_ks_trace.append(wks)
        diag.tol_trace.append(tol)
        cur = nxt
        if ks < tol and wks < tol:
            passes += 1
            if passes >= config.window:
                diag.converged_at = s
                diag.first_stable = s - config.window + 1
                return cur, diag
        else:
            passes = 0
    raise NoConvergence(
        f"ensemble still moving after {config.max_s} iterations "
        f"(last KS {diag.ks_trace[-1]:.4f} vs tol {diag.tol_trace[-1]:.4f})"
    )


_GH_CACHE: tuple[np.ndarray, np.ndarray] | None = None


def _gauss_hermite_nodes(n: int = 101) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for integrals against the standard normal density."""
    global _GH_CACHE
    if _GH_CACHE is None:
        x, w = np.polynomial.hermite_e.hermegauss(n)
        _GH_CACHE = (x, w / np.sqrt(2.0 * np.pi))
    return _GH_CACHE


def _norm_coefficients(
    ensemble: ParticleEnsemble, spec: GarchSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Per-particle (s, c) such that ||A(z) theta||_1 = s z^2 + c."""
    theta = ensemble.particles
    s = theta @ spec.coeff_row
    c = theta[:, : spec.q - 1].sum(axis=1)
    if spec.p >= 2:
        c = c + theta[:, spec.q: spec.q + spec.p - 1].sum(axis=1)
    if spec.p >= 1:
        c = c + s
    return s, c


def rho(
    ensemble: ParticleEnsemble,
    spec: GarchSpec,
    k: float,
    z_replicates: int = 1_000,
    rng: np.random.Generator | None = None,
    method: str = "quadrature",
) -> tuple[float, float]:
    """Moment estimate rho_k = sum_j m_j E_z ||A(z) theta_j||_1^k.

    The norm is affine in z^2 per particle, so the z-expectation is a smooth
    one-dimensional integral; "quadrature" (default) evaluates it adaptively,
    leaving only particle noise, which the returned standard error
    approximates through the ensemble's effective sample size.  "mc" averages
    over z draws instead and reports the z-replication standard error.
    """
    if k == 0.0:
        return 1.0, 0.0
    if not innovations.abs_moment_finite(spec.innovation, 2.0 * k):
        raise MomentDiverged(
            f"E||A Theta||^{k:g} is infinite for nu={spec.innovation.nu}"
        )
    s, c = _norm_coefficients(ensemble, spec)
    w = ensemble.weights
    if method == "quadrature":
        from scipy import integrate

        inn = spec.innovation
        if inn.kind == innovations.GAUSSIAN:
            # fixed Gauss-Hermite nodes: one matrix product, no adaptivity
            gx, gw = _gauss_hermite_nodes()
            est = float(gw @ (np.power(np.outer(gx * gx, s) + c[None, :], k) @ w))
        else:

            def integrand(z):
                z2 = z * z
                per = np.power(z2 * s + c, k) * float(innovations.density(inn, z))
                return float(per @ w)

            lo, _ = integrate.quad(integrand, -np.inf, 0.0, limit=200)
            hi, _ = integrate.quad(integrand, 0.0, np.inf, limit=200)
            est = lo + hi
        # particle-noise scale: weighted dispersion of per-particle values at
        # a representative z^2 = 1, deflated by the effective sample size
        per = np.power(s + c, k)
        mean_per = float(per @ w)
        var_per = float(((per - mean_per) ** 2) @ w)
        stderr = float(np.sqrt(var_per / max(ensemble.ess, 1.0)))
        return float(est), stderr
    if method == "mc":
        rng = rng or np.random.default_rng()
        z = innovations.sample(spec.innovation, z_replicates, rng)
        z2 = z * z
        per_z = np.empty(z_replicates)
        chunk = max(1, 20_000_000 // max(s.size, 1))
        for lo_i in range(0, z_replicates, chunk):
            zc = z2[lo_i: lo_i + chunk, None]
            per_z[lo_i: lo_i + chunk] = np.power(zc * s[None, :] + c[None, :], k) @ w
        est = float(per_z.mean())
        stderr = float(per_z.std(ddof=1) / np.sqrt(z_replicates))
        half_a = per_z[: z_replicates // 2].mean()
        half_b = per_z[z_replicates // 2:].mean()
        rel = abs(half_a - half_b) / max(est, 1e-300)
        if rel > 0.5:
            raise MomentDiverged(
                f"split-half rho_{k:.3g} estimates differ by {rel:.0%}"
            )
        return est, stderr
    raise ValueError(f"unknown method {method!r}")


def _robust_step(
    ensemble: ParticleEnsemble,
    spec: GarchSpec,
    k: float,
    rng: np.random.Generator,
    config: SpectralConfig,
    retries: int = 5,
) -> ParticleEnsemble:
    """`step`, retrying on transient weight collapse.

    Heavy-tailed innovations occasionally let one z draw dominate the weights;
    resampling from the same ensemble with fresh draws recovers.
    """
    for attempt in range(retries + 1):
        try:
            return step(
                ensemble,
                spec,
                k,
                rng,
                target_j=config.j,
                resampling=config.resampling,
                ess_floor=config.ess_floor,
            )
        except DegenerateWeights:
            if attempt == retries:
                raise
    raise AssertionError("unreachable")


def averaged_rho(
    ensemble: ParticleEnsemble,
    spec: GarchSpec,
    k: float,
    rng: np.random.Generator,
    config: KappaSearchConfig,
    min_steps: int | None = None,
    max_steps: int | None = None,
    se_floor: float | None = None,
    adaptive: bool = True,
) -> tuple[float, float, ParticleEnsemble]:
    """Average the per-iteration rho_k estimate over the stationary ensemble.

    A single converged ensemble carries O(1/sqrt(ESS)) particle noise; the
    per-iteration estimates are nearly uncorrelated once the ensemble mixes,
    so averaging over many iterations shrinks the error well below what any
    one ensemble can deliver.  The standard error comes from batch means; the
    loop stops early once the error is small relative to the distance of the
    running mean from 1 (the only scale that matters for root finding).
    """
    from dataclasses import replace

    min_steps = min_steps if min_steps is not None else config.rho_min_steps
    max_steps = max_steps if max_steps is not None else config.rho_max_steps
    se_floor = se_floor if se_floor is not None else config.rho_se_floor
    scfg = replace(config.spectral, resampling=config.averaging_resampling)
    nb = 10  # fixed batch count keeps the error estimate honest as n grows

    def batch_se(arr):
        width = arr.size // nb
        if width == 0:
            return float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else np.inf
        means = arr[: nb * width].reshape(nb, width).mean(axis=1)
        return float(means.std(ddof=1) / np.sqrt(nb))

    vals: list[float] = []
    for _ in range(max_steps):
        ensemble = _robust_step(ensemble, spec, k, rng, scfg)
        v, _ = rho(ensemble, spec, k, config.z_replicates, rng)
        vals.append(v)
        n = len(vals)
        if n >= max(min_steps, 2 * nb) and n % 20 == 0:
            arr = np.asarray(vals)
            se = batch_se(arr)
            mean = float(arr.mean())
            target = max(se_floor, abs(mean - 1.0) / 4.0) if adaptive else se_floor
            if se < target:
                return mean, se, ensemble
    arr = np.asarray(vals)
    return float(arr.mean()), batch_se(arr), ensemble


def find_kappa(
    spec: GarchSpec,
    config: KappaSearchConfig | None = None,
    rng: np.random.Generator | None = None,
) -> RhoCurve:
    """Locate the crossing of rho_k = 1 in k; that root is the tail index.

    The moment curve equals 1 at k=0 and dips below 1 for small k whenever
    the process is stationary, so the walk starts strictly above 0 and looks
    for the unique upcrossing.  Two phases:

    1. Coarse walk: converge the ensemble at each grid k (warm-started from
       the previous k) and take a short rho average, stopping at the first k
       whose estimate is significantly above 1 (or whose moment diverges).
    2. Refinement: long rho averages at several points inside the bracket,
       combined by weighted least squares on log rho, which is locally linear
       in k; the fitted root is kappa_hat.
    """
    config = config or KappaSearchConfig()
    rng = rng or np.random.default_rng()
    ensemble = init_ensemble(
        spec,
        config.spectral.n,
        config.spectral.n_b,
        config.spectral.u_quantile,
        rng,
        min_particles=config.spectral.min_particles,
    )
    ks_out, rhos_out, errs_out = [], [], []
    grid = np.arange(config.grid_lo, config.grid_hi + 1e-9, config.grid_step)
    lo = hi = None
    for k in grid:
        try:
            ensemble, _ = run_to_convergence(
                spec, k, config.spectral, rng, start=ensemble
            )
            val, err, ensemble = averaged_rho(
                ensemble,
                spec,
                k,
                rng,
                config,
                min_steps=config.coarse_min_steps,
                max_steps=config.coarse_max_steps,
                se_floor=2e-3,
            )
        except MomentDiverged:
            if lo is not None:
                # the moment blew up beyond the crossing; treat as rho > 1
                hi = k
                break
            raise
        ks_out.append(float(k))
        rhos_out.append(val)
        errs_out.append(err)
        if val < 1.0 - 2.0 * err:
            lo = float(k)
            continue
        # no longer clearly below 1: the root is near (or just past) k
        if val > 1.0 + 2.0 * err:
            hi = float(k)
        else:
            hi = float(min(k + config.grid_step, config.grid_hi))
        if lo is None:
            if val > 1.0 + 2.0 * err:
                raise NoCrossing(
                    f"rho already exceeds 1 at k={k:.3g}; shrink grid_lo"
                )
            lo = float(max(k - config.grid_step, 1e-3))
        break
    if hi is None:
        raise NoCrossing(
            f"rho stayed below 1 on [{grid[0]:.3g}, {grid[-1]:.3g}]; "
            "widen the grid or check stationarity"
        )
    # stage 1: points across the bracket, quadratic fit of log rho on k
    # (log rho is convex in k, so a straight line would bias the root)
    fit_k: list[float] = []
    fit_lr: list[float] = []
    fit_se: list[float] = []

    from dataclasses import replace

    avg_scfg = replace(config.spectral, resampling=config.averaging_resampling)

    def evaluate(points, min_steps=None, max_steps=None, se_floor=None,
                 adaptive=True):
        nonlocal ensemble, hi
        for k in points:
            try:
                for _ in range(config.burn_steps):
                    ensemble = _robust_step(ensemble, spec, k, rng, avg_scfg)
                val, err, ensemble = averaged_rho(
                    ensemble, spec, k, rng, config,
                    min_steps=min_steps, max_steps=max_steps,
                    se_floor=se_floor, adaptive=adaptive,
                )
            except MomentDiverged:
                hi = min(hi, float(k))
                continue
            ks_out.append(float(k))
            rhos_out.append(val)
            errs_out.append(err)
            fit_k.append(float(k))
            fit_lr.append(np.log(val))
            fit_se.append(max(err / val, 1e-12))

    def wls_fit(deg):
        if len(fit_k) <= deg:
            return None
        # floor the weights: batch-mean error estimates from short runs are
        # noisy, and an underestimated error must not dominate the fit
        se = np.asarray(fit_se)
        se = np.maximum(se, 0.3 * np.median(se))
        return np.polyfit(
            np.asarray(fit_k), np.asarray(fit_lr), deg, w=1.0 / se
        )

    def poly_root(coeffs, clip_lo, clip_hi):
        if coeffs is None:
            return None
        roots = np.roots(coeffs)
        real = roots[np.abs(roots.imag) < 1e-12].real
        # accept only upcrossings, nearest the bracket
        cands = [r for r in real if np.polyval(np.polyder(coeffs), r) > 0]
        if not cands:
            return None
        best = min(cands, key=lambda r: abs(r - 0.5 * (clip_lo + clip_hi)))
        return float(np.clip(best, clip_lo, clip_hi))

    evaluate(
        np.linspace(lo, hi, config.refine_points),
        max_steps=config.rho_max_steps // 2,
    )
    quad = wls_fit(2)
    k0 = poly_root(quad, lo, hi)
    if k0 is None:
        k0 = poly_root(wls_fit(1), lo, hi)
    if k0 is None:
        k0 = 0.5 * (lo + hi)
    # stage 2: narrow window around the provisional root, averaged long
    # enough that the rho error is small relative to the local slope; the
    # chord over the stage-1 span, halved, is a conservative slope estimate
    # (log rho is convex, so the chord overstates the slope at the root)
    if len(fit_k) >= 2 and fit_k[-1] > fit_k[0]:
        slope = 0.5 * abs(fit_lr[-1] - fit_lr[0]) / (fit_k[-1] - fit_k[0])
    else:
        slope = 0.0
    se_target = max(slope * config.root_tol, config.stage2_se_floor)
    w2 = config.stage2_halfwidth
    evaluate(
        [max(k0 - w2, 1e-3), k0, k0 + w2],
        max_steps=config.stage2_max_steps,
        se_floor=se_target,
        adaptive=False,
    )
    kappa_hat = poly_root(wls_fit(2), k0 - 2 * w2, k0 + 2 * w2)
    if kappa_hat is None:
        kappa_hat = k0
    order = np.argsort(ks_out)
    return RhoCurve(
        ks=np.asarray(ks_out)[order],
        rhos=np.asarray(rhos_out)[order],
        stderrs=np.asarray(errs_out)[order],
        bracket=(lo, hi),
        kappa_hat=float(kappa_hat),
    )


def garch11_spectral_cdf(spec: GarchSpec, kappa: float, w) -> np.ndarray:
    """Closed-form H for GARCH(1,1): CDF of the first angular coordinate.

    H([0, w]) is proportional to the integral of (1 + z^2)^kappa f_Z(z) over
    |z| <= sqrt(w / (1 - w)); the constant is fixed by H([0, 1]) = 1.
    """
    from scipy import integrate

    if (spec.p, spec.q) != (1, 1):
        raise ValueError("closed form applies to GARCH(1,1) only")

    def mass(x):
        if x <= 0:
            return 0.0
        val, _ = integrate.quad(
            lambda z: (1 + z * z) ** kappa * float(innovations.density(spec.innovation, z)),
            -x,
            x,
            limit=200,
        )
        return val

    total = integrate.quad(
        lambda z: (1 + z * z) ** kappa * float(innovations.density(spec.innovation, z)),
        -np.inf,
        np.inf,
        limit=200,
    )[0]
    w = np.atleast_1d(np.asarray(w, dtype=float))
    out = np.empty(w.shape)
    for i, wi in enumerate(w):
        if wi >= 1.0:
            out[i] = 1.0
        elif wi <= 0.0:
            out[i] = 0.0
        else:
            out[i] = mass(np.sqrt(wi / (1.0 - wi))) / total
    return out


def sigma_component_samples(
    ensemble: ParticleEnsemble, spec: GarchSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Weighted draws of the volatility component of the angular measure.

    For p >= 1 this is the (q+1)-th coordinate.  ARCH models carry no
    volatility coordinate in the state, so the one-step-ahead volatility
    ratio alpha . theta stands in for it.
    """
    if spec.p >= 1:
        return ensemble.particles[:, spec.q].copy(), ensemble.weights.copy()
    s = ensemble.particles @ np.asarray(spec.alpha)
    return s, ensemble.weights.copy()
