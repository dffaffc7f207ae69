"""Stochastic-recurrence-equation form of a GARCH(p,q) process.

The squared process stacked with its volatilities, Y_t, satisfies
Y_t = A_t Y_{t-1} + B_t with i.i.d. random matrices A_t driven by the single
scalar Z_t^2.  This module owns the model definition, the A/B construction,
process simulation, and the matrix-norm / dominant-eigenvalue primitives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import innovations
from .errors import ConfigError, ConvergenceError, DimensionError, ExplosionError
from .innovations import Innovation

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


OVERFLOW_GUARD = 1e300


@dataclass(frozen=True)
class GarchSpec:
    """Model order, coefficients and innovation law; single source of truth."""

    p: int
    q: int
    alpha0: float
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    innovation: Innovation

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if self.p < 0 or self.q < 1:
            raise ConfigError(f"need p >= 0 and q >= 1, got p={self.p}, q={self.q}")
        if len(self.alpha) != self.q or len(self.beta) != self.p:
            raise ConfigError("coefficient vectors must match the model order")
        if self.alpha0 <= 0:
            raise ConfigError("alpha0 must be positive")
        if any(a < 0 for a in self.alpha) or any(b < 0 for b in self.beta):
            raise ConfigError("alpha and beta coefficients must be non-negative")
        if self.alpha[-1] <= 0:
            raise ConfigError("alpha[q-1] must be strictly positive")
        if self.p >= 1 and self.beta[-1] <= 0:
            raise ConfigError("beta[p-1] must be strictly positive when p >= 1")

    @property
    def dim(self) -> int:
        return self.p + self.q

    def phi(self) -> float:
        """Sum of the meaningful coefficients; 1 marks the integrated case."""
        return float(sum(self.alpha) + sum(self.beta))

    @property
    def is_igarch(self) -> bool:
        return abs(self.phi() - 1.0) < 1e-12

    @property
    def coeff_row(self) -> np.ndarray:
        """(alpha_1..alpha_q, beta_1..beta_p): the repeated row of A."""
        return np.array(self.alpha + self.beta, dtype=float)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "alpha0": self.alpha0,
            "alpha": list(self.alpha),
            "beta": list(self.beta),
            "innovation": self.innovation.to_dict(),
        }


@dataclass
class MatrixSample:
    """One realisation of (A, B) with its dominant eigenvalue magnitude."""

    a: np.ndarray
    b: np.ndarray
    z2: float
    lam: float


@dataclass
class ProcessPath:
    """Simulated squared observations and volatilities, burn-in included."""

    x2: np.ndarray
    sigma2: np.ndarray
    n: int
    n_b: int

    @property
    def x2_post(self) -> np.ndarray:
        return self.x2[self.n_b:]

    @property
    def sigma2_post(self) -> np.ndarray:
        return self.sigma2[self.n_b:]


def constant_part(spec: GarchSpec) -> np.ndarray:
    """A with z^2 = 0: the coefficient row at q+1 plus the shift sub-blocks."""
    d = spec.dim
    if d < 1:
        raise DimensionError("p + q must be at least 1")
    c = np.zeros((d, d))
    # shift rows for the lagged squared observations
    for i in range(1, spec.q):
        c[i, i - 1] = 1.0
    if spec.p >= 1:
        c[spec.q, :] = spec.coeff_row
        # shift rows for the lagged volatilities
        for j in range(1, spec.p):
            c[spec.q + j, spec.q + j - 1] = 1.0
    return c


def build_matrix(spec: GarchSpec, z2: float) -> MatrixSample:
    """Realised (A, B) for a given squared innovation value."""
    if z2 < 0:
        raise ValueError("z2 must be non-negative")
    a = constant_part(spec)
    a[0, :] = spec.coeff_row * z2
    b = np.zeros(spec.dim)
    b[0] = spec.alpha0 * z2
    if spec.p >= 1:
        b[spec.q] = spec.alpha0
    return MatrixSample(a=a, b=b, z2=float(z2), lam=dominant_eigenvalue(a))


def matrix_norm(a: np.ndarray) -> float:
    """Entrywise absolute sum."""
    return float(np.abs(a).sum())


def dominant_eigenvalue(a: np.ndarray, tol: float = 1e-10, max_iter: int = 10**4) -> float:
    """Spectral radius of a small non-negative matrix by power iteration."""
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    if d == 1:
        return float(abs(a[0, 0]))
    x = np.ones(d) / d
    lam = 0.0
    for _ in range(max_iter):
        y = a @ x
        norm = np.abs(y).sum()
        if norm == 0.0:
            return 0.0
        lam = float(x @ y / (x @ x))
        x_new = y / norm
        if np.abs(a @ x_new - lam * x_new).max() < tol * max(1.0, abs(lam)):
            return abs(lam)
        x = x_new
    raise ConvergenceError(f"power iteration did not reach tol={tol} in {max_iter} iterations")


def dominant_eigenvalues(spec: GarchSpec, z2: np.ndarray) -> np.ndarray:
    """Vector of spectral radii of A(z^2) across draws.

    d <= 2 uses the closed-form Perron root; larger orders fall back to a
    batched dense eigensolver (the matrices are tiny).
    """
    z2 = np.asarray(z2, dtype=float)
    d = spec.dim
    if d == 1:
        return spec.alpha[0] * z2
    if d == 2:
        c = constant_part(spec)
        r = spec.coeff_row
        tr = r[0] * z2 + c[1, 1]
        det = (r[0] * z2) * c[1, 1] - (r[1] * z2) * c[1, 0]
        disc = np.sqrt(np.maximum(tr * tr - 4 * det, 0.0))
        return 0.5 * (tr + disc)
    c = constant_part(spec)
    r = spec.coeff_row
    out = np.empty(z2.shape[0])
    chunk = 200_000
    for lo in range(0, z2.shape[0], chunk):
        zc = z2[lo:lo + chunk]
        mats = np.broadcast_to(c, (zc.shape[0], d, d)).copy()
        mats[:, 0, :] = r[None, :] * zc[:, None]
        out[lo:lo + chunk] = np.abs(np.linalg.eigvals(mats)).max(axis=1)
    return out


@njit(cache=True)
def _recursion(alpha0, alpha, beta, z2, sigma2_init, x2_init, guard):
    n = z2.shape[0]
    q = alpha.shape[0]
    p = beta.shape[0]
    m = max(q, p)
    sigma2 = np.empty(n + m)
    x2 = np.empty(n + m)
    for i in range(m):
        sigma2[i] = sigma2_init
        x2[i] = x2_init
    for t in range(m, n + m):
        s = alpha0
        for i in range(q):
            s += alpha[i] * x2[t - 1 - i]
        for j in range(p):
            s += beta[j] * sigma2[t - 1 - j]
        if s > guard:
            return sigma2, x2, t - m
        sigma2[t] = s
        x2[t] = s * z2[t - m]
    return sigma2, x2, -1


def simulate(spec: GarchSpec, n: int, n_b: int, rng: np.random.Generator) -> ProcessPath:
    """Simulate n steps (burn-in n_b of them flagged on the path).

    The pre-sample state is the fixed point of the expected recursion when
    phi < 1, otherwise the all-alpha0 vector.
    """
    if not n > n_b >= 0:
        raise ValueError("need n > n_b >= 0")
    z = innovations.sample(spec.innovation, n, rng)
    z2 = z * z
    phi = spec.phi()
    init = spec.alpha0 / (1.0 - phi) if phi < 1 else spec.alpha0
    sigma2, x2, exploded = _recursion(
        spec.alpha0,
        np.array(spec.alpha, dtype=float),
        np.array(spec.beta, dtype=float),
        z2,
        init,
        init,
        OVERFLOW_GUARD,
    )
    if exploded >= 0:
        raise ExplosionError(f"sigma^2 exceeded {OVERFLOW_GUARD:g} at step {exploded}")
    m = max(spec.q, spec.p)
    return ProcessPath(x2=x2[m:], sigma2=sigma2[m:], n=n, n_b=n_b)


def radii(path: ProcessPath, spec: GarchSpec) -> tuple[np.ndarray, int]:
    """L1 radius R_t of the state vector Y_t along a path.

    Returns (r, t0); r[i] is the radius at path index t0 + i, where t0 is the
    first index with a full lag window.
    """
    q, p = spec.q, spec.p
    t0 = max(q, p) - 1
    n = path.x2.shape[0]
    r = np.zeros(n - t0)
    cx = np.concatenate(([0.0], np.cumsum(path.x2)))
    r += cx[t0 + 1 + np.arange(n - t0)] - cx[t0 + 1 + np.arange(n - t0) - q]
    if p >= 1:
        cs = np.concatenate(([0.0], np.cumsum(path.sigma2)))
        r += cs[t0 + 1 + np.arange(n - t0)] - cs[t0 + 1 + np.arange(n - t0) - p]
    return r, t0


def apply_matrices(spec: GarchSpec, y: np.ndarray, z2: np.ndarray) -> np.ndarray:
    """Batched products A(z2[i]) @ y[i] without forming the matrices.

    y has shape (m, d) for state vectors or (m, d, d) for matrix products;
    z2 has shape (m,).  Exploits the fact that A differs from the shift
    skeleton only through the coefficient row, which appears scaled by z^2 in
    row 0 and unscaled in row q.
    """
    r = spec.coeff_row
    q, p = spec.q, spec.p
    vec = y.ndim == 2
    if vec:
        y = y[:, :, None]
    s = np.einsum("j,mjk->mk", r, y)
    out = np.empty_like(y)
    out[:, 0, :] = z2[:, None] * s
    out[:, 1:q, :] = y[:, 0:q - 1, :]
    if p >= 1:
        out[:, q, :] = s
        out[:, q + 1:, :] = y[:, q:q + p - 1, :]
    return out[:, :, 0] if vec else out


def state_vectors(path: ProcessPath, spec: GarchSpec, idx: np.ndarray) -> np.ndarray:
    """Rows Y_t = (X_t^2..X_{t-q+1}^2, sigma_t^2..sigma_{t-p+1}^2) at path indices idx."""
    q, p = spec.q, spec.p
    cols = [path.x2[idx - i] for i in range(q)]
    cols += [path.sigma2[idx - j] for j in range(p)]
    return np.column_stack(cols)
