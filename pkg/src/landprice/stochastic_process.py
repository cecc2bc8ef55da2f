"""Productivity processes and the spectral-radius overvaluation criterion.

Two process families are supported:

* ``DeterministicExponential``: (A_Ht, A_Xt) = (A_H0 G_H^t, A_X0 G_X^t).
* ``MarkovMultiplicative``: a relative productivity A_t = G_t A_{t-1} whose
  growth factor is drawn given the (previous, current) Markov state.  Land
  productivity is normalised to A_Xt = 1, so A_Ht = A_t.

Random draws are made per path index from ``numpy.random.default_rng([seed, i])``
so that continuation path ``i`` is identical however the work is split.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import DomainError, NumericError

# --------------------------------------------------------------------------- #
# growth-factor distributions
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class PointMass:
    value: float

    def __post_init__(self):
        if not (self.value > 0 and math.isfinite(self.value)):
            raise DomainError(f"point-mass growth factor must be positive, got {self.value}")

    @property
    def log_location(self):
        return math.log(self.value)

    @property
    def log_scale(self):
        return 0.0

    def moment(self, p: float) -> float:
        return self.value ** p


@dataclass(frozen=True)
class LogNormal:
    """log G ~ Normal(mu, s^2)."""

    mu: float
    s: float

    def __post_init__(self):
        if not (self.s >= 0 and math.isfinite(self.s) and math.isfinite(self.mu)):
            raise DomainError(f"lognormal parameters must be finite with s >= 0, got mu={self.mu}, s={self.s}")

    @property
    def log_location(self):
        return self.mu

    @property
    def log_scale(self):
        return self.s

    def moment(self, p: float) -> float:
        return math.exp(p * self.mu + 0.5 * (p * self.s) ** 2)


def as_growth(g):
    if isinstance(g, (PointMass, LogNormal)):
        return g
    return PointMass(float(g))


# --------------------------------------------------------------------------- #
# processes
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class DeterministicExponential:
    G_H: float
    G_X: float = 1.0
    A_H0: float = 1.0
    A_X0: float = 1.0

    def __post_init__(self):
        for name in ("G_H", "G_X", "A_H0", "A_X0"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise DomainError(f"{name} must be finite and positive, got {v}")

    @property
    def log_growth_ratio(self):
        """log(G_H / G_X), the drift of log relative productivity."""
        return math.log(self.G_H) - math.log(self.G_X)

    def log_levels(self, t):
        t = np.asarray(t, dtype=float)
        return (math.log(self.A_H0) + t * math.log(self.G_H),
                math.log(self.A_X0) + t * math.log(self.G_X))


@dataclass(frozen=True, eq=False)
class MarkovMultiplicative:
    Pi: np.ndarray
    growth: tuple
    n0: int = 0
    A0: float = 1.0
    _mu: np.ndarray = field(init=False, repr=False)
    _s: np.ndarray = field(init=False, repr=False)
    _cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        Pi = np.array(self.Pi, dtype=float)
        if Pi.ndim != 2 or Pi.shape[0] != Pi.shape[1] or Pi.shape[0] < 1:
            raise DomainError(f"transition matrix must be square N x N with N >= 1, got shape {Pi.shape}")
        if np.any(Pi < 0) or np.any(np.abs(Pi.sum(axis=1) - 1.0) > 1e-12):
            raise DomainError("transition matrix rows must be nonnegative and sum to 1 within 1e-12")
        N = Pi.shape[0]
        growth = tuple(tuple(as_growth(g) for g in row) for row in self.growth)
        if len(growth) != N or any(len(row) != N for row in growth):
            raise DomainError(f"growth must be an {N} x {N} array of distributions")
        if not (0 <= self.n0 < N):
            raise DomainError(f"initial state n0={self.n0} outside 0..{N - 1}")
        if not (self.A0 > 0 and math.isfinite(self.A0)):
            raise DomainError(f"A0 must be positive, got {self.A0}")
        Pi.setflags(write=False)
        object.__setattr__(self, "Pi", Pi)
        object.__setattr__(self, "growth", growth)
        mu = np.array([[g.log_location for g in row] for row in growth])
        s = np.array([[g.log_scale for g in row] for row in growth])
        cum = np.cumsum(Pi, axis=1)
        cum[:, -1] = 1.0
        object.__setattr__(self, "_mu", mu)
        object.__setattr__(self, "_s", s)
        object.__setattr__(self, "_cum", cum)

    @property
    def N(self):
        return self.Pi.shape[0]

    def evolve(self, u: np.ndarray, z: np.ndarray, n_start, logA_start):
        """Advance k paths given uniforms ``u`` and normals ``z`` of shape (k, T).

        Returns (states, logA) of shape (k, T + 1); column 0 is the start.
        """
        k, T = u.shape
        states = np.empty((k, T + 1), dtype=np.int64)
        logA = np.empty((k, T + 1))
        states[:, 0] = n_start
        logA[:, 0] = logA_start
        cum, mu, s = self._cum, self._mu, self._s
        for j in range(T):
            prev = states[:, j]
            nxt = (u[:, j, None] >= cum[prev]).sum(axis=1)
            np.minimum(nxt, self.N - 1, out=nxt)
            states[:, j + 1] = nxt
            logA[:, j + 1] = logA[:, j] + mu[prev, nxt] + s[prev, nxt] * z[:, j]
        return states, logA


@dataclass(frozen=True)
class ProductivityPath:
    """Periods 0..T of factor-augmenting productivities, stored as logs."""

    log_AH: np.ndarray
    log_AX: np.ndarray
    state: Optional[np.ndarray] = None
    log_increments: Optional[np.ndarray] = None  # realised log growth of A_H / A_X, Markov only

    @property
    def T(self):
        return len(self.log_AH) - 1

    @property
    def t(self):
        return np.arange(self.T + 1)

    @property
    def A_H(self):
        return np.exp(self.log_AH)

    @property
    def A_X(self):
        return np.exp(self.log_AX)

    @property
    def log_ratio(self):
        return self.log_AH - self.log_AX

    def records(self):
        st = self.state if self.state is not None else [None] * (self.T + 1)
        return [(t, None if n is None else int(n), float(ah), float(ax))
                for t, n, ah, ax in zip(self.t, st, self.A_H, self.A_X)]


def path_rng(seed: int, index: Optional[int] = None) -> np.random.Generator:
    if index is None:
        return np.random.default_rng(seed)
    return np.random.default_rng([seed, index])


def _draws(rng, T):
    u = rng.random(T)
    z = rng.standard_normal(T)
    return u, z


def continuations(process: MarkovMultiplicative, n_start: int, logA_start: float, T: int,
                  seed: int, indices: Sequence[int]):
    """States and log relative productivities of continuation paths ``indices``."""
    k = len(indices)
    u = np.empty((k, T))
    z = np.empty((k, T))
    for row, i in enumerate(indices):
        u[row], z[row] = _draws(path_rng(seed, int(i)), T)
    return process.evolve(u, z, n_start, logA_start)


def tilted_continuations(process: MarkovMultiplicative, n_start: int, logA_start: float, seed: int,
                         indices: Sequence[int], Pi_steps: np.ndarray, mu_steps: np.ndarray):
    """Continuation paths under a time-varying change of measure.

    Step j moves with transition matrix ``Pi_steps[j]`` and log-growth means
    ``mu_steps[j]`` (scales unchanged). Draws come from the same per-path
    streams as ``continuations``. Returns (states, logA, log_lr) where log_lr
    is the log likelihood ratio of the original law against the sampling law.
    """
    T = Pi_steps.shape[0]
    k = len(indices)
    u = np.empty((k, T))
    z = np.empty((k, T))
    for row, i in enumerate(indices):
        u[row], z[row] = _draws(path_rng(seed, int(i)), T)
    N = process.N
    states = np.empty((k, T + 1), dtype=np.int64)
    logA = np.empty((k, T + 1))
    states[:, 0] = n_start
    logA[:, 0] = logA_start
    log_lr = np.zeros(k)
    log_Pi = np.log(np.where(process.Pi > 0, process.Pi, 1.0))
    mu0, s = process._mu, process._s
    cum = np.cumsum(Pi_steps, axis=2)
    with np.errstate(divide="ignore"):
        log_tilted = np.log(Pi_steps)
    for j in range(T):
        prev = states[:, j]
        nxt = (u[:, j, None] >= cum[j][prev]).sum(axis=1)
        np.minimum(nxt, N - 1, out=nxt)
        states[:, j + 1] = nxt
        sd = s[prev, nxt]
        shift = mu_steps[j][prev, nxt] - mu0[prev, nxt]
        logA[:, j + 1] = logA[:, j] + mu_steps[j][prev, nxt] + sd * z[:, j]
        log_lr += log_Pi[prev, nxt] - log_tilted[j][prev, nxt]
        # normal density ratio at x = mu + shift + sd z
        safe = np.where(sd > 0, sd, 1.0)
        log_lr += np.where(sd > 0, -shift * z[:, j] / safe - 0.5 * (shift / safe) ** 2, 0.0)
    return states, logA, log_lr


def sample_path(process, T: int, seed: int = 0) -> ProductivityPath:
    """One productivity path over periods 0..T, deterministic in (process, T, seed)."""
    if T < 0:
        raise DomainError(f"horizon must be nonnegative, got {T}")
    if isinstance(process, DeterministicExponential):
        lh, lx = process.log_levels(np.arange(T + 1))
        return ProductivityPath(lh, lx)
    u, z = _draws(path_rng(seed), T)
    states, logA = process.evolve(u[None, :], z[None, :], process.n0, math.log(process.A0))
    st = states[0]
    inc = process._mu[st[:-1], st[1:]] + process._s[st[:-1], st[1:]] * z
    return ProductivityPath(logA[0], np.zeros(T + 1), st, inc)


# --------------------------------------------------------------------------- #
# spectral-radius criterion
# --------------------------------------------------------------------------- #


def K_matrix(process: MarkovMultiplicative, sigma: float) -> np.ndarray:
    """K[n, n'] = Pi[n, n'] * E[G_{nn'}^(1/sigma - 1)]."""
    if not sigma > 1:
        raise DomainError(f"criterion requires sigma > 1, got {sigma}")
    p = 1.0 / sigma - 1.0
    moments = np.array([[g.moment(p) for g in row] for row in process.growth])
    return process.Pi * moments


def _radius_closed_form(K):
    if K.shape[0] == 1:
        return abs(K[0, 0])
    tr = K[0, 0] + K[1, 1]
    det = K[0, 0] * K[1, 1] - K[0, 1] * K[1, 0]
    disc = tr * tr - 4.0 * det
    if disc >= 0:
        r = math.sqrt(disc)
        return max(abs((tr + r) / 2), abs((tr - r) / 2))
    return math.sqrt(det)


def spectral_radius(K, tol: float = 1e-12, max_iter: int = 100_000) -> float:
    """Perron root of a nonnegative matrix by power iteration on K + I.

    The unit shift makes the Perron root strictly dominant in modulus even for
    periodic matrices; convergence is declared when successive Rayleigh
    quotients differ by less than ``tol``.
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise DomainError(f"spectral radius needs a square matrix, got shape {K.shape}")
    if not np.all(np.isfinite(K)):
        raise DomainError("matrix entries must be finite")
    N = K.shape[0]
    M = K + np.eye(N)
    x = np.full(N, 1.0 / math.sqrt(N))
    lam = float(x @ M @ x)
    for _ in range(max_iter):
        y = M @ x
        x = y / np.linalg.norm(y)
        new = float(x @ M @ x)
        if abs(new - lam) < tol:
            lam = new
            break
        lam = new
    else:
        raise NumericError(f"power iteration did not converge in {max_iter} iterations", last_iterate=lam - 1.0)
    radius = max(lam - 1.0, 0.0)
    if N <= 2:
        exact = _radius_closed_form(K)
        if abs(exact - radius) > 1e-8 * max(1.0, exact):
            raise NumericError(f"power iteration {radius} disagrees with closed form {exact}", last_iterate=radius)
    return radius


class SSolution(NamedTuple):
    s: Optional[np.ndarray]
    diverges: bool
    radius: float
    ill_conditioned: bool


def solve_s(K) -> SSolution:
    """Solve s = 1 + K s when the spectral radius of K is below one."""
    K = np.asarray(K, dtype=float)
    radius = spectral_radius(K)
    if radius >= 1.0:
        return SSolution(None, True, radius, False)
    ill = 1.0 - radius < 1e-10
    if ill:
        warnings.warn(f"I - K is nearly singular (spectral radius {radius!r})", RuntimeWarning, stacklevel=2)
    # LAPACK gesv: LU with partial pivoting
    s = np.linalg.solve(np.eye(K.shape[0]) - K, np.ones(K.shape[0]))
    return SSolution(s, False, radius, ill)


class ConditionEstimate(NamedTuple):
    mean: float
    se: float
    exact: Optional[float]
    n_paths: int
    T: int


def exact_condition_sum(process, sigma: float, T: int) -> float:
    """Sum over t = 1..T of E_0[A_t^(1/sigma - 1)] with A_t = A_Ht / A_Xt."""
    p = 1.0 / sigma - 1.0
    if isinstance(process, DeterministicExponential):
        lr0 = math.log(process.A_H0) - math.log(process.A_X0)
        g = process.log_growth_ratio
        return math.fsum(math.exp(p * (lr0 + t * g)) for t in range(1, T + 1))
    K = K_matrix(process, sigma)
    v = np.ones(process.N)
    total = 0.0
    for _ in range(T):
        v = K @ v
        total += v[process.n0]
    return total * process.A0 ** p


def mc_condition_estimate(process, sigma: float, n_paths: int, T: int, seed: int = 0,
                          chunk: int = 1000) -> ConditionEstimate:
    """Monte Carlo estimate of E_0 sum_{t=1..T} (A_Ht/A_Xt)^(1/sigma - 1)."""
    if not sigma > 1:
        raise DomainError(f"criterion requires sigma > 1, got {sigma}")
    if n_paths < 2:
        raise DomainError("n_paths must be at least 2 for a standard error")
    p = 1.0 / sigma - 1.0
    exact = exact_condition_sum(process, sigma, T)
    if isinstance(process, DeterministicExponential):
        return ConditionEstimate(exact, 0.0, exact, n_paths, T)
    sums = []
    for start in range(0, n_paths, chunk):
        idx = range(start, min(start + chunk, n_paths))
        _, logA = continuations(process, process.n0, math.log(process.A0), T, seed, idx)
        sums.append(np.exp(p * logA[:, 1:]).sum(axis=1))
    sums = np.concatenate(sums)
    mean = math.fsum(sums) / n_paths
    se = float(np.std(sums, ddof=1)) / math.sqrt(n_paths)
    return ConditionEstimate(mean, se, exact, n_paths, T)


class Criterion(NamedTuple):
    K: np.ndarray
    radius: float
    s: Optional[np.ndarray]
    condition_sum: float
    verdict: str


def as_markov(process: DeterministicExponential) -> MarkovMultiplicative:
    """Single-state chain with the same relative productivity path."""
    g = math.exp(process.log_growth_ratio)
    return MarkovMultiplicative(np.ones((1, 1)), ((PointMass(g),),), 0, process.A_H0 / process.A_X0)


def overvaluation_criterion(process, sigma: float) -> Criterion:
    """Spectral-radius test and sum_{t>=0} E_0[A_t^(1/sigma - 1)].

    A radius below one makes the sum finite, which is sufficient for a
    strictly positive bubble. Otherwise the verdict is "fundamental".
    """
    if isinstance(process, DeterministicExponential):
        process = as_markov(process)
    K = K_matrix(process, sigma)
    sol = solve_s(K)
    if sol.diverges:
        return Criterion(K, sol.radius, None, math.inf, "fundamental")
    total = process.A0 ** (1.0 / sigma - 1.0) * float(sol.s[process.n0])
    return Criterion(K, sol.radius, sol.s, total, "overvalued")
