"""Fundamental value, bubble component and truncation certificates.

Truncating the present value of rents after T periods leaves a tail. Along any
path, log utility gives the exact identity

    P_t = V_t^(T) + m_{t->t+T} P_{t+T},

so the gap G = P_t - V_t^(T) (which is the bubble B_t once T is large) is
computed directly as a discounted price. That avoids cancellation when the
bubble is a tiny fraction of the price. The omitted tail has two upper bounds:

``price``  E_t[m_{t->t+T} P_{t+T}], valid because V <= P in every period.
``lemma``  E_t[m_{t->t+T} w_{t+T} M A^-rho sum_{k>=1} A_{t+T+k}^(rho-1)]. It
           combines m <= w_t/w_{t+s} with the bound on relative factor prices
           (F_X/F_H)(A_H, A_X) <= M A^-rho (A_H/A_X)^rho for A_H/A_X >= A,
           M = (F_X/F_H)(A, 1). It decays with T whenever the relative
           productivity grows and sigma > 1.

Land is certified overvalued when G exceeds the lemma tail by more than the
Monte Carlo band. Only the lemma bound can do that. The price bound is what
certifies zero-bubble (Cobb-Douglas) economies.

Three routes are provided: exact summation for deterministic growth, Monte
Carlo over continuation paths for Markov growth (importance sampled by
default, since the gap can be a rare-path expectation many orders of magnitude
below P), and exact forward induction on the recombining lattice of Markov
growth with two point-mass growth values.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .equilibrium import EquilibriumPath, check_beta, log_sdf
from .errors import DomainError, NoCertificateError
from .production import ProductionModel, rho_of
from .stochastic_process import (
    DeterministicExponential,
    K_matrix,
    MarkovMultiplicative,
    PointMass,
    ProductivityPath,
    continuations,
    solve_s,
    tilted_continuations,
)

METHODS = ("mc", "lattice", "auto")
SAMPLERS = ("tilted", "plain")


@dataclass(frozen=True)
class ValuationConfig:
    horizon: int = 200
    n_paths: int = 10_000
    seed: int = 0
    tail_tolerance: float = 1e-6
    mrt_threshold: Optional[float] = None
    sigma_bound: Optional[float] = None
    band: float = 3.0
    method: str = "mc"
    max_terms: int = 1_000_000
    mc_max_horizon: int = 20_000
    chunk: int = 500
    workers: int = 1
    sampler: str = "tilted"
    tilt_iterations: int = 60

    def __post_init__(self):
        if self.horizon < 1:
            raise DomainError(f"horizon must be >= 1, got {self.horizon}")
        if self.n_paths < 1:
            raise DomainError(f"n_paths must be >= 1, got {self.n_paths}")
        if not self.tail_tolerance > 0:
            raise DomainError(f"tail_tolerance must be positive, got {self.tail_tolerance}")
        if self.mrt_threshold is not None and not self.mrt_threshold > 0:
            raise DomainError(f"mrt_threshold must be positive, got {self.mrt_threshold}")
        if self.sigma_bound is not None and not self.sigma_bound > 0:
            raise DomainError(f"sigma_bound must be positive, got {self.sigma_bound}")
        if self.band < 0:
            raise DomainError(f"band must be nonnegative, got {self.band}")
        if self.method not in METHODS:
            raise DomainError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.chunk < 1 or self.workers < 1:
            raise DomainError("chunk and workers must be >= 1")
        if self.sampler not in SAMPLERS:
            raise DomainError(f"sampler must be one of {SAMPLERS}, got {self.sampler!r}")
        if self.tilt_iterations < 1:
            raise DomainError(f"tilt_iterations must be >= 1, got {self.tilt_iterations}")


@dataclass(frozen=True)
class ValuationResult:
    """Truncated valuation at period ``t``.

    ``V`` is the discounted sum of rents over ``horizon`` periods. ``gap`` is
    P - V computed without cancellation. ``se`` is the Monte Carlo standard
    error of both (zero for exact methods). ``tail_bound`` bounds the omitted
    rents beyond the horizon.
    """

    t: int
    P: float
    r: float
    V: float
    gap: float
    se: float
    tail_bound: float
    horizon: int
    certificate: Optional[str]
    certified: bool
    upper_estimate: float
    lemma_tail: float
    price_tail: float
    n_paths: int = 1
    method: str = "exact"
    band: float = 3.0
    ess: Optional[float] = None

    @property
    def B(self):
        return self.gap

    @property
    def price_rent(self):
        return self.P / self.r

    @property
    def V_over_P(self):
        return 1.0 - self.gap / self.P

    @property
    def verdict(self):
        return bubble_decompose(self.P, self.V, self.se, self.tail_bound, self.band, gap=self.gap).verdict


class BubbleVerdict(NamedTuple):
    B: float
    verdict: str


def bubble_decompose(P: float, V: float, se: float, tail_bound: float, band: float = 3.0,
                     gap: Optional[float] = None) -> BubbleVerdict:
    """Classify P = V + B from an estimate, its standard error and tail bound.

    ``gap`` optionally supplies P - V computed without cancellation.
    """
    if V < 0:
        raise DomainError(f"fundamental value must be nonnegative, got {V}")
    B = P - V if gap is None else gap
    slack = band * se + tail_bound
    if B > slack:
        verdict = "overvalued"
    elif abs(B) <= slack:
        verdict = "fundamental"
    else:
        verdict = "inconclusive"
    return BubbleVerdict(B, verdict)


def present_value_of_rents(log_P, log_r):
    """Truncated value at index 0 of price/rent sequences (last axis).

    Returns (V, price_tail, upper, log_pi_T) with V = sum_{s>=1} m_{0->s} r_s,
    price_tail = m_{0->T} P_T, and upper = w_0 sum_s r_s / w_s.
    """
    log_P = np.asarray(log_P, dtype=float)
    log_r = np.asarray(log_r, dtype=float)
    log_pi = np.cumsum(log_sdf(log_P, log_r), axis=-1)
    V = np.exp(log_pi + log_r[..., 1:]).sum(axis=-1)
    price_tail = np.exp(log_pi[..., -1] + log_P[..., -1])
    upper = np.exp(log_r[..., 1:] - log_P[..., 1:] + log_P[..., :1]).sum(axis=-1)
    return V, price_tail, upper, log_pi[..., -1]


# --------------------------------------------------------------------------- #
# lemma constants
# --------------------------------------------------------------------------- #


class _Lemma(NamedTuple):
    A: float
    sigma: float
    rho: float
    log_MA: float  # log(M A^-rho)


def _lemma_setup(model, config, logA_min) -> Optional[_Lemma]:
    """Threshold A and elasticity bound, or None when the bound does not apply.

    ``logA_min`` is the smallest log relative productivity the tail visits
    (None when unbounded below). Constant-elasticity models need no threshold.
    """
    if config.mrt_threshold is not None:
        A = config.mrt_threshold
        if not model.constant_elasticity and (logA_min is None or logA_min < math.log(A)):
            return None
    elif model.constant_elasticity:
        A = 1.0
    elif logA_min is None:
        return None
    else:
        A = math.exp(logA_min)
    sigma = config.sigma_bound if config.sigma_bound is not None else model.sigma_lower_bound(A)
    rho = rho_of(sigma)
    lfh, lfx = model.log_marginals(math.log(A), 0.0)
    return _Lemma(A, sigma, rho, float(lfx - lfh) - rho * math.log(A))


def _log_rent_wage(model, logA):
    """log(r/w) at relative productivity A (land productivity normalised to 1)."""
    lfh, lfx = model.log_marginals(logA, np.zeros_like(logA))
    return lfx - lfh - logA


# --------------------------------------------------------------------------- #
# deterministic growth
# --------------------------------------------------------------------------- #


def _deterministic_at(model, process, beta, t, T, config):
    lah, lax = process.log_levels(np.arange(t, t + T + 1))
    lfh, lfx = model.log_marginals(lah, lax)
    log_w = lfh + lah
    log_r = lfx + lax
    log_P = math.log(beta) + log_w
    log_pi = np.cumsum(log_sdf(log_P, log_r))
    P = math.exp(float(log_P[0]))
    V = math.fsum(np.exp(log_pi + log_r[1:]))
    log_gap = float(log_pi[-1] + log_P[-1])
    gap = math.exp(log_gap)
    upper = math.fsum(np.exp(log_r[1:] - log_w[1:] + log_w[0]))

    g = process.log_growth_ratio
    logA_T = float(lah[-1] - lax[-1])
    lemma = _lemma_setup(model, config, logA_T + g if g >= 0 else None)
    log_lemma = None
    if lemma is not None:
        log_q = (lemma.rho - 1.0) * g
        if log_q < 0:
            # sum_{k>=1} A_{t+T+k}^(rho-1) = A_{t+T}^(rho-1) q / (1 - q)
            log_lemma = (float(log_pi[-1] + log_w[-1]) + lemma.log_MA + (lemma.rho - 1.0) * logA_T
                         + log_q - math.log(-math.expm1(log_q)))
    lemma_tail = math.inf if log_lemma is None else math.exp(log_lemma)
    tail, kind = (lemma_tail, "lemma") if lemma_tail < gap else (gap, "price")
    res = ValuationResult(
        t=t, P=P, r=math.exp(float(log_r[0])), V=V, gap=gap, se=0.0, tail_bound=tail, horizon=T,
        certificate=kind, certified=tail <= config.tail_tolerance * P, upper_estimate=upper,
        lemma_tail=lemma_tail, price_tail=gap, n_paths=1, method="exact", band=config.band)
    return res, log_lemma, log_gap


def fundamental_value_deterministic(model: ProductionModel, process: DeterministicExponential, beta: float,
                                    t: int, config: ValuationConfig = ValuationConfig()) -> ValuationResult:
    """V_t by exact summation.

    T starts at ``config.horizon`` and grows until the tail bound is below
    ``tail_tolerance * P_t``. Where the lemma bound applies, T keeps growing
    until that bound also falls below the gap, so a positive bubble is
    certified. Raises NoCertificateError if the tolerance is still unmet at
    ``max_terms``.
    """
    check_beta(beta)
    if t < 0:
        raise DomainError(f"valuation period must be nonnegative, got {t}")
    T = config.horizon
    while True:
        res, log_lemma, log_gap = _deterministic_at(model, process, beta, t, T, config)
        need_tol = res.tail_bound > config.tail_tolerance * res.P
        need_sign = log_lemma is not None and log_lemma >= log_gap
        if not (need_tol or need_sign):
            return res
        if T >= config.max_terms:
            if need_tol:
                raise NoCertificateError(
                    f"tail bound {res.tail_bound!r} exceeds {config.tail_tolerance * res.P!r} after {T} terms",
                    partial=res.V, tail_bound=res.tail_bound, horizon=T)
            return res
        step = T
        if log_lemma is not None:
            # the lemma-to-gap ratio falls by at least a factor q per period
            _, log_lemma1, log_gap1 = _deterministic_at(model, process, beta, t, T + 1, config)
            if log_lemma1 is not None:
                rate = (log_lemma - log_gap) - (log_lemma1 - log_gap1)
                targets = [log_lemma - log_gap] if need_sign else []
                if need_tol:
                    targets.append(log_lemma - math.log(config.tail_tolerance * res.P))
                if rate > 0:
                    step = max(1, math.ceil(max(targets) / rate) + 1)
        T = min(config.max_terms, T + step)


# --------------------------------------------------------------------------- #
# Monte Carlo for Markov growth
# --------------------------------------------------------------------------- #


class _MarkovLemma(NamedTuple):
    lemma: _Lemma
    K: np.ndarray
    s: np.ndarray


def _markov_lemma(model, process, config) -> Optional[_MarkovLemma]:
    lemma = _lemma_setup(model, config, None)
    if lemma is None or not lemma.sigma > 1:
        return None
    K = K_matrix(process, lemma.sigma)
    sol = solve_s(K)
    if sol.diverges:
        return None
    return _MarkovLemma(lemma, K, sol.s)


def _unconditional_lemma(ml: _MarkovLemma, n_t, logA_t, log_w, T):
    """w_t M A^-rho A_t^(rho-1) (K^(T+1) s)[n_t], exact in expectation."""
    v = np.linalg.matrix_power(ml.K, T + 1) @ ml.s
    return math.exp(log_w + ml.lemma.log_MA + (ml.lemma.rho - 1.0) * logA_t) * float(v[n_t])


class Tilt(NamedTuple):
    """Per-step sampling law: transition matrices and log-growth means."""

    Pi: np.ndarray  # (T, N, N)
    mu: np.ndarray  # (T, N, N)
    theta: np.ndarray  # (T,) exponent applied to each step's log growth


def exponential_tilt(model: ProductionModel, process: MarkovMultiplicative, beta: float, n_t: int,
                     logA_t: float, T: int, iterations: int = 60) -> Tilt:
    """Change of measure that favours paths carrying most of E[discounted P_{t+T}].

    The discounted terminal price is P_t exp(-sum_s f(a_s)) with
    f(a) = log(1 + (r/w)(a)/beta) and a_s the log relative productivity.
    Linearising the exponent around a reference path turns it into
    exp(sum_j theta_j g_j) in the step log-growths g_j, with
    theta_j = -sum_{s>j} f'(a_s). The chain is tilted by that exponential
    (a backward h-transform), and the reference path is moved to the tilted
    mean until it settles. Any tilt gives an unbiased estimator. This one
    keeps the likelihood ratio close to the integrand.
    """
    Pi, s = process.Pi, process._s
    mu = process._mu
    N = process.N
    log_beta = math.log(beta)
    h = 1e-5

    def f(a):
        return np.logaddexp(0.0, _log_rent_wage(model, a) - log_beta)

    a = np.full(T + 1, logA_t)
    Pt = np.empty((T, N, N))
    mut = np.empty((T, N, N))
    for _ in range(iterations):
        fp = (f(a + h) - f(a - h)) / (2 * h)
        theta = -np.cumsum(fp[:0:-1])[::-1]  # theta[j] = -sum_{s=j+1..T} f'(a_s)
        logv = np.zeros(N)
        for j in range(T - 1, -1, -1):
            lw = np.log(np.where(Pi > 0, Pi, 1.0)) + theta[j] * mu + 0.5 * (theta[j] * s) ** 2 + logv[None, :]
            lw = np.where(Pi > 0, lw, -np.inf)
            top = lw.max(axis=1, keepdims=True)
            w = np.exp(lw - top)
            row = w.sum(axis=1)
            Pt[j] = w / row[:, None]
            logv = np.log(row) + top[:, 0]
            logv -= logv.max()
            mut[j] = mu + theta[j] * s ** 2
        p = np.zeros(N)
        p[n_t] = 1.0
        drift = np.empty(T)
        for j in range(T):
            drift[j] = float(np.einsum("i,ij,ij->", p, Pt[j], mut[j]))
            p = p @ Pt[j]
        new = logA_t + np.concatenate(([0.0], np.cumsum(drift)))
        moved = float(np.max(np.abs(new - a)))
        a = 0.5 * (a + new)
        if moved < 1e-8:
            break
    return Tilt(Pt, mut, theta)


def _mc_chunk(args):
    model, process, beta, n_t, logA_t, T, seed, lo, hi, ml, tilt = args
    if tilt is None:
        states, logA = continuations(process, n_t, logA_t, T, seed, range(lo, hi))
        lr = np.ones(hi - lo)
    else:
        states, logA, log_lr = tilted_continuations(process, n_t, logA_t, seed, range(lo, hi), tilt.Pi, tilt.mu)
        lr = np.exp(log_lr)
    lfh, lfx = model.log_marginals(logA, np.zeros_like(logA))
    log_w = lfh + logA
    log_P = math.log(beta) + log_w
    V, pt, up, log_pi_T = present_value_of_rents(log_P, lfx)
    if ml is None:
        lt = np.full_like(V, np.inf)
    else:
        rho = ml.lemma.rho
        lt = np.exp(log_pi_T + log_w[:, -1] + ml.lemma.log_MA + (rho - 1.0) * logA[:, -1]
                    + np.log(ml.s[states[:, -1]] - 1.0))
    return V * lr, pt * lr, up * lr, lt * lr, lr


def _simulate_values(model, process, beta, n_t, logA_t, T, config, ml, tilt=None):
    n = config.n_paths
    jobs = [(model, process, beta, n_t, logA_t, T, config.seed, lo, min(lo + config.chunk, n), ml, tilt)
            for lo in range(0, n, config.chunk)]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as ex:
            parts = list(ex.map(_mc_chunk, jobs))
    else:
        parts = [_mc_chunk(j) for j in jobs]
    return tuple(np.concatenate([p[k] for p in parts]) for k in range(5))


def _mean_se(x):
    n = len(x)
    mean = math.fsum(x) / n
    if n < 2 or not math.isfinite(mean):
        return mean, 0.0
    var = math.fsum((x - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


def _start_state(base_path, t):
    if not 0 <= t <= base_path.T:
        raise DomainError(f"period {t} outside base path 0..{base_path.T}")
    return int(base_path.state[t]), float(base_path.log_AH[t] - base_path.log_AX[t])


def fundamental_value_mc(model: ProductionModel, process: MarkovMultiplicative, beta: float,
                         base_path: ProductivityPath, t: int,
                         config: ValuationConfig = ValuationConfig()) -> ValuationResult:
    """Monte Carlo V_t from ``n_paths`` continuations of the state at t.

    With ``sampler="tilted"`` paths are drawn under ``exponential_tilt`` and
    reweighted by their likelihood ratios; the truncated value is then
    reported as P_t minus the estimated gap, which is unbiased because the two
    add up to P_t on every path. ``sampler="plain"`` averages raw paths. The
    horizon doubles until the tail bound meets ``tail_tolerance * P_t``
    and, where the lemma applies, the lemma bound is below the estimated gap,
    capped at ``mc_max_horizon``. The estimate is returned either way, with
    ``certified`` reporting whether the tolerance was met.
    """
    check_beta(beta)
    n_t, logA_t = _start_state(base_path, t)
    lfh, lfx = model.log_marginals(logA_t, 0.0)
    log_w = float(lfh) + logA_t
    P = beta * math.exp(log_w)
    r = math.exp(float(lfx))
    target = config.tail_tolerance * P
    ml = _markov_lemma(model, process, config)

    T = config.horizon
    while True:
        tilt = None
        if config.sampler == "tilted":
            tilt = exponential_tilt(model, process, beta, n_t, logA_t, T, config.tilt_iterations)
        V_i, pt_i, up_i, lt_i, lr = _simulate_values(model, process, beta, n_t, logA_t, T, config, ml, tilt)
        gap, gap_se = _mean_se(pt_i)
        V = _mean_se(V_i)[0] if tilt is None else P - gap
        upper, _ = _mean_se(up_i)
        price_bound = gap + config.band * gap_se
        lemma_tail = math.inf
        if ml is not None:
            lt, lt_se = _mean_se(lt_i)
            lemma_tail = min(lt + config.band * lt_se, _unconditional_lemma(ml, n_t, logA_t, log_w, T))
        tail, kind = (lemma_tail, "lemma") if lemma_tail < price_bound else (price_bound, "price")
        certified = tail <= target
        need_sign = ml is not None and lemma_tail >= gap
        if (certified and not need_sign) or T >= config.mc_max_horizon:
            break
        T = min(config.mc_max_horizon, 2 * T)
    return ValuationResult(
        t=t, P=P, r=r, V=V, gap=gap, se=gap_se, tail_bound=tail, horizon=T, certificate=kind,
        certified=certified, upper_estimate=upper, lemma_tail=lemma_tail, price_tail=gap,
        n_paths=config.n_paths, method="mc", band=config.band, ess=_ess(pt_i))


def _ess(x):
    """Effective sample size of the weighted gap terms, (sum x)^2 / sum x^2.

    Raw likelihood ratios can be very uneven while their product with the
    discounted price is nearly flat, so the integrand is what matters.
    """
    total = math.fsum(x)
    sq = math.fsum(x * x)
    return total * total / sq if sq > 0 else float(len(x))


# --------------------------------------------------------------------------- #
# exact forward induction on the growth lattice
# --------------------------------------------------------------------------- #


def _lattice_steps(process: MarkovMultiplicative):
    """Two log-growth values and the 0/1 'high step' indicator per transition."""
    if not all(isinstance(g, PointMass) for row in process.growth for g in row):
        raise DomainError("lattice valuation needs point-mass growth factors")
    logs = sorted({g.log_location for row in process.growth for g in row})
    if len(logs) > 2:
        raise DomainError("lattice valuation supports at most two distinct growth factors")
    lo, hi = logs[0], logs[-1]
    up = np.array([[1 if (len(logs) == 2 and g.log_location == hi) else 0 for g in row]
                   for row in process.growth])
    return lo, hi, up


def lattice_supported(process) -> bool:
    try:
        _lattice_steps(process)
    except DomainError:
        return False
    return True


def fundamental_value_lattice(model: ProductionModel, process: MarkovMultiplicative, beta: float,
                              base_path: ProductivityPath, t: int,
                              config: ValuationConfig = ValuationConfig()) -> ValuationResult:
    """Exact E_t of the truncated value, gap and tail bounds.

    The method exploits that with two growth values the relative productivity
    after s steps depends only on how many were high steps. The joint law of
    (state, count) is propagated forward in log space. Each node is weighted
    by the product of one-period discount ratios P_s / (P_s + r_s).
    """
    check_beta(beta)
    n_t, logA_t = _start_state(base_path, t)
    lo, hi, up = _lattice_steps(process)
    N = process.N
    log_Pi = np.log(np.where(process.Pi > 0, process.Pi, 1.0))
    live = process.Pi > 0
    lfh, lfx = model.log_marginals(logA_t, 0.0)
    log_w0 = float(lfh) + logA_t
    P = beta * math.exp(log_w0)
    r = math.exp(float(lfx))
    target = config.tail_tolerance * P
    ml = _markov_lemma(model, process, config)
    log_beta = math.log(beta)

    # log weights of nodes (state n, high-step count i) after s steps
    logW = np.full((N, 1), -np.inf)
    logQ = np.full((N, 1), -np.inf)
    logW[n_t, 0] = 0.0
    logQ[n_t, 0] = 0.0
    V_terms, up_terms = [], []
    s = 0
    while True:
        s += 1
        newW = np.full((N, s + 1), -np.inf)
        newQ = np.full((N, s + 1), -np.inf)
        i = np.arange(s + 1)
        logA = logA_t + i * hi + (s - i) * lo
        lcw = _log_rent_wage(model, logA)
        log_d = -np.logaddexp(0.0, lcw - log_beta)
        for n in range(N):
            for n2 in range(N):
                if not live[n, n2]:
                    continue
                k = up[n, n2]
                src_w = logW[n] + log_Pi[n, n2]
                src_q = logQ[n] + log_Pi[n, n2]
                newW[n2, k:k + s] = np.logaddexp(newW[n2, k:k + s], src_w)
                newQ[n2, k:k + s] = np.logaddexp(newQ[n2, k:k + s], src_q)
        logW = newW + log_d
        logQ = newQ
        # pi_s r_s / P_t = prod d * c / beta
        V_terms.append(np.exp(logW + lcw - log_beta).sum())
        up_terms.append(np.exp(logQ + lcw - log_beta).sum())
        if s < config.horizon:
            continue
        log_gap = float(np.logaddexp.reduce(logW.ravel()))
        gap = P * math.exp(log_gap)
        lemma_tail = math.inf
        if ml is not None:
            rho = ml.lemma.rho
            node = logW + (rho - 1.0) * logA + np.log(ml.s - 1.0)[:, None]
            lemma_tail = P / beta * math.exp(float(np.logaddexp.reduce(node.ravel())) + ml.lemma.log_MA)
        tail, kind = (lemma_tail, "lemma") if lemma_tail < gap else (gap, "price")
        certified = tail <= target
        need_sign = ml is not None and lemma_tail >= gap
        if (certified and not need_sign) or s >= config.mc_max_horizon:
            break
    V = P * math.fsum(V_terms)
    upper = P * math.fsum(up_terms)
    return ValuationResult(
        t=t, P=P, r=r, V=V, gap=gap, se=0.0, tail_bound=tail, horizon=s, certificate=kind,
        certified=certified, upper_estimate=upper, lemma_tail=lemma_tail, price_tail=gap,
        n_paths=0, method="lattice", band=config.band)


def fundamental_value(model, process, beta, t, config=ValuationConfig(), base_path=None):
    """Dispatch on the process family and ``config.method``."""
    if isinstance(process, DeterministicExponential):
        return fundamental_value_deterministic(model, process, beta, t, config)
    if base_path is None:
        raise DomainError("Markov valuation needs a base path")
    method = config.method
    if method == "auto":
        method = "lattice" if lattice_supported(process) else "mc"
    if method == "lattice":
        return fundamental_value_lattice(model, process, beta, base_path, t, config)
    return fundamental_value_mc(model, process, beta, base_path, t, config)


# --------------------------------------------------------------------------- #
# ratio diagnostics
# --------------------------------------------------------------------------- #


class VPSeries(NamedTuple):
    t: np.ndarray
    V_over_P: np.ndarray
    price_rent: np.ndarray
    log_price_rent_slope: float


def log_price_rent_slope(eq: EquilibriumPath) -> float:
    """Least-squares slope of log(P_t / r_t) on t."""
    t = np.arange(eq.T + 1, dtype=float)
    return float(np.polyfit(t, eq.log_price_rent, 1)[0])


def vp_ratio_series(eq: EquilibriumPath, valuations: Sequence[ValuationResult]) -> VPSeries:
    ts = np.array([v.t for v in valuations], dtype=int)
    vp = np.array([v.V_over_P for v in valuations])
    pr = np.exp(eq.log_price_rent[ts])
    return VPSeries(ts, vp, pr, log_price_rent_slope(eq))


def valuation_series(model, process, beta, ts, config=ValuationConfig(), base_path=None):
    return [fundamental_value(model, process, beta, int(t), config, base_path) for t in ts]
