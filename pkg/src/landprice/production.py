"""Neoclassical two-factor technologies F(H, X) and their differential calculus.

Every technology is homogeneous of degree one and is evaluated in log space:
``log_value`` and ``log_marginals`` take log inputs (scalars or numpy arrays)
so that productivity levels far beyond the double range (1.1**8000, say) can
be pushed through without overflow.  The plain ``value``/``marginals`` helpers
wrap them for everyday use.

Models
------
  CES                 (alpha H^(1-rho) + (1-alpha) X^(1-rho))^(1/(1-rho)), sigma = 1/rho
  CobbDouglas         H^alpha X^(1-alpha)
  TwoSectorAggregate  optimal split of H between A1 H^a X^(1-a) and A2 H
  UrbanNested         H^alpha E(H, X)^(1-alpha) with E a CES aggregate
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConsistencyError, DomainError, KinkError

SIGMA_ONE_TOL = 1e-9
KINK_TOL = 1e-12


class InfiniteElasticity(float):
    """Tagged +infinity so that ``1 / sigma`` is exactly zero downstream."""

    def __new__(cls):
        return super().__new__(cls, math.inf)

    def __repr__(self):
        return "SIGMA_INF"


SIGMA_INF = InfiniteElasticity()


def rho_of(sigma: float) -> float:
    """Inverse elasticity, exact zero for an infinite elasticity."""
    if math.isinf(sigma):
        return 0.0
    return 1.0 / sigma


@dataclass(frozen=True)
class FactorPoint:
    H: float
    X: float

    def __post_init__(self):
        if not (self.H > 0 and self.X > 0) or not (math.isfinite(self.H) and math.isfinite(self.X)):
            raise DomainError(f"factor inputs must be finite and positive, got H={self.H}, X={self.X}")


def _check_unit(name, value):
    if not (0.0 < value < 1.0):
        raise DomainError(f"{name} must lie in (0, 1), got {value}")


def _check_pos(name, value):
    if not (value > 0.0) or not math.isfinite(value):
        raise DomainError(f"{name} must be finite and positive, got {value}")


class ProductionModel:
    """Interface shared by the technologies.

    Subclasses implement ``log_value``, ``log_marginals`` and ``cross``.
    """

    #: True when the elasticity of substitution is the same at every point.
    constant_elasticity = False

    def log_value(self, lh, lx):
        raise NotImplementedError

    def log_marginals(self, lh, lx):
        raise NotImplementedError

    def cross(self, H, X):
        """Analytic F_HX at a positive point."""
        raise NotImplementedError

    def sigma_lower_bound(self, A: float) -> float:
        """inf over h >= A of sigma_F(h, 1)."""
        raise NotImplementedError

    def value(self, H, X):
        return np.exp(self.log_value(np.log(H), np.log(X)))

    def marginals(self, H, X):
        lfh, lfx = self.log_marginals(np.log(H), np.log(X))
        return np.exp(lfh), np.exp(lfx)


@dataclass(frozen=True)
class CobbDouglas(ProductionModel):
    alpha: float

    constant_elasticity = True

    def __post_init__(self):
        _check_unit("alpha", self.alpha)

    @property
    def sigma(self):
        return 1.0

    def log_value(self, lh, lx):
        return self.alpha * lh + (1.0 - self.alpha) * lx

    def log_marginals(self, lh, lx):
        a = self.alpha
        d = lh - lx
        return math.log(a) - (1.0 - a) * d, math.log(1.0 - a) + a * d

    def cross(self, H, X):
        a = self.alpha
        return a * (1.0 - a) * self.value(H, X) / (H * X)

    def sigma_lower_bound(self, A):
        return 1.0


@dataclass(frozen=True)
class CES(ProductionModel):
    """CES technology; ``sigma`` within 1e-9 of one is treated as Cobb-Douglas."""

    alpha: float
    sigma: float

    constant_elasticity = True

    def __post_init__(self):
        _check_unit("alpha", self.alpha)
        _check_pos("sigma", self.sigma)

    @property
    def rho(self):
        return 1.0 / self.sigma

    @property
    def is_cobb_douglas(self):
        return abs(self.sigma - 1.0) < SIGMA_ONE_TOL

    def log_value(self, lh, lx):
        a = self.alpha
        if self.is_cobb_douglas:
            return a * lh + (1.0 - a) * lx
        k = 1.0 - self.rho
        return np.logaddexp(math.log(a) + k * lh, math.log(1.0 - a) + k * lx) / k

    def log_marginals(self, lh, lx):
        a = self.alpha
        if self.is_cobb_douglas:
            d = lh - lx
            return math.log(a) - (1.0 - a) * d, math.log(1.0 - a) + a * d
        lf = self.log_value(lh, lx)
        rho = self.rho
        return math.log(a) + rho * (lf - lh), math.log(1.0 - a) + rho * (lf - lx)

    def cross(self, H, X):
        fh, fx = self.marginals(H, X)
        rho = 1.0 if self.is_cobb_douglas else self.rho
        return rho * fh * fx / self.value(H, X)

    def sigma_lower_bound(self, A):
        return 1.0 if self.is_cobb_douglas else self.sigma


@dataclass(frozen=True)
class TwoSectorAggregate(ProductionModel):
    """Aggregate of a Cobb-Douglas land sector and a linear labor-only sector.

    Cobb-Douglas branch when alpha*A1/A2 >= (H/X)^(1-alpha), linear branch
    A2 H + c X otherwise, c = (1-alpha) alpha^(alpha/(1-alpha)) (A1/A2^alpha)^(1/(1-alpha)).
    """

    alpha: float
    A1: float = 1.0
    A2: float = 1.0

    def __post_init__(self):
        _check_unit("alpha", self.alpha)
        _check_pos("A1", self.A1)
        _check_pos("A2", self.A2)

    @property
    def log_switch(self):
        # log(alpha A1 / A2)
        return math.log(self.alpha * self.A1 / self.A2)

    @property
    def log_land_coef(self):
        a = self.alpha
        return (math.log(1.0 - a) + a / (1.0 - a) * math.log(a)
                + (math.log(self.A1) - a * math.log(self.A2)) / (1.0 - a))

    @property
    def boundary_ratio(self):
        """H/X at which the labor-only sector starts hiring."""
        return math.exp(self.log_switch / (1.0 - self.alpha))

    def _regime(self, lh, lx):
        gap = self.log_switch - (1.0 - self.alpha) * (np.asarray(lh) - np.asarray(lx))
        return gap

    def log_value(self, lh, lx):
        a = self.alpha
        gap = self._regime(lh, lx)
        cd = math.log(self.A1) + a * lh + (1.0 - a) * lx
        lin = np.logaddexp(math.log(self.A2) + lh, self.log_land_coef + lx)
        return np.where(gap >= 0, cd, lin)

    def log_marginals(self, lh, lx):
        a = self.alpha
        gap = self._regime(lh, lx)
        if np.any(np.abs(gap) <= KINK_TOL):
            raise KinkError("marginal products requested on the two-sector regime boundary")
        d = np.asarray(lh) - np.asarray(lx)
        cd_h = math.log(a * self.A1) - (1.0 - a) * d
        cd_x = math.log((1.0 - a) * self.A1) + a * d
        lin_h = np.full_like(cd_h, math.log(self.A2), dtype=float)
        lin_x = np.full_like(cd_x, self.log_land_coef, dtype=float)
        cd = gap > 0
        lfh, lfx = np.where(cd, cd_h, lin_h), np.where(cd, cd_x, lin_x)
        if np.ndim(lfh) == 0:
            return float(lfh), float(lfx)
        return lfh, lfx

    def cross(self, H, X):
        gap = float(self._regime(math.log(H), math.log(X)))
        if abs(gap) <= KINK_TOL:
            raise KinkError("second derivative requested on the two-sector regime boundary")
        if gap < 0:
            return 0.0
        a = self.alpha
        return a * (1.0 - a) * self.A1 * H ** a * X ** (1.0 - a) / (H * X)

    def sigma_lower_bound(self, A):
        return SIGMA_INF if A > self.boundary_ratio else 1.0

    def employment_sector1(self, H=1.0, X=1.0):
        """Labor hired by the land sector at the optimal split."""
        return min(H, self.boundary_ratio * X)


@dataclass(frozen=True)
class UrbanNested(ProductionModel):
    """F(H, X) = H^alpha E(H, X)^(1-alpha) with E = CES(alphaE, sigmaE)."""

    alpha: float
    sigmaE: float
    alphaE: float

    def __post_init__(self):
        _check_unit("alpha", self.alpha)
        _check_unit("alphaE", self.alphaE)
        _check_pos("sigmaE", self.sigmaE)

    @property
    def inner(self):
        return CES(self.alphaE, self.sigmaE)

    def _inner_logs(self, lh, lx):
        """log E, log(E_H/E), log(E_X/E)."""
        E = self.inner
        le = E.log_value(lh, lx)
        leh, lex = E.log_marginals(lh, lx)
        return le, leh - le, lex - le

    def log_value(self, lh, lx):
        le, _, _ = self._inner_logs(lh, lx)
        return self.alpha * lh + (1.0 - self.alpha) * le

    def log_marginals(self, lh, lx):
        a = self.alpha
        le, leh, lex = self._inner_logs(lh, lx)
        lf = a * lh + (1.0 - a) * le
        lfh = lf + np.logaddexp(math.log(a) - lh, math.log(1.0 - a) + leh)
        lfx = lf + math.log(1.0 - a) + lex
        return lfh, lfx

    def cross(self, H, X):
        a = self.alpha
        lh, lx = math.log(H), math.log(X)
        _, leh, lex = self._inner_logs(lh, lx)
        rho_e = 1.0 if self.inner.is_cobb_douglas else self.inner.rho
        F = float(np.exp(self.log_value(lh, lx)))
        return F * (1.0 - a) * math.exp(lex) * (a / H + (rho_e - a) * math.exp(leh))

    def sigma_lower_bound(self, A):
        # sigma_F(h, 1) moves monotonically from 1 toward sigmaE as h grows
        if self.sigmaE >= 1.0:
            return sigmaF_from_sigmaE(self, FactorPoint(A, 1.0))
        return self.sigmaE


@dataclass(frozen=True)
class UrbanParams:
    """Real-estate economy: E(A1 theta H, A2 X) feeds a Cobb-Douglas final good."""

    alpha: float
    theta: float
    sigmaE: float
    alphaE: float
    A1: float = 1.0
    A2: float = 1.0
    A3: float = 1.0

    def __post_init__(self):
        _check_unit("alpha", self.alpha)
        _check_unit("theta", self.theta)
        _check_unit("alphaE", self.alphaE)
        _check_pos("sigmaE", self.sigmaE)
        for name in ("A1", "A2", "A3"):
            _check_pos(name, getattr(self, name))

    @property
    def model(self):
        return UrbanNested(self.alpha, self.sigmaE, self.alphaE)

    def final_output(self, H, X):
        """Y = A3 ((1-theta) H)^alpha E(A1 theta H, A2 X)^(1-alpha)."""
        a = self.alpha
        E = CES(self.alphaE, self.sigmaE)
        le = E.log_value(math.log(self.A1 * self.theta * H), math.log(self.A2 * X))
        return math.exp(math.log(self.A3) + a * math.log((1.0 - self.theta) * H) + (1.0 - a) * le)


class UrbanReduction(NamedTuple):
    lam: float
    A_H: float
    A_X: float
    model: UrbanNested


def urban_reduce(params: UrbanParams) -> UrbanReduction:
    """Factor-augmenting productivities with Y(H, X) = F(A_H H, A_X X)."""
    a, th = params.alpha, params.theta
    # lambda solves A_H^a lambda^(a-1) = A3 (1-theta)^a with lambda A_H = A1 theta
    lam = (params.A1 * th / (1.0 - th)) ** a / params.A3
    return UrbanReduction(lam, params.A1 * th / lam, params.A2 / lam, params.model)


def _as_point(p):
    if isinstance(p, FactorPoint):
        return p
    H, X = p
    return FactorPoint(float(H), float(X))


def evaluate(model: ProductionModel, p) -> float:
    p = _as_point(p)
    return float(np.exp(model.log_value(math.log(p.H), math.log(p.X))))


def marginals(model: ProductionModel, p) -> tuple[float, float]:
    p = _as_point(p)
    lfh, lfx = model.log_marginals(math.log(p.H), math.log(p.X))
    return float(np.exp(lfh)), float(np.exp(lfx))


def cross_fd(model: ProductionModel, p) -> float:
    """F_HX by central differences of the analytic F_X in the H direction."""
    p = _as_point(p)
    h = max(1e-6 * p.H, 1e-9)
    _, fx_up = marginals(model, (p.H + h, p.X))
    _, fx_dn = marginals(model, (p.H - h, p.X))
    return (fx_up - fx_dn) / (2.0 * h)


def elasticity_of_substitution(model: ProductionModel, p, method: str = "analytic") -> float:
    """sigma_F = F_H F_X / (F F_HX); SIGMA_INF where F_HX vanishes."""
    p = _as_point(p)
    F = evaluate(model, p)
    fh, fx = marginals(model, p)
    if method == "analytic":
        fhx = model.cross(p.H, p.X)
    elif method == "fd":
        fhx = cross_fd(model, p)
    else:
        raise ValueError(f"unknown method {method!r}")
    if fhx == 0.0:
        return SIGMA_INF
    sigma = fh * fx / (F * fhx)
    if not sigma > 0:
        raise ConsistencyError(f"computed elasticity {sigma} is not positive at {p}")
    return sigma


def sigmaF_from_sigmaE(params, p) -> float:
    """Elasticity of the urban outer technology from the inner CES elasticity.

    sigma_F - 1 = (sigma_E - 1) / (1 + alpha * (X E_X)/(H E_H) * sigma_E)
    """
    p = _as_point(p)
    inner = CES(params.alphaE, params.sigmaE)
    leh, lex = inner.log_marginals(math.log(p.H), math.log(p.X))
    share_ratio = math.exp(lex + math.log(p.X) - leh - math.log(p.H))
    return 1.0 + (params.sigmaE - 1.0) / (1.0 + params.alpha * share_ratio * params.sigmaE)


class MRTCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def mrt_bound_check(model: ProductionModel, A: float, sigma: float, A_H: float, A_X: float,
                    rtol: float = 1e-12) -> MRTCheck:
    """Compare (F_X/F_H)(A_H, A_X) with (F_X/F_H)(A, 1) A^-rho (A_H/A_X)^rho."""
    ratio = A_H / A_X
    if ratio < A:
        raise DomainError(f"A_H/A_X = {ratio} is below the threshold A = {A}")
    rho = rho_of(sigma)
    fh, fx = marginals(model, (A_H, A_X))
    mh, mx = marginals(model, (A, 1.0))
    lhs = fx / fh
    rhs = math.exp(math.log(mx / mh) - rho * math.log(A) + rho * math.log(ratio))
    return MRTCheck(lhs, rhs, lhs <= rhs * (1.0 + rtol))
