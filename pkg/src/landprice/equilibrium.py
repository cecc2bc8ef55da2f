"""Closed-form OLG equilibrium along a productivity path.

With log utility and unit factor supplies the equilibrium is

    w_t = F_H(A_Ht, A_Xt) A_Ht      r_t = F_X(A_Ht, A_Xt) A_Xt
    P_t = beta w_t                  c_y = (1 - beta) w_t      c_o = beta w_t + r_t

Prices are carried as logs; levels are exponentiated on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DomainError
from .production import CES, ProductionModel
from .stochastic_process import DeterministicExponential, ProductivityPath, sample_path


class EquilibriumPoint(NamedTuple):
    t: int
    w: float
    r: float
    P: float
    c_y: float
    c_o: float
    m_next: Optional[float]
    R: Optional[float]
    state: Optional[int] = None


@dataclass(frozen=True, eq=False)
class EquilibriumPath:
    beta: float
    model: ProductionModel
    path: ProductivityPath
    log_w: np.ndarray
    log_r: np.ndarray

    @property
    def T(self):
        return len(self.log_w) - 1

    @property
    def log_P(self):
        return math.log(self.beta) + self.log_w

    @property
    def w(self):
        return np.exp(self.log_w)

    @property
    def r(self):
        return np.exp(self.log_r)

    @property
    def P(self):
        return np.exp(self.log_P)

    @property
    def c_y(self):
        return (1.0 - self.beta) * self.w

    @property
    def c_o(self):
        return np.exp(np.logaddexp(self.log_P, self.log_r))

    @property
    def log_m(self):
        """log m_{t -> t+1} for t = 0..T-1."""
        return log_sdf(self.log_P, self.log_r)

    @property
    def log_R(self):
        """log R_t for t = 1..T (entry t-1)."""
        lp = self.log_P
        return np.logaddexp(lp[1:], self.log_r[1:]) - lp[:-1]

    @property
    def m(self):
        return np.exp(self.log_m)

    @property
    def R(self):
        return np.exp(self.log_R)

    @property
    def log_price_rent(self):
        return self.log_P - self.log_r

    def point(self, t: int) -> EquilibriumPoint:
        m = float(np.exp(self.log_m[t])) if t < self.T else None
        R = float(np.exp(self.log_R[t - 1])) if t > 0 else None
        w, r = float(np.exp(self.log_w[t])), float(np.exp(self.log_r[t]))
        state = None if self.path.state is None else int(self.path.state[t])
        return EquilibriumPoint(t, w, r, self.beta * w, (1.0 - self.beta) * w, self.beta * w + r, m, R, state)

    def points(self):
        return [self.point(t) for t in range(self.T + 1)]


def log_sdf(log_P, log_r):
    """log of m_{t->t+1} = P_t / (P_{t+1} + r_{t+1}) along the last axis."""
    log_P = np.asarray(log_P)
    log_r = np.asarray(log_r)
    return log_P[..., :-1] - np.logaddexp(log_P[..., 1:], log_r[..., 1:])


def check_beta(beta):
    if not (0.0 < beta < 1.0):
        raise DomainError(f"beta must lie in (0, 1), got {beta}")


def compute_path(model: ProductionModel, path: ProductivityPath, beta: float) -> EquilibriumPath:
    check_beta(beta)
    lfh, lfx = model.log_marginals(path.log_AH, path.log_AX)
    log_w = np.asarray(lfh + path.log_AH, dtype=float)
    log_r = np.asarray(lfx + path.log_AX, dtype=float)
    return EquilibriumPath(beta, model, path, log_w, log_r)


def sdf(point_t: EquilibriumPoint, point_t1: EquilibriumPoint) -> float:
    """m = beta w_t / (beta w_{t+1} + r_{t+1})."""
    return point_t.P / (point_t1.P + point_t1.r)


def gross_return(point_t: EquilibriumPoint, point_t1: EquilibriumPoint) -> float:
    """R_{t+1} = (P_{t+1} + r_{t+1}) / P_t."""
    return (point_t1.P + point_t1.r) / point_t.P


class PathologySeries(NamedTuple):
    t: np.ndarray
    R: np.ndarray
    lower: np.ndarray
    asymptote: np.ndarray
    ratio: np.ndarray


def pathology_check(alpha: float, sigma: float, G_H: float, G_X: float, beta: float, T: int) -> PathologySeries:
    """Exact gross returns under CES with exponential growth, against the
    large-t approximation of r_t / (beta w_{t-1}) that holds when sigma < 1
    and G_H > G_X:

        (1 - alpha)/(alpha beta) * G_X * (G_H/G_X)^((rho - 1)(t - 1))
    """
    model = CES(alpha, sigma)
    eq = compute_path(model, sample_path(DeterministicExponential(G_H, G_X), T), beta)
    t = np.arange(1, T + 1)
    log_lower = eq.log_r[1:] - eq.log_P[:-1]
    rho = 1.0 / sigma
    log_asym = (math.log((1.0 - alpha) / (alpha * beta)) + math.log(G_X)
                + (rho - 1.0) * (t - 1) * (math.log(G_H) - math.log(G_X)))
    return PathologySeries(t, eq.R, np.exp(log_lower), np.exp(log_asym), np.exp(log_lower - log_asym))
