"""Named, reproducible experiments built from the library modules.

Each scenario returns a report object exposing ``columns``/``rows()`` for the
per-period CSV and ``summary()`` for the key=value record. Verdicts come from
the criterion and valuation functions they wrap. None of them re-derives the
underlying math.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import numpy as np

from .equilibrium import EquilibriumPath, PathologySeries, compute_path, pathology_check
from .errors import DomainError
from .production import (
    CES,
    SIGMA_INF,
    ProductionModel,
    TwoSectorAggregate,
    UrbanParams,
    elasticity_of_substitution,
    sigmaF_from_sigmaE,
    urban_reduce,
)
from .stochastic_process import (
    Criterion,
    DeterministicExponential,
    MarkovMultiplicative,
    ProductivityPath,
    overvaluation_criterion,
    sample_path,
)
from .valuation import (
    ValuationConfig,
    ValuationResult,
    fundamental_value,
    lattice_supported,
    log_price_rent_slope,
)

SCENARIOS = ("malthus_to_modern", "figure3", "urban", "pathology")


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a run needs. ``params`` holds scenario-specific scalars."""

    name: str
    model: Optional[ProductionModel] = None
    process: Any = None
    beta: float = 0.5
    T: int = 200
    seed: int = 0
    valuation: ValuationConfig = field(default_factory=ValuationConfig)
    stride: int = 1
    value_times: tuple = (0,)
    criterion: str = "auto"
    scenario: Optional[str] = None
    n_seeds: int = 100
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.T < 1:
            raise DomainError(f"run.T must be >= 1, got {self.T}")
        if self.stride < 1:
            raise DomainError(f"run.stride must be >= 1, got {self.stride}")
        if self.scenario is not None and self.scenario not in SCENARIOS:
            raise DomainError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")


def _strided(n, stride):
    idx = list(range(0, n, stride))
    if idx[-1] != n - 1:
        idx.append(n - 1)
    return idx


def equilibrium_rows(eq: EquilibriumPath, stride: int = 1):
    """Rows of the per-period equilibrium table (levels rebuilt from logs)."""
    from .artifacts import fmt_from_log

    log_m = eq.log_m
    log_R = eq.log_R
    log_cy = math.log(1.0 - eq.beta) + eq.log_w
    log_co = np.logaddexp(eq.log_P, eq.log_r)
    state = eq.path.state
    for t in _strided(eq.T + 1, stride):
        yield (
            t,
            "" if state is None else int(state[t]),
            fmt_from_log(eq.path.log_AH[t]),
            fmt_from_log(eq.path.log_AX[t]),
            fmt_from_log(eq.log_w[t]),
            fmt_from_log(eq.log_r[t]),
            fmt_from_log(eq.log_P[t]),
            fmt_from_log(log_cy[t]),
            fmt_from_log(log_co[t]),
            "" if t == 0 else fmt_from_log(log_R[t - 1]),
            "" if t == eq.T else fmt_from_log(log_m[t]),
            float(eq.log_w[t]),
            float(eq.log_r[t]),
            float(eq.log_P[t]),
        )


EQUILIBRIUM_COLUMNS = ("t", "state", "A_H", "A_X", "w", "r", "P", "c_y", "c_o", "R", "m",
                       "log_w", "log_r", "log_P")
VALUATION_COLUMNS = ("t", "P", "V_hat", "se", "tail_bound", "B", "verdict", "price_rent", "V_over_P")


def valuation_rows(results):
    for v in results:
        yield (v.t, v.P, v.V, v.se, v.tail_bound, v.B, v.verdict, v.price_rent, v.V_over_P)


def valuation_summary(v: ValuationResult, prefix: str = "valuation") -> dict:
    return {
        f"{prefix}.method": v.method,
        f"{prefix}.t": v.t,
        f"{prefix}.P": v.P,
        f"{prefix}.V_hat": v.V,
        f"{prefix}.B": v.B,
        f"{prefix}.se": v.se,
        f"{prefix}.tail_bound": v.tail_bound,
        f"{prefix}.certificate": v.certificate,
        f"{prefix}.certified": v.certified,
        f"{prefix}.horizon": v.horizon,
        f"{prefix}.n_paths": v.n_paths,
        f"{prefix}.ess": "" if v.ess is None else v.ess,
        f"{prefix}.verdict": v.verdict,
    }


# --------------------------------------------------------------------------- #
# structural transition
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class TransitionReport:
    alpha: float
    t: np.ndarray
    w: np.ndarray
    H1: np.ndarray
    r: np.ndarray
    modern: np.ndarray
    t_star: float
    switch_period: Optional[int]
    permanent_malthusian: bool
    criterion: Criterion
    valuation: Optional[ValuationResult]

    @property
    def verdict(self):
        return self.criterion.verdict

    columns = ("t", "regime", "w", "H1", "r")

    def rows(self, stride=1):
        for i in _strided(len(self.t), stride):
            yield (int(self.t[i]), "modern" if self.modern[i] else "malthusian",
                   float(self.w[i]), float(self.H1[i]), float(self.r[i]))

    def summary(self):
        out = {
            "scenario": "malthus_to_modern",
            "t_star": self.t_star,
            "switch_period": "" if self.switch_period is None else self.switch_period,
            "permanent_malthusian": self.permanent_malthusian,
            "condition_sum": self.criterion.condition_sum,
            "spectral_radius": self.criterion.radius,
            "verdict": self.verdict,
        }
        if self.valuation is not None:
            out.update(valuation_summary(self.valuation))
        return out


def sectoral_process(alpha, A1, A2, G1, G2) -> DeterministicExponential:
    """Factor-augmenting form of the two-sector economy.

    With A_H = A2t and A_X = (A1t / A2t^alpha)^(1/(1-alpha)) the aggregate is
    ``TwoSectorAggregate(alpha)`` evaluated at (A_H, A_X).
    """
    k = 1.0 / (1.0 - alpha)
    return DeterministicExponential(
        G_H=G2, G_X=math.exp(k * (math.log(G1) - alpha * math.log(G2))),
        A_H0=A2, A_X0=math.exp(k * (math.log(A1) - alpha * math.log(A2))))


def malthus_to_modern(alpha: float, A1: float, A2: float, G1: float, G2: float, beta: float = 0.5,
                      T: int = 100, valuation: Optional[ValuationConfig] = None) -> TransitionReport:
    """Two-sector economy with exponential sectoral productivities.

    The land sector employs everyone while alpha A1t >= A2t. After that the
    labor-only sector is active and the land sector's share shrinks.
    """
    for name, v in (("A1", A1), ("A2", A2), ("G1", G1), ("G2", G2)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v}")
    model = TwoSectorAggregate(alpha)
    proc = sectoral_process(alpha, A1, A2, G1, G2)
    eq = compute_path(model, sample_path(proc, T), beta)
    t = np.arange(T + 1)
    log_lead = math.log(alpha * A1 / A2) + t * (math.log(G1) - math.log(G2))  # log(alpha A1t / A2t)
    modern = log_lead < 0
    H1 = np.array([model.employment_sector1(1.0, math.exp(lx - lh))
                   for lh, lx in zip(eq.path.log_AH, eq.path.log_AX)])
    g = math.log(G2 / G1)
    t_star = math.log(alpha * A1 / A2) / g if g != 0 else (math.inf if alpha * A1 >= A2 else -math.inf)
    switch = int(np.argmax(modern)) if modern.any() else None
    permanent = G1 == G2 and alpha * A1 >= A2
    crit = overvaluation_criterion(proc, SIGMA_INF)
    val = None
    if valuation is not None and crit.verdict == "overvalued":
        val = fundamental_value(model, proc, beta, 0, valuation)
    return TransitionReport(alpha, t, eq.w, H1, eq.r, modern, t_star, switch, permanent, crit, val)


# --------------------------------------------------------------------------- #
# recurrent stochastic bubbles
# --------------------------------------------------------------------------- #

FIGURE3_BETA = 0.5
FIGURE3_ALPHA = 0.8
FIGURE3_SIGMA = 1.25


def figure3_model() -> CES:
    return CES(FIGURE3_ALPHA, FIGURE3_SIGMA)


def figure3_process() -> MarkovMultiplicative:
    Pi = [[2.0 / 3.0, 1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]]
    return MarkovMultiplicative(Pi, ((1.1, 1.1), (0.95, 0.95)), n0=0, A0=1.0)


@dataclass(frozen=True)
class Figure3Report:
    eq: EquilibriumPath
    criterion: Criterion
    slope: float
    valuation: Optional[ValuationResult]
    exact: Optional[ValuationResult]
    stride: int = 1

    @property
    def verdict(self):
        return self.criterion.verdict

    columns = ("t", "state", "A", "P", "r", "price_rent", "log_price_rent")

    def rows(self, stride=None):
        from .artifacts import fmt_from_log

        eq = self.eq
        lpr = eq.log_price_rent
        for t in _strided(eq.T + 1, stride or self.stride):
            yield (t, int(eq.path.state[t]), fmt_from_log(eq.path.log_ratio[t]), fmt_from_log(eq.log_P[t]),
                   fmt_from_log(eq.log_r[t]), fmt_from_log(lpr[t]), float(lpr[t]))

    def summary(self):
        out = {
            "scenario": "figure3",
            "spectral_radius": self.criterion.radius,
            "s": " ".join(repr(float(x)) for x in self.criterion.s) if self.criterion.s is not None else "",
            "verdict": self.verdict,
            "log_price_rent_slope": self.slope,
            "radius_below_one": self.criterion.radius < 1.0,
            "slope_positive": self.slope > 0,
        }
        if self.valuation is not None:
            out.update(valuation_summary(self.valuation, "valuation"))
        if self.exact is not None:
            out.update(valuation_summary(self.exact, "valuation_exact"))
        return out


def figure3_replication(seed: int = 0, T: int = 200, valuation: Optional[ValuationConfig] = None,
                        beta: float = FIGURE3_BETA, model: Optional[ProductionModel] = None,
                        process: Optional[MarkovMultiplicative] = None, exact: bool = True) -> Figure3Report:
    """Simulated price path, spectral-radius criterion and V_0.

    ``valuation`` runs plain Monte Carlo at t=0. With ``exact`` the lattice
    expectation is reported alongside it whenever the process allows it.
    """
    model = model or figure3_model()
    process = process or figure3_process()
    sigma = getattr(model, "sigma", 1.0)
    path = sample_path(process, T, seed)
    eq = compute_path(model, path, beta)
    crit = overvaluation_criterion(process, sigma)
    mc = lat = None
    if valuation is not None:
        cfg = _replace(valuation, method="mc")
        mc = fundamental_value(model, process, beta, 0, cfg, path)
        if exact and lattice_supported(process):
            lat = fundamental_value(model, process, beta, 0, _replace(valuation, method="lattice"), path)
    return Figure3Report(eq, crit, log_price_rent_slope(eq), mc, lat)


def _replace(cfg, **kw):
    from dataclasses import replace

    return replace(cfg, **kw)


def slope_battery(n_seeds: int = 100, T: int = 200, start_seed: int = 0, beta: float = FIGURE3_BETA,
                  model=None, process=None) -> np.ndarray:
    """log price-rent slopes for seeds start_seed .. start_seed + n_seeds - 1."""
    model = model or figure3_model()
    process = process or figure3_process()
    return np.array([log_price_rent_slope(compute_path(model, sample_path(process, T, s), beta))
                     for s in range(start_seed, start_seed + n_seeds)])


# --------------------------------------------------------------------------- #
# urban economy
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class UrbanReport:
    params: UrbanParams
    eq: EquilibriumPath
    sigmaF: np.ndarray
    valuation: Optional[ValuationResult]
    criterion: Optional[Criterion]

    @property
    def verdict(self):
        if self.valuation is not None:
            return self.valuation.verdict
        return self.criterion.verdict if self.criterion is not None else "fundamental"

    columns = ("t", "A_H", "A_X", "P", "r", "price_rent", "sigma_F")

    def rows(self, stride=1):
        from .artifacts import fmt_from_log

        eq = self.eq
        for t in _strided(eq.T + 1, stride):
            yield (t, fmt_from_log(eq.path.log_AH[t]), fmt_from_log(eq.path.log_AX[t]),
                   fmt_from_log(eq.log_P[t]), fmt_from_log(eq.log_r[t]),
                   fmt_from_log(eq.log_price_rent[t]), float(self.sigmaF[t]))

    def summary(self):
        out = {"scenario": "urban", "sigma_F_first": float(self.sigmaF[0]),
               "sigma_F_last": float(self.sigmaF[-1]), "verdict": self.verdict}
        if self.criterion is not None:
            out["condition_sum"] = self.criterion.condition_sum
        if self.valuation is not None:
            out.update(valuation_summary(self.valuation))
        return out


def urban_process(params: UrbanParams, G1: float, G2: float) -> DeterministicExponential:
    """Productivity path of the composed model when A1 grows at G1 and A2 at G2."""
    red = urban_reduce(params)
    a = params.alpha
    return DeterministicExponential(G_H=G1 ** (1.0 - a), G_X=G2 / G1 ** a, A_H0=red.A_H, A_X0=red.A_X)


def urban_scenario(params: UrbanParams, G1: float, G2: float = 1.0, beta: float = 0.5, T: int = 200,
                   valuation: Optional[ValuationConfig] = None) -> UrbanReport:
    proc = urban_process(params, G1, G2)
    model = params.model
    eq = compute_path(model, sample_path(proc, T), beta)
    sigmaF = np.array([sigmaF_from_sigmaE(params, (math.exp(lh), math.exp(lx)))
                       for lh, lx in zip(eq.path.log_AH, eq.path.log_AX)])
    crit = None
    if params.sigmaE > 1:
        # sigma_F at t=0 bounds sigma_F from below once A_H/A_X is rising
        crit = overvaluation_criterion(proc, float(sigmaF[0])) if proc.log_growth_ratio > 0 else None
    val = fundamental_value(model, proc, beta, 0, valuation) if valuation is not None else None
    return UrbanReport(params, eq, sigmaF, val, crit)


def urban_sigma_fd(params: UrbanParams, A_H: float, A_X: float) -> float:
    """Elasticity of the composed technology by finite differences."""
    return elasticity_of_substitution(params.model, (A_H, A_X), method="fd")


# --------------------------------------------------------------------------- #
# sigma < 1 counterfactual
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class PathologyReport:
    series: PathologySeries
    window_start: int
    verdict: str

    @property
    def R_growth(self):
        return float(self.series.R[-1] / self.series.R[0])

    @property
    def ratio_range(self):
        sel = self.series.t >= self.window_start
        r = self.series.ratio[sel]
        return float(r.min()), float(r.max())

    columns = ("t", "R", "lower", "asymptote", "ratio")

    def rows(self, stride=1):
        s = self.series
        for i in _strided(len(s.t), stride):
            yield (int(s.t[i]), float(s.R[i]), float(s.lower[i]), float(s.asymptote[i]), float(s.ratio[i]))

    def summary(self):
        lo, hi = self.ratio_range
        return {"scenario": "pathology", "R_1": float(self.series.R[0]), "R_T": float(self.series.R[-1]),
                "R_growth": self.R_growth, "ratio_min": lo, "ratio_max": hi,
                "window_start": self.window_start, "verdict": self.verdict}


def pathology_scenario(alpha: float = 0.5, sigma: float = 0.5, G_H: float = 1.1, G_X: float = 1.0,
                       beta: float = 0.5, T: int = 300, window_start: Optional[int] = None,
                       divergence_factor: float = 10.0, ratio_tol: float = 0.01) -> PathologyReport:
    """Gross returns when land and labor are complements and labor outgrows land."""
    series = pathology_check(alpha, sigma, G_H, G_X, beta, T)
    start = (2 * T) // 3 if window_start is None else window_start
    sel = series.t >= start
    diverging = series.R[-1] > divergence_factor * series.R[0]
    near = bool(np.all(np.abs(series.ratio[sel] - 1.0) <= ratio_tol))
    verdict = "diverging interest rate" if diverging and near else "bounded interest rate"
    return PathologyReport(series, start, verdict)
