"""Command-line front end.

    landprice {simulate,detect,valuate,scenario} --config run.toml [--out DIR] [--seed N] [--quiet]

A run is described by one TOML document with the sections [technology],
[process], [preferences], [valuation] and [run]. Every run writes
``manifest.txt``, ``config.toml`` (the resolved document, which reproduces the
run when fed back), ``summary.txt`` and ``diagnostics.txt`` next to the
command's CSV output.

Exit codes: 0 success, 2 configuration error, 3 tail bound not certified.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import math
import re
import sys
import traceback
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib
import tomli_w

from . import __version__
from .artifacts import config_hash, write_csv, write_kv
from .equilibrium import compute_path
from .errors import DomainError, NoCertificateError, NumericError
from .production import CES, SIGMA_INF, CobbDouglas, TwoSectorAggregate, UrbanParams, rho_of
from .scenarios import (
    EQUILIBRIUM_COLUMNS,
    SCENARIOS,
    VALUATION_COLUMNS,
    ScenarioConfig,
    equilibrium_rows,
    figure3_replication,
    malthus_to_modern,
    pathology_scenario,
    sectoral_process,
    slope_battery,
    urban_process,
    urban_scenario,
    valuation_rows,
)
from .stochastic_process import (
    DeterministicExponential,
    LogNormal,
    MarkovMultiplicative,
    PointMass,
    overvaluation_criterion,
    sample_path,
)
from .valuation import METHODS, SAMPLERS, ValuationConfig, fundamental_value

COMMANDS = ("simulate", "detect", "valuate", "scenario")
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NO_CERT = 0, 1, 2, 3


class ConfigError(ValueError):
    def __init__(self, key: str, message: str, line: Optional[int] = None):
        self.key, self.line = key, line
        where = f" (line {line})" if line else ""
        super().__init__(f"{key}{where}: {message}")


# --------------------------------------------------------------------------- #
# schema
# --------------------------------------------------------------------------- #

_REQ = object()

# section -> key -> (type, default); defaults of None mean "optional, unset"
_COMMON = {
    "preferences": {"beta": (float, 0.5)},
    "valuation": {
        "horizon": (int, 200),
        "n_paths": (int, 10_000),
        "tail_tolerance": (float, 1e-6),
        "band": (float, 3.0),
        "method": (str, "mc"),
        "criterion": (str, "auto"),
        "mrt_threshold": (float, None),
        "sigma_bound": (float, None),
        "times": (list, [0]),
        "max_terms": (int, 1_000_000),
        "max_horizon": (int, 20_000),
        "workers": (int, 1),
        "chunk": (int, 500),
        "sampler": (str, "tilted"),
        "tilt_iterations": (int, 60),
    },
    "run": {
        "name": (str, "run"),
        "seed": (int, 0),
        "T": (int, 200),
        "stride": (int, 1),
        "scenario": (str, None),
        "n_seeds": (int, 100),
    },
}

_TECHNOLOGY = {
    "ces": {"alpha": (float, _REQ), "sigma": (float, _REQ)},
    "cobb_douglas": {"alpha": (float, _REQ)},
    "two_sector": {"alpha": (float, _REQ)},
    "urban": {"alpha": (float, _REQ), "theta": (float, _REQ), "sigma_e": (float, _REQ),
              "alpha_e": (float, _REQ), "A3": (float, 1.0)},
}

_PROCESS = {
    "exponential": {"G_H": (float, _REQ), "G_X": (float, 1.0), "A_H0": (float, 1.0), "A_X0": (float, 1.0)},
    "sectoral": {"A1": (float, 1.0), "A2": (float, 1.0), "G1": (float, _REQ), "G2": (float, _REQ)},
    "markov": {"Pi": (list, _REQ), "growth": (list, _REQ), "n0": (int, 0), "A0": (float, 1.0)},
}


def _line_of(text: str, section: str, key: Optional[str] = None) -> Optional[int]:
    current = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        m = re.match(r"^\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return n
            continue
        if current == section and key is not None and re.match(rf"^{re.escape(key)}\s*=", line):
            return n
    return None


def _coerce(text, section, key, value, typ):
    name = f"{section}.{key}"
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(name, f"expected a number, got {value!r}", _line_of(text, section, key))
        return float(value)
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(name, f"expected an integer, got {value!r}", _line_of(text, section, key))
        return value
    if not isinstance(value, typ):
        raise ConfigError(name, f"expected {typ.__name__}, got {value!r}", _line_of(text, section, key))
    return value


def _fill(text, doc, section, schema):
    raw = doc.get(section, {})
    if not isinstance(raw, dict):
        raise ConfigError(section, "expected a table", _line_of(text, section))
    for k in raw:
        if k not in schema:
            raise ConfigError(f"{section}.{k}", "unknown key", _line_of(text, section, k))
    out = {}
    for k, (typ, default) in schema.items():
        if k in raw:
            out[k] = _coerce(text, section, k, raw[k], typ)
        elif default is _REQ:
            raise ConfigError(f"{section}.{k}", "missing required key", _line_of(text, section))
        elif default is not None:
            out[k] = list(default) if isinstance(default, list) else default
    return out


def _kind(text, doc, section, kinds, required=True):
    raw = doc.get(section)
    if raw is None:
        if required:
            raise ConfigError(section, "missing section")
        return None, {}
    kind = raw.get("kind")
    if kind is None:
        raise ConfigError(f"{section}.kind", "missing required key", _line_of(text, section))
    if kind not in kinds:
        raise ConfigError(f"{section}.kind", f"expected one of {tuple(kinds)}, got {kind!r}",
                          _line_of(text, section, "kind"))
    values = _fill(text, {section: {k: v for k, v in raw.items() if k != "kind"}}, section, kinds[kind])
    return kind, values


def _check(text, section, key, ok, message):
    if not ok:
        raise ConfigError(f"{section}.{key}", message, _line_of(text, section, key))


def _growth_entry(text, g):
    if isinstance(g, dict):
        if set(g) != {"mu", "s"}:
            raise ConfigError("process.growth", "lognormal entries need exactly mu and s",
                              _line_of(text, "process", "growth"))
        return LogNormal(float(g["mu"]), float(g["s"]))
    return PointMass(float(g))


def _growth_doc(g):
    return {"mu": g.mu, "s": g.s} if isinstance(g, LogNormal) else g.value


@dataclass(frozen=True)
class ParsedConfig:
    """Validated run description plus the resolved document it came from."""

    scenario: ScenarioConfig
    document: dict = field(repr=False)

    @property
    def canonical(self) -> str:
        return tomli_w.dumps(self.document)

    @property
    def hash(self) -> str:
        return config_hash(self.canonical)


def parse_config(text: str, seed: Optional[int] = None) -> ParsedConfig:
    """Validate a TOML run description and apply defaults.

    Raises ConfigError naming the offending key (and line, when it can be
    located) for unknown keys, missing keys, wrong types and out-of-range values.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError("document", str(exc), int(m.group(1)) if m else None) from None
    for section in doc:
        if section not in ("technology", "process", "preferences", "valuation", "run"):
            raise ConfigError(section, "unknown section", _line_of(text, section))

    common = {s: _fill(text, doc, s, schema) for s, schema in _COMMON.items()}
    run, val, beta = common["run"], common["valuation"], common["preferences"]["beta"]
    if seed is not None:
        run["seed"] = seed
    scenario_name = run.get("scenario")
    _check(text, "run", "scenario", scenario_name is None or scenario_name in SCENARIOS,
           f"expected one of {SCENARIOS}")
    _check(text, "preferences", "beta", 0.0 < beta < 1.0, f"must lie in (0, 1), got {beta}")
    _check(text, "run", "T", run["T"] >= 1, "must be >= 1")
    _check(text, "run", "stride", run["stride"] >= 1, "must be >= 1")
    _check(text, "run", "seed", 0 <= run["seed"] < 2 ** 64, "must be an unsigned 64-bit integer")
    _check(text, "run", "n_seeds", run["n_seeds"] >= 1, "must be >= 1")
    _check(text, "valuation", "method", val["method"] in METHODS, f"expected one of {METHODS}")
    _check(text, "valuation", "sampler", val["sampler"] in SAMPLERS, f"expected one of {SAMPLERS}")
    _check(text, "valuation", "criterion", val["criterion"] in ("auto", "markov", "none"),
           "expected one of ('auto', 'markov', 'none')")
    for key in ("horizon", "n_paths", "max_terms", "max_horizon", "workers", "chunk", "tilt_iterations"):
        _check(text, "valuation", key, val[key] >= 1, "must be >= 1")
    _check(text, "valuation", "tail_tolerance", val["tail_tolerance"] > 0, "must be positive")
    _check(text, "valuation", "band", val["band"] >= 0, "must be nonnegative")
    for key in ("mrt_threshold", "sigma_bound"):
        if key in val:
            _check(text, "valuation", key, val[key] > 0, "must be positive")
    _check(text, "valuation", "times",
           all(isinstance(t, int) and not isinstance(t, bool) and t >= 0 for t in val["times"]) and val["times"],
           "must be a nonempty list of nonnegative integers")

    tech_kind, tech = _kind(text, doc, "technology", _TECHNOLOGY, required=scenario_name != "figure3")
    proc_kind, proc = _kind(text, doc, "process", _PROCESS, required=scenario_name != "figure3")
    for key in ("alpha", "theta", "alpha_e"):
        if key in tech:
            _check(text, "technology", key, 0.0 < tech[key] < 1.0, f"must lie in (0, 1), got {tech[key]}")
    for key in ("sigma", "sigma_e", "A3"):
        if key in tech:
            _check(text, "technology", key, tech[key] > 0 and math.isfinite(tech[key]),
                   f"must be positive, got {tech[key]}")
    for key in ("G_H", "G_X", "A_H0", "A_X0", "A1", "A2", "G1", "G2", "A0"):
        if key in proc:
            _check(text, "process", key, proc[key] > 0 and math.isfinite(proc[key]),
                   f"must be positive, got {proc[key]}")

    model = process = None
    if tech_kind == "ces":
        model = CES(tech["alpha"], tech["sigma"])
    elif tech_kind == "cobb_douglas":
        model = CobbDouglas(tech["alpha"])
    elif tech_kind == "two_sector":
        model = TwoSectorAggregate(tech["alpha"])
    elif tech_kind == "urban":
        urban = UrbanParams(tech["alpha"], tech["theta"], tech["sigma_e"], tech["alpha_e"],
                            proc.get("A1", 1.0), proc.get("A2", 1.0), tech["A3"])
        model = urban.model

    if proc_kind == "exponential":
        process = DeterministicExponential(proc["G_H"], proc["G_X"], proc["A_H0"], proc["A_X0"])
    elif proc_kind == "sectoral":
        if tech_kind == "two_sector":
            process = sectoral_process(tech["alpha"], proc["A1"], proc["A2"], proc["G1"], proc["G2"])
        elif tech_kind == "urban":
            process = urban_process(urban, proc["G1"], proc["G2"])
        else:
            raise ConfigError("process.kind", "sectoral growth needs technology.kind two_sector or urban",
                              _line_of(text, "process", "kind"))
    elif proc_kind == "markov":
        Pi, growth = proc["Pi"], proc["growth"]
        try:
            entries = tuple(tuple(_growth_entry(text, g) for g in row) for row in growth)
            process = MarkovMultiplicative(Pi, entries, proc["n0"], proc["A0"])
        except (DomainError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            key = "n0" if "n0" in str(exc) else ("growth" if "growth" in str(exc) else "Pi")
            raise ConfigError(f"process.{key}", str(exc), _line_of(text, "process", key)) from None
        proc["growth"] = [[_growth_doc(g) for g in row] for row in process.growth]
        proc["Pi"] = [[float(x) for x in row] for row in Pi]

    sigma = tech.get("sigma", 1.0 if tech_kind == "cobb_douglas" else None)
    if val["criterion"] == "markov":
        if proc_kind != "markov":
            raise ConfigError("valuation.criterion", "the markov criterion needs process.kind = markov",
                              _line_of(text, "valuation", "criterion"))
        if sigma is not None and not sigma > 1:
            raise ConfigError("technology.sigma", f"criterion requires sigma > 1, got {sigma}",
                              _line_of(text, "technology", "sigma") or _line_of(text, "technology"))

    needs = {"malthus_to_modern": ("two_sector", "sectoral"), "urban": ("urban", "sectoral"),
             "pathology": ("ces", "exponential"), "figure3": (None, None)}
    if scenario_name is not None:
        want_t, want_p = needs[scenario_name]
        if want_t is not None and (tech_kind, proc_kind) != (want_t, want_p):
            raise ConfigError("run.scenario", f"{scenario_name} needs technology.kind = {want_t!r} "
                              f"and process.kind = {want_p!r}", _line_of(text, "run", "scenario"))
        if scenario_name == "figure3" and model is not None and not (tech_kind == "ces" and proc_kind == "markov"):
            raise ConfigError("run.scenario", "figure3 needs a ces technology and a markov process",
                              _line_of(text, "run", "scenario"))

    vcfg = ValuationConfig(
        horizon=val["horizon"], n_paths=val["n_paths"], seed=run["seed"], tail_tolerance=val["tail_tolerance"],
        mrt_threshold=val.get("mrt_threshold"), sigma_bound=val.get("sigma_bound"), band=val["band"],
        method=val["method"], max_terms=val["max_terms"], mc_max_horizon=val["max_horizon"],
        chunk=val["chunk"], workers=val["workers"], sampler=val["sampler"],
        tilt_iterations=val["tilt_iterations"])
    params = {"technology": dict(tech, kind=tech_kind) if tech_kind else {},
              "process": dict(proc, kind=proc_kind) if proc_kind else {}}
    cfg = ScenarioConfig(
        name=run["name"], model=model, process=process, beta=beta, T=run["T"], seed=run["seed"],
        valuation=vcfg, stride=run["stride"], value_times=tuple(val["times"]), criterion=val["criterion"],
        scenario=scenario_name, n_seeds=run["n_seeds"], params=params)

    document = {}
    if tech_kind:
        document["technology"] = params["technology"]
    if proc_kind:
        document["process"] = params["process"]
    document["preferences"] = {"beta": beta}
    document["valuation"] = val
    document["run"] = run
    return ParsedConfig(cfg, document)


# --------------------------------------------------------------------------- #
# commands
# --------------------------------------------------------------------------- #


@dataclass
class RunOutcome:
    status: int
    outputs: list
    summary: dict
    diagnostics: list


def _criterion_sigma(cfg: ScenarioConfig) -> Optional[float]:
    model = cfg.model
    if cfg.valuation.sigma_bound is not None:
        return cfg.valuation.sigma_bound
    if isinstance(model, CES):
        return model.sigma
    if isinstance(model, CobbDouglas):
        return 1.0
    proc = cfg.process
    A = proc.A0 if isinstance(proc, MarkovMultiplicative) else proc.A_H0 / proc.A_X0
    if isinstance(model, TwoSectorAggregate) and isinstance(proc, DeterministicExponential) \
            and proc.log_growth_ratio > 0:
        # finitely many Malthusian periods do not affect finiteness of the sum
        return SIGMA_INF
    return model.sigma_lower_bound(cfg.valuation.mrt_threshold or A)


def _simulate(cfg, out):
    path = sample_path(cfg.process, cfg.T, cfg.seed)
    eq = compute_path(cfg.model, path, cfg.beta)
    f = write_csv(out / "equilibrium.csv", EQUILIBRIUM_COLUMNS, equilibrium_rows(eq, cfg.stride))
    return [f], {"T": cfg.T, "P_0": float(eq.P[0]), "P_T": float(eq.P[-1])}, []


def _detect(cfg, out):
    sigma = _criterion_sigma(cfg)
    if not sigma > 1:
        return [], {"sigma": sigma, "verdict": "not_applicable"}, \
            [f"spectral-radius criterion needs sigma > 1; sigma = {sigma!r}"]
    crit = overvaluation_criterion(cfg.process, sigma)
    rows = [[i] + [float(x) for x in row] for i, row in enumerate(crit.K)]
    f = write_csv(out / "K.csv", ["row"] + [f"k{j}" for j in range(crit.K.shape[1])], rows)
    summary = {
        "sigma": float(sigma),
        "rho": rho_of(sigma),
        "spectral_radius": crit.radius,
        "s": "" if crit.s is None else " ".join(repr(float(x)) for x in crit.s),
        "condition_sum": crit.condition_sum,
        "verdict": crit.verdict,
    }
    return [f], summary, []


def _valuate(cfg, out):
    times = sorted(set(cfg.value_times))
    base = None
    if isinstance(cfg.process, MarkovMultiplicative):
        base = sample_path(cfg.process, max(times), cfg.seed)
    results = [fundamental_value(cfg.model, cfg.process, cfg.beta, t, cfg.valuation, base) for t in times]
    f = write_csv(out / "valuation.csv", VALUATION_COLUMNS, valuation_rows(results))
    diags = [f"t={v.t}: tail bound {v.tail_bound!r} above tolerance" for v in results if not v.certified]
    summary = {"n_times": len(results), "method": results[0].method,
               "verdicts": " ".join(v.verdict for v in results)}
    return [f], summary, diags


def _scenario(cfg, out):
    name = cfg.scenario
    tech, proc = cfg.params["technology"], cfg.params["process"]
    diags = []
    if name == "malthus_to_modern":
        rep = malthus_to_modern(tech["alpha"], proc["A1"], proc["A2"], proc["G1"], proc["G2"], cfg.beta, cfg.T,
                                cfg.valuation)
    elif name == "figure3":
        rep = figure3_replication(cfg.seed, cfg.T, cfg.valuation, cfg.beta, cfg.model, cfg.process)
    elif name == "urban":
        params = UrbanParams(tech["alpha"], tech["theta"], tech["sigma_e"], tech["alpha_e"],
                             proc["A1"], proc["A2"], tech["A3"])
        rep = urban_scenario(params, proc["G1"], proc["G2"], cfg.beta, cfg.T, cfg.valuation)
    else:
        G_X = proc["G_X"]
        rep = pathology_scenario(tech["alpha"], tech["sigma"], proc["G_H"], G_X, cfg.beta, cfg.T)
    summary = rep.summary()
    if name == "figure3":
        slopes = slope_battery(cfg.n_seeds, cfg.T, cfg.seed, cfg.beta, cfg.model, cfg.process)
        summary["battery_seeds"] = cfg.n_seeds
        summary["battery_positive_slopes"] = int((slopes > 0).sum())
        if rep.valuation is not None and rep.valuation.verdict != rep.verdict:
            diags.append(f"Monte Carlo verdict {rep.valuation.verdict!r} differs from criterion verdict "
                         f"{rep.verdict!r}: gap {rep.valuation.B!r} vs se {rep.valuation.se!r}")
    f = write_csv(out / f"{name}.csv", rep.columns, rep.rows(cfg.stride))
    return [f], summary, diags


_DISPATCH = {"simulate": _simulate, "detect": _detect, "valuate": _valuate, "scenario": _scenario}


def run(command: str, parsed: ParsedConfig, out: Path) -> RunOutcome:
    """Execute ``command`` and write its artifacts under ``out``."""
    cfg = parsed.scenario
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.toml").write_text(parsed.canonical, encoding="utf-8")
    diagnostics = []
    status, outputs, summary = EXIT_OK, [], {}
    if command == "scenario" and cfg.scenario is None:
        status = EXIT_CONFIG
        diagnostics.append("error: run.scenario: required by the scenario command")
    else:
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                outputs, summary, diags = _DISPATCH[command](cfg, out)
            diagnostics += diags + [f"warning: {w.message}" for w in caught]
        except NoCertificateError as exc:
            status = EXIT_NO_CERT
            diagnostics.append(f"error: {exc}; partial={exc.partial!r} tail_bound={exc.tail_bound!r} "
                               f"horizon={exc.horizon}")
        except (DomainError, ConfigError) as exc:
            status = EXIT_CONFIG
            diagnostics.append(f"error: {exc}")
        except NumericError as exc:
            status = EXIT_FAIL
            diagnostics.append(f"error: {exc}")
    summary = {"command": command, "status": status, **summary}
    write_kv(out / "summary.txt", summary)
    (out / "diagnostics.txt").write_text("".join(d + "\n" for d in diagnostics), encoding="utf-8")
    manifest = {
        "config_hash": parsed.hash,
        "seed": cfg.seed,
        "scenario": cfg.scenario or cfg.name,
        "command": command,
        "artifact_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "outputs": " ".join(p.name for p in outputs + [out / "summary.txt", out / "diagnostics.txt",
                                                          out / "config.toml"]),
    }
    write_kv(out / "manifest.txt", manifest)
    return RunOutcome(status, outputs, summary, diagnostics)


def _error_only(out: Path, message: str):
    out.mkdir(parents=True, exist_ok=True)
    (out / "diagnostics.txt").write_text(f"error: {message}\n", encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="landprice", description="Land price bubbles under unbalanced growth.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--quiet", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text(encoding="utf-8")
        parsed = parse_config(text, seed=args.seed)
    except (OSError, ConfigError, DomainError) as exc:
        _error_only(args.out, str(exc))
        if not args.quiet:
            print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        outcome = run(args.command, parsed, args.out)
    except Exception as exc:  # unexpected: still leave a diagnostics trail
        _error_only(args.out, "".join(traceback.format_exception_only(type(exc), exc)).strip())
        raise
    if not args.quiet:
        for k, v in outcome.summary.items():
            print(f"{k}={v}")
        for d in outcome.diagnostics:
            print(d, file=sys.stderr)
    return outcome.status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
