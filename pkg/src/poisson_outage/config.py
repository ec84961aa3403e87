"""Run configuration: a versioned JSON document validated against a schema.

A document holds run-wide options and a list of named scenarios::

    {
      "version": 1,
      "seed": 0, "trials": 1000000, "workers": 1,
      "grid": {"start": 30, "stop": 70, "step": 1},
      "epsilon": [0.1, 0.01], "gamma_db": [0, 20, 40],
      "scenarios": [{"name": "k1", "m": 2, "link": {...}, "density": {...}, ...}]
    }

Per-scenario ``grid`` and ``trials`` override the run-wide values.
"""
from __future__ import annotations

import copy
import json
import math
import os
from dataclasses import dataclass

import jsonschema
import numpy as np

from .analytic import CancellationPolicy
from .fading import FadingModel, sigma_db_to_neper
from .filtering import FilterModel, load_table
from .pointfield import DensityModel, ball_constant
from .propagation import LinkParams
from .simulator import MAX_TRIALS, Scenario

VERSION = 1


class ConfigError(ValueError):
    """The configuration document is malformed or inconsistent."""


_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_GRID = {
    "type": "object",
    "properties": {"start": {"type": "number"}, "stop": {"type": "number"}, "step": _POSITIVE},
    "required": ["start", "stop", "step"],
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "required": ["version", "scenarios"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": VERSION},
        "description": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "trials": {"type": "integer", "minimum": 1, "maximum": MAX_TRIALS - 1},
        "workers": {"type": "integer", "minimum": 1},
        "grid": _GRID,
        "epsilon": {"type": "array", "minItems": 1,
                    "items": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}},
        "gamma_db": {"type": "array", "minItems": 1, "items": {"type": "number"}},
        "scenarios": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "m", "link", "density"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "pattern": "^[A-Za-z0-9_.=-]+$"},
                    "m": {"enum": [1, 2, 3]},
                    "link": {
                        "type": "object",
                        "required": ["nu"],
                        "additionalProperties": False,
                        "properties": {
                            "nu": {"type": "number", "minimum": 1},
                            "p_t": _POSITIVE, "p_0": _POSITIVE, "a_nu": _POSITIVE,
                            "g_t": _POSITIVE, "g_r": _POSITIVE, "r_max": _POSITIVE,
                        },
                    },
                    "density": {
                        "type": "object",
                        "required": ["kind"],
                        "additionalProperties": False,
                        "properties": {
                            "kind": {"enum": ["uniform", "power_law", "piecewise"]},
                            "rho": {"type": "number", "minimum": 0},
                            "n_max": {"type": "number", "minimum": 0},
                            "rho0": {"type": "number", "minimum": 0},
                            "beta": {"type": "number"},
                            "r_ref": _POSITIVE,
                            "breakpoints": {"type": "array", "items": _POSITIVE},
                            "levels": {"type": "array", "items": {"type": "number", "minimum": 0}},
                        },
                    },
                    "region_multiplier": {"type": "number", "minimum": 1},
                    "policy": {
                        "type": "object",
                        "required": ["kind"],
                        "additionalProperties": False,
                        "properties": {
                            "kind": {"enum": ["none", "complete", "partial", "hybrid"]},
                            "k": {"type": "integer", "minimum": 1},
                            "alpha": {"type": "number", "minimum": 0, "maximum": 1},
                        },
                    },
                    "fading": {
                        "type": "object",
                        "required": ["kind"],
                        "additionalProperties": False,
                        "properties": {
                            "kind": {"enum": ["none", "rayleigh", "lognormal", "composite",
                                              "nakagami", "weibull", "rice"]},
                            "sigma": {"type": "number", "minimum": 0},
                            "sigma_db": {"type": "number", "minimum": 0},
                            "m_f": {"type": "number", "minimum": 0.5},
                            "shape": _POSITIVE,
                            "k_factor": {"type": "number", "minimum": 0},
                        },
                    },
                    "filter": {
                        "type": "object",
                        "required": ["kind"],
                        "additionalProperties": False,
                        "properties": {
                            "kind": {"enum": ["isotropic", "sector", "cospower", "tabulated"]},
                            "p": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                            "backlobe": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                            "n": {"type": "number", "minimum": 0},
                            "table": {"type": "string"},
                            "z": {"type": "array", "items": {"type": "number"}},
                            "gain": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
                            "weights": {"type": "array", "items": {"type": "number", "minimum": 0}},
                        },
                    },
                    "grid": _GRID,
                    "trials": {"type": "integer", "minimum": 1, "maximum": MAX_TRIALS - 1},
                    "derived": {"type": "object"},
                },
            },
        },
    },
}

DEFAULTS = {
    "seed": 0,
    "trials": 1_000_000,
    "workers": 1,
    "epsilon": [0.1, 0.01, 0.001],
    "gamma_db": [0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0],
}


@dataclass
class NamedScenario:
    name: str
    scenario: Scenario
    grid_db: np.ndarray


@dataclass
class RunConfig:
    document: dict
    scenarios: list[NamedScenario]
    seed: int
    workers: int
    epsilon: list[float]
    gamma_db: list[float]


def parse_grid(text: str) -> dict:
    """``START:STOP:STEP`` in dB to a grid document."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid {text!r}: expected START:STOP:STEP")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"grid {text!r}: {exc}") from None
    return {"start": start, "stop": stop, "step": step}


def grid_values(grid: dict, where: str = "grid") -> np.ndarray:
    start, stop, step = grid["start"], grid["stop"], grid["step"]
    if not start < stop:
        raise ConfigError(f"{where}: start must be below stop")
    if not step > 0:
        raise ConfigError(f"{where}: step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9))
    return np.round(start + step * np.arange(n + 1), 10)


def load_document(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def validate(doc: dict) -> None:
    errors = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for e in errors:
            where = "/".join(str(p) for p in e.absolute_path) or "<root>"
            lines.append(f"{where}: {e.message}")
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(lines))


def apply_overrides(doc: dict, trials=None, seed=None, workers=None, grid=None) -> dict:
    """Command-line flags take precedence over every matching config field."""
    doc = copy.deepcopy(doc)
    if seed is not None:
        doc["seed"] = seed
    if workers is not None:
        doc["workers"] = workers
    if trials is not None:
        doc["trials"] = trials
        for s in doc.get("scenarios", []):
            s.pop("trials", None)
    if grid is not None:
        doc["grid"] = grid
        for s in doc.get("scenarios", []):
            s.pop("grid", None)
    return doc


def _link(spec: dict) -> LinkParams:
    spec = dict(spec)
    r_max = spec.pop("r_max", None)
    if r_max is not None:
        if len(spec) > 1:
            raise ConfigError("link: give either r_max or the power budget, not both")
        return LinkParams.from_r_max(spec["nu"], r_max)
    return LinkParams(**spec)


def _density(spec: dict, m: int, link: LinkParams) -> DensityModel:
    kind = spec["kind"]
    if kind == "uniform":
        if ("rho" in spec) == ("n_max" in spec):
            raise ConfigError("density: uniform needs exactly one of rho, n_max")
        rho = spec["rho"] if "rho" in spec else spec["n_max"] / (ball_constant(m) * link.r_max**m)
        return DensityModel.uniform(rho)
    if kind == "power_law":
        return DensityModel.power_law(spec.get("rho0", 0.0), spec.get("beta", 0.0), spec.get("r_ref", 1.0))
    return DensityModel.piecewise(spec.get("breakpoints", []), spec.get("levels", []))


def _policy(spec: dict | None) -> CancellationPolicy:
    if spec is None:
        return CancellationPolicy.none()
    kind, k, alpha = spec["kind"], spec.get("k", 1), spec.get("alpha", 0.0)
    if kind == "none":
        return CancellationPolicy.none()
    if kind == "complete":
        return CancellationPolicy.complete(k)
    return CancellationPolicy(kind, k, alpha)


def _fading(spec: dict | None) -> FadingModel:
    if spec is None:
        return FadingModel()
    spec = dict(spec)
    if "sigma_db" in spec:
        if "sigma" in spec:
            raise ConfigError("fading: give sigma or sigma_db, not both")
        spec["sigma"] = sigma_db_to_neper(spec.pop("sigma_db"))
    return FadingModel(**spec)


def _filter(spec: dict | None, base_dir: str) -> FilterModel:
    if spec is None:
        return FilterModel()
    kind = spec["kind"]
    if kind == "isotropic":
        return FilterModel.isotropic()
    if kind == "sector":
        return FilterModel.sector(spec.get("p", 1.0), spec.get("backlobe", 0.0))
    if kind == "cospower":
        return FilterModel.cospower(spec.get("n", 0.0))
    if "table" in spec:
        path = os.path.join(base_dir, spec["table"])
        if not os.path.exists(path):
            raise ConfigError(f"filter: table {path} does not exist")
        return load_table(path)
    return FilterModel.tabulated(spec.get("z", []), spec.get("gain", []), spec.get("weights"))


def build(doc: dict, base_dir: str = ".") -> RunConfig:
    """Validate a document and turn it into scenarios. Raises ConfigError."""
    validate(doc)
    full = {**DEFAULTS, **doc}
    names = [s["name"] for s in doc["scenarios"]]
    if len(set(names)) != len(names):
        raise ConfigError("scenarios: names must be unique")
    out = []
    for i, s in enumerate(doc["scenarios"]):
        where = f"scenarios/{i} ({s['name']})"
        try:
            link = _link(s["link"])
            density = _density(s["density"], s["m"], link)
            grid_doc = s.get("grid", full.get("grid"))
            if grid_doc is None:
                raise ConfigError("no grid given (config 'grid' or --grid)")
            sc = Scenario(
                m=s["m"], params=link, density=density,
                region_multiplier=s.get("region_multiplier", 1.0),
                policy=_policy(s.get("policy")), fading=_fading(s.get("fading")),
                filter=_filter(s.get("filter"), base_dir),
                trials=s.get("trials", full["trials"]), master_seed=full["seed"],
            )
            out.append(NamedScenario(s["name"], sc, grid_values(grid_doc)))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{where}: {exc}") from None
    return RunConfig(doc, out, full["seed"], full["workers"], list(full["epsilon"]), list(full["gamma_db"]))


# -- figure presets ------------------------------------------------------------

def _uniform_scenario(name, nu, r_max=None, rho=None, n_max=None, policy=None, fading=None, **extra):
    m = 2
    if r_max is None:
        raise ValueError("preset needs r_max")
    if rho is None:
        rho = n_max / (math.pi * r_max**m)
    n_bar = rho * math.pi * r_max**m
    s = {
        "name": name,
        "m": m,
        "link": {"nu": nu, "p_t": 1.0, "p_0": r_max ** (-nu), "a_nu": 1.0, "g_t": 1.0, "g_r": 1.0},
        "density": {"kind": "uniform", "rho": rho},
        "region_multiplier": 1.0,
        "policy": policy or {"kind": "none", "k": 1, "alpha": 0.0},
        "fading": fading or {"kind": "none"},
        "filter": {"kind": "isotropic"},
        "derived": {"n_max": n_bar, "r_max": r_max, "d0_db": 10 * (nu / m) * math.log10(n_bar)},
    }
    s.update(extra)
    return s


def preset(name: str) -> dict:
    """Fully resolved configuration document of a figure preset."""
    if name == "fig3":
        # rho = 1e-5, p_0 = 1e-10, p_t = 1: r_max = 1e10 ** (1 / nu)
        return {
            "version": VERSION,
            "description": "outage vs INR, nearest and total interference, nu = 2 and 4, no cancellation",
            "seed": 0, "trials": 1_000_000, "workers": 1,
            "grid": {"start": 0.0, "stop": 70.0, "step": 2.0},
            "epsilon": DEFAULTS["epsilon"], "gamma_db": DEFAULTS["gamma_db"],
            "scenarios": [
                _uniform_scenario("nu4", 4.0, r_max=1e10**0.25, rho=1e-5),
                # about 3e5 interferers per trial: kept to 1e4 trials
                _uniform_scenario("nu2", 2.0, r_max=1e5, rho=1e-5,
                                  grid={"start": 50.0, "stop": 84.0, "step": 2.0}, trials=10_000),
            ],
        }
    if name == "fig4":
        return {
            "version": VERSION,
            "description": "complete vs partial cancellation, nu = 4, m = 2, N_max = 100, R_max = 1e3",
            "seed": 0, "trials": 1_000_000, "workers": 1,
            "grid": {"start": 30.0, "stop": 90.0, "step": 1.0},
            "epsilon": DEFAULTS["epsilon"], "gamma_db": DEFAULTS["gamma_db"],
            "scenarios": [
                _uniform_scenario("k1", 4.0, r_max=1e3, n_max=100.0),
                _uniform_scenario("k2", 4.0, r_max=1e3, n_max=100.0, policy={"kind": "complete", "k": 2, "alpha": 0.0},
                                  grid={"start": 30.0, "stop": 75.0, "step": 1.0}),
                _uniform_scenario("alpha0.1", 4.0, r_max=1e3, n_max=100.0,
                                  policy={"kind": "partial", "k": 2, "alpha": 0.1}),
            ],
        }
    if name == "fig5":
        return {
            "version": VERSION,
            "description": "Rayleigh fading with and without cancellation, nu = 4, m = 2, N_max = 50, R_max = 1e3",
            "seed": 0, "trials": 1_000_000, "workers": 1,
            "grid": {"start": 25.0, "stop": 90.0, "step": 1.0},
            "epsilon": DEFAULTS["epsilon"], "gamma_db": DEFAULTS["gamma_db"],
            "scenarios": [
                _uniform_scenario("k1", 4.0, r_max=1e3, n_max=50.0, fading={"kind": "rayleigh"}),
                _uniform_scenario("k2", 4.0, r_max=1e3, n_max=50.0, fading={"kind": "rayleigh"},
                                  policy={"kind": "complete", "k": 2, "alpha": 0.0},
                                  grid={"start": 25.0, "stop": 70.0, "step": 1.0}),
            ],
        }
    raise ConfigError(f"unknown preset {name!r}; expected fig3, fig4 or fig5")


PRESETS = ("fig3", "fig4", "fig5")
