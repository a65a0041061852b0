"""Experiment configuration: YAML sections per module, presets, CLI overrides.

Keys left unset (``null``) are filled from the application presets; anything
set explicitly wins. The resolved mapping is fully explicit, so parsing its own
YAML dump gives it back unchanged.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from typing import Any

import yaml

from . import burgers, nlse
from .optim import BaselineConfig, GridSpec, SgeoConfig

KINDS = ("burgers", "nlse", "landscape")


class ConfigError(ValueError):
    pass


# (type, default); a nested dict is a section
SCHEMA: dict[str, Any] = {
    "experiment": (str, None),
    "seed": (int, 0),
    "out": (str, "results"),
    "optimizer": (str, "sgeo"),
    "estimator": {"mode": (str, "shots"), "shots": (int, 50_000)},
    "ansatz": {"n_qubits": (int, 3), "depth": (int, None)},
    "sgeo": {"sweeps": (int, None), "grid_points": (int, 2048), "refine": (bool, True)},
    "baseline": {"rhobeg": (float, math.pi / 16), "tol": (float, 1e-10), "max_iter": (int, None)},
    "burgers": {
        "preset": (str, "laminar"),
        "nu": (float, None),
        "domain": (list, [-1.0, 1.0]),
        "tau": (float, None),
        "t_final": (float, 1.0),
        "initial": (str, None),
        "fit_tol": (float, 1e-6),
        "fit_sweeps": (int, 40),
        "fit_restarts": (int, 20),
    },
    "nlse": {
        "g": (float, 25.0),
        "V0": (float, 1000.0),
        "domain": (list, [0.0, 1.0]),
        "circuit_mode": (bool, False),
    },
    "landscape": {"problem": (str, "nlse"), "index": (int, 0), "points": (int, 256)},
}

CHOICES = {
    ("optimizer",): ("sgeo", "baseline"),
    ("estimator", "mode"): ("shots", "exact"),
    ("burgers", "preset"): tuple(burgers.PRESETS),
    ("burgers", "initial"): ("square", "sine"),
    ("landscape", "problem"): ("residual", "nlse", "burgers"),
    ("experiment",): KINDS,
}


def _check_type(path: tuple[str, ...], value, typ):
    name = ".".join(path)
    if value is None:
        return None
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name}: expected a number, got {value!r}")
        return float(value)
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        return value
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{name}: expected true/false, got {value!r}")
        return value
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(f"{name}: expected a string, got {value!r}")
        if path in CHOICES and value not in CHOICES[path]:
            raise ConfigError(f"{name}: {value!r} is not one of {list(CHOICES[path])}")
        return value
    if typ is list:
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            raise ConfigError(f"{name}: expected a two-element list, got {value!r}")
        return [_check_type(path, v, float) for v in value]
    raise AssertionError(typ)


def _merge(schema: dict, data: dict, path: tuple[str, ...] = ()) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(f"{'.'.join(path) or 'config'}: expected a mapping")
    for key in data:
        if key not in schema:
            where = ".".join(path + (key,))
            raise ConfigError(f"unknown key {where!r}")
    out = {}
    for key, spec in schema.items():
        if isinstance(spec, dict):
            out[key] = _merge(spec, data.get(key) or {}, path + (key,))
        else:
            typ, default = spec
            raw = data.get(key, copy.deepcopy(default))
            out[key] = _check_type(path + (key,), raw, typ)
    return out


def _fill(section: dict, key: str, value):
    if section.get(key) is None:
        section[key] = value


def _apply_presets(cfg: dict) -> dict:
    kind = cfg["experiment"]
    problem = cfg["landscape"]["problem"] if kind == "landscape" else kind
    n = cfg["ansatz"]["n_qubits"]
    if problem == "burgers":
        pr = burgers.PRESETS[cfg["burgers"]["preset"]]
        _fill(cfg["ansatz"], "depth", pr["depth"].get(n, max(pr["depth"].values())))
        _fill(cfg["sgeo"], "sweeps", pr["sweeps"])
        _fill(cfg["baseline"], "max_iter", pr["max_iter"])
        _fill(cfg["burgers"], "nu", pr["nu"])
        _fill(cfg["burgers"], "initial", pr["initial"])
        a, b = cfg["burgers"]["domain"]
        _fill(cfg["burgers"], "tau", (b - a) / (1 << n) / 10)
    elif problem == "nlse":
        g = cfg["nlse"]["g"]
        depth = nlse.PRESETS.get(g, {}).get(n, 2)
        _fill(cfg["ansatz"], "depth", depth)
        _fill(cfg["sgeo"], "sweeps", 10)
        _fill(cfg["baseline"], "max_iter", 300)
    else:
        _fill(cfg["ansatz"], "depth", 2)
        _fill(cfg["sgeo"], "sweeps", 10)
        _fill(cfg["baseline"], "max_iter", 300)
    # keys irrelevant to this experiment still get concrete values
    pr = burgers.PRESETS[cfg["burgers"]["preset"]]
    _fill(cfg["burgers"], "nu", pr["nu"])
    _fill(cfg["burgers"], "initial", pr["initial"])
    a, b = cfg["burgers"]["domain"]
    _fill(cfg["burgers"], "tau", (b - a) / (1 << n) / 10)
    return cfg


@dataclass
class ExperimentConfig:
    data: dict

    @property
    def kind(self) -> str:
        return self.data["experiment"]

    @property
    def seed(self) -> int:
        return self.data["seed"]

    @property
    def out(self) -> str:
        return self.data["out"]

    def sgeo(self) -> SgeoConfig:
        s = self.data["sgeo"]
        return SgeoConfig(sweeps=s["sweeps"], grid=GridSpec(s["grid_points"]), refine=s["refine"])

    def baseline(self) -> BaselineConfig:
        b = self.data["baseline"]
        return BaselineConfig(rhobeg=b["rhobeg"], tol=b["tol"], max_iterations=b["max_iter"])

    def burgers(self) -> burgers.BurgersConfig:
        d, b = self.data, self.data["burgers"]
        return burgers.BurgersConfig(
            n_qubits=d["ansatz"]["n_qubits"], depth=d["ansatz"]["depth"], nu=b["nu"],
            domain=tuple(b["domain"]), tau=b["tau"], t_final=b["t_final"], initial=b["initial"],
            optimizer=d["optimizer"], sgeo=self.sgeo(), baseline=self.baseline(),
            mode=d["estimator"]["mode"], shots=d["estimator"]["shots"], seed=d["seed"],
            fit_tol=b["fit_tol"], fit_sweeps=b["fit_sweeps"], fit_restarts=b["fit_restarts"],
        )

    def nlse(self) -> nlse.NlseConfig:
        d, s = self.data, self.data["nlse"]
        return nlse.NlseConfig(
            n_qubits=d["ansatz"]["n_qubits"], depth=d["ansatz"]["depth"], g=s["g"], V0=s["V0"],
            domain=tuple(s["domain"]), optimizer=d["optimizer"], sgeo=self.sgeo(),
            baseline=self.baseline(), mode=d["estimator"]["mode"],
            shots=d["estimator"]["shots"], seed=d["seed"], circuit_mode=s["circuit_mode"],
        )

    def dump(self) -> str:
        return yaml.safe_dump(self.data, sort_keys=False)


def _set_path(data: dict, dotted: str, value):
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"{dotted}: parent is not a section")
    node[keys[-1]] = value


def parse_config(text: str = "", kind: str | None = None,
                 overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    """Parse YAML text, apply dotted-key ``overrides`` then presets.

    Raises ``ConfigError`` on unknown keys, type mismatches, or a missing
    experiment kind.
    """
    try:
        data = yaml.safe_load(text) if text and text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping at the top level")
    if kind is not None:
        if data.get("experiment") not in (None, kind):
            raise ConfigError(f"config is for {data['experiment']!r}, not {kind!r}")
        data["experiment"] = kind
    for key, value in (overrides or {}).items():
        if value is not None:
            _set_path(data, key, value)
    cfg = _merge(SCHEMA, data)
    if cfg["experiment"] is None:
        raise ConfigError("missing required field 'experiment'")
    if cfg["estimator"]["shots"] <= 0:
        raise ConfigError("estimator.shots must be positive")
    if cfg["ansatz"]["n_qubits"] < 1:
        raise ConfigError("ansatz.n_qubits must be >= 1")
    return ExperimentConfig(_apply_presets(cfg))
