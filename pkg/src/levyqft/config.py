"""Experiment configuration: YAML file, defaults, overrides and validation.

Every section and key is declared in :data:`DEFAULTS`; anything else is
rejected.  Validation errors are :class:`ConfigError` and map to exit
status 2 in the command line tool.
"""

from __future__ import annotations

import copy
import os
from typing import Any, Mapping

import yaml

from .noise import LevyLaw

CONFIG_ENV = "LEVYQFT_CONFIG"

DEFAULTS: dict[str, Any] = {
    "model": {
        "alpha": 0.25,
        "mass": 1.0,
        "s": 1,
        "law": {"drift": 0.0, "gaussian_var": 1.0, "jump_rate": 0.0, "jumps": {}},
    },
    "lattice": {"extents": [32, 32], "spacings": [1.0, 1.0]},
    "run": {"samples": 20000, "seed": 0, "threads": 1},
    "checks": {
        "moments": {"tuples": 20, "orders": [2, 3, 4], "reach": 3, "z_threshold": 4.0,
                    "batches": 32, "oracle_mass": None},
        "axioms": {"orders": [2, 3, 4], "shell_case": True, "support_points": 1_000_000,
                   "hermiticity_points": 100_000, "boosts": 10, "lorentz_points": 20_000,
                   "positivity_points": 20_000, "positivity_cumulants": [0.5, 1.0, 1.0, 1.0],
                   "mutants": True},
        "wightman": {"n": 3, "points": 5, "continuation_taus": [0.5, 1.0, 2.0, 3.0, 5.0],
                     "continuation_rtol": 1e-3},
        "hsc": {"n": [2, 3], "family_size": 50, "integrability_alphas": [0.1, 0.2, 0.3, 0.4],
                "split_pairs": 20, "m_points": 100_000},
    },
    "output": {"directory": "levyqft-out", "formats": ["json", "csv", "text"]},
}

FORMATS = ("json", "csv", "text")


class ConfigError(ValueError):
    """Invalid configuration (unknown key, wrong type, out-of-range value)."""


def _merge(base: dict, update: Mapping, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in update.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        default = base[key]
        # the law's jump table is free-form; checked by LevyLaw
        if isinstance(default, dict) and where != "model.law.jumps":
            if not isinstance(val, Mapping):
                raise ConfigError(f"{where!r} must be a mapping")
            out[key] = _merge(default, val, where + ".")
        else:
            out[key] = copy.deepcopy(val)
    return out


def _number(cfg, path: str, kind=float, low=None, high=None, low_open=False,
            high_open=False, allowed: str | None = None) -> Any:
    node = cfg
    for part in path.split("."):
        node = node[part]
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(f"{path} must be a number, got {node!r}")
    if kind is int and int(node) != node:
        raise ConfigError(f"{path} must be an integer, got {node!r}")
    val = kind(node)
    bad = (low is not None and (val <= low if low_open else val < low)) or \
          (high is not None and (val >= high if high_open else val > high))
    if bad:
        raise ConfigError(f"{path} = {val} outside the allowed range {allowed}")
    return val


def validate(cfg: dict) -> dict:
    """Check domains and normalise types; returns the config unchanged otherwise."""
    _number(cfg, "model.alpha", low=0.0, high=0.5, low_open=True,
            allowed="(0, 1/2] of the model")
    _number(cfg, "model.mass", low=0.0, low_open=True, allowed="(0, inf)")
    s = _number(cfg, "model.s", int, low=1, allowed="s >= 1")
    try:
        LevyLaw.from_config(cfg["model"]["law"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"model.law: {exc}") from exc
    ext, spc = cfg["lattice"]["extents"], cfg["lattice"]["spacings"]
    if not isinstance(ext, list) or not isinstance(spc, list):
        raise ConfigError("lattice.extents and lattice.spacings must be lists")
    if len(ext) != s + 1 or len(spc) != s + 1:
        raise ConfigError(f"lattice needs s+1 = {s + 1} extents and spacings")
    if any(isinstance(e, bool) or not isinstance(e, int) or e < 2 for e in ext):
        raise ConfigError("lattice.extents must be integers >= 2")
    if any(isinstance(a, bool) or not isinstance(a, (int, float)) or a <= 0 for a in spc):
        raise ConfigError("lattice.spacings must be positive numbers")
    _number(cfg, "run.samples", int, low=1, allowed="samples >= 1")
    _number(cfg, "run.seed", int, low=0, allowed="seed >= 0")
    _number(cfg, "run.threads", int, low=1, allowed="threads >= 1")
    mom = cfg["checks"]["moments"]
    if mom["oracle_mass"] is not None:
        _number(cfg, "checks.moments.oracle_mass", low=0.0, low_open=True, allowed="(0, inf)")
    if not set(mom["orders"]) <= {1, 2, 3, 4, 5, 6}:
        raise ConfigError("checks.moments.orders must lie in 1..6")
    hsc = cfg["checks"]["hsc"]
    if not hsc["n"] or not set(hsc["n"]) <= {2, 3}:
        raise ConfigError("checks.hsc.n must be a non-empty subset of {2, 3}")
    _number(cfg, "checks.hsc.family_size", int, low=1, allowed=">= 1")
    if not set(cfg["checks"]["axioms"]["orders"]) <= {2, 3, 4, 5, 6}:
        raise ConfigError("checks.axioms.orders must lie in 2..6")
    fmts = cfg["output"]["formats"]
    if not isinstance(fmts, list) or not set(fmts) <= set(FORMATS):
        raise ConfigError(f"output.formats must be a subset of {list(FORMATS)}")
    return cfg


def parse_override(text: str) -> tuple[list[str], Any]:
    """``"a.b.c=value"`` with the value parsed as YAML."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key.path=value")
    key, raw = text.split("=", 1)
    return key.strip().split("."), yaml.safe_load(raw)


def _nest(path: list[str], value) -> dict:
    out: Any = value
    for part in reversed(path):
        out = {part: out}
    return out


def load_config(path: str | os.PathLike | None = None, overrides=(), env=None) -> dict:
    """Defaults, then the YAML file (explicit path or ``$LEVYQFT_CONFIG``), then overrides.

    ``overrides`` holds ``(key path list, value)`` pairs.
    """
    env = os.environ if env is None else env
    if path is None:
        path = env.get(CONFIG_ENV) or None
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                data = yaml.safe_load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
        if data is not None:
            if not isinstance(data, Mapping):
                raise ConfigError("config file must hold a mapping at top level")
            cfg = _merge(cfg, data)
    for keys, value in overrides:
        cfg = _merge(cfg, _nest(list(keys), value))
    return validate(cfg)
