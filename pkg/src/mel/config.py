"""Run configuration: flat ``key = value`` files or JSON."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .economy import CostFunction, Economy, PayoffMatrix, StrategyProfile
from .errors import ConfigError
from .household import CobbDouglasPih
from .statics import HouseholdEnvironment

FORMATS = ("table", "csv", "json")
_HOUSEHOLD_KEYS = ("t_l", "t_h", "K", "cd_share", "selection", "family")
_KNOWN = {
    "payoffs", "c", "lam", "r", "grid", "ceiling", "n_agents", "horizon",
    "n_replications", "seed", "profile", "format", "precision", "out", *_HOUSEHOLD_KEYS,
}


@dataclass
class RunConfig:
    payoffs: tuple | None = None
    household: dict | None = None
    c: float = 0.25
    lam: float = 1.0
    r: float = 1.0
    grid: tuple | None = None          # (start, step, stop)
    ceiling: float | None = None
    n_agents: int = 10_000
    horizon: float | None = None
    n_replications: int = 8
    seed: int = 0
    profile: tuple | None = None       # (theta_m, theta_w, a_mH, a_mL, a_wH, a_wL)
    format: str = "table"
    precision: int = 4
    out: str | None = None
    extra: dict = field(default_factory=dict)

    def validate(self):
        if (self.payoffs is None) == (self.household is None):
            raise ConfigError("specify exactly one economy source: payoffs or household keys")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.precision < 0:
            raise ConfigError("precision must be non-negative")
        if not (self.lam > 0 and self.r > 0):
            raise ConfigError("lam and r must be positive")
        return self

    @property
    def is_household(self) -> bool:
        return self.household is not None

    def environment(self) -> HouseholdEnvironment:
        if not self.is_household:
            raise ConfigError("this command needs a household economy source")
        h = self.household
        fam = h.get("family", "cobb-douglas")
        if fam != "cobb-douglas":
            raise ConfigError(f"unsupported household family {fam!r}")
        pih = CobbDouglasPih(float(h.get("K", 8.0)), float(h.get("cd_share", 0.6)))
        return HouseholdEnvironment(pih, float(h.get("t_l", 2.0)), self.c, self.lam, self.r,
                                    h.get("selection", "specialize"))

    def t_h(self) -> float:
        if "t_h" not in (self.household or {}):
            raise ConfigError("t_h is required")
        return float(self.household["t_h"])

    def economy(self) -> Economy:
        if self.is_household:
            return self.environment().economy(self.t_h())
        return Economy(PayoffMatrix(*self.payoffs), CostFunction.affine(self.c), self.lam, self.r)

    def strategy(self) -> StrategyProfile | None:
        if self.profile is None:
            return None
        return StrategyProfile(self.profile[0], self.profile[1], tuple(self.profile[2:]))

    def t_grid(self) -> np.ndarray:
        if self.grid is None:
            raise ConfigError("a grid A:STEP:B is required")
        return grid_points(*self.grid)


def parse_grid(text: str) -> tuple:
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be A:STEP:B, got {text!r}")
    try:
        a, s, b = (float(x) for x in parts)
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}") from exc
    if not (s > 0 and b >= a):
        raise ConfigError(f"grid needs STEP > 0 and B >= A, got {text!r}")
    return a, s, b


def grid_points(a, s, b) -> np.ndarray:
    n = int(math.floor((b - a) / s + 1e-9)) + 1
    return np.round(a + s * np.arange(n), 12)


def _floats(v, n=None, name="value"):
    if isinstance(v, str):
        v = [x for x in v.replace(",", " ").split() if x]
    try:
        out = tuple(float(x) for x in (v if isinstance(v, (list, tuple)) else [v]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: expected numbers, got {v!r}") from exc
    if n is not None and len(out) != n:
        raise ConfigError(f"{name}: expected {n} numbers, got {len(out)}")
    return out


def parse_kv(text: str) -> dict:
    out = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value'")
        k, v = (x.strip() for x in line.split("=", 1))
        if k in out:
            raise ConfigError(f"line {ln}: duplicate key {k!r}")
        out[k] = v
    return out


def from_mapping(d: dict) -> RunConfig:
    unknown = set(d) - _KNOWN
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    cfg = RunConfig()
    try:
        if "payoffs" in d:
            cfg.payoffs = _floats(d["payoffs"], 4, "payoffs")
        hh = {k: d[k] for k in _HOUSEHOLD_KEYS if k in d}
        if hh:
            cfg.household = hh
        for k in ("c", "lam", "r"):
            if k in d:
                setattr(cfg, k, float(d[k]))
        if "grid" in d:
            g = d["grid"]
            cfg.grid = parse_grid(g) if isinstance(g, str) else _floats(g, 3, "grid")
        if "ceiling" in d:
            cfg.ceiling = float(d["ceiling"])
        for k in ("n_agents", "n_replications", "seed", "precision"):
            if k in d:
                setattr(cfg, k, int(d[k]))
        if "horizon" in d:
            cfg.horizon = float(d["horizon"])
        if "profile" in d:
            cfg.profile = _floats(d["profile"], 6, "profile")
        if "format" in d:
            cfg.format = str(d["format"])
        if "out" in d:
            cfg.out = str(d["out"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc}") from exc
    if p.suffix == ".json":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{p}: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError(f"{p}: top level must be an object")
    else:
        d = parse_kv(text)
    return from_mapping(d)


def with_overrides(cfg: RunConfig, **kw) -> RunConfig:
    kw = {k: v for k, v in kw.items() if v is not None}
    hh = kw.pop("t_h", None)
    cfg = replace(cfg, **kw)
    if hh is not None:
        cfg.household = dict(cfg.household or {})
        cfg.household["t_h"] = hh
    return cfg
