"""Run configuration: defaults, flat key=value config files, validation."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

WINDOWS = ("sum", "avg")
AGGREGATORS = ("avg", "max", "min")
ASSUMPTIONS = ("always", "binomial", "poisson")
LAMBDA_METHODS = ("full", "degenerate", "literal-degenerate")
EDGE_POLICIES = ("full-only", "partial-start")


@dataclass
class RunConfig:
    entity_csv: Path | None = None
    action_csv: Path | None = None
    output_dir: Path = Path("swagg-out")
    freq_seconds: float = 86400.0
    periods: list[int] = field(default_factory=lambda: [7, 15, 30])
    windows: list[str] = field(default_factory=lambda: list(WINDOWS))
    aggregators: list[str] = field(default_factory=lambda: list(AGGREGATORS))
    assumption: str | None = None
    m_cap: int | None = None
    rho: float = 0.9
    rho_l: float = 0.05
    rho_r: float = 0.95
    ensembles: int = 10
    trees: int = 100
    seed: int = 0
    lambda_method: str = "full"
    edge_policy: str = "full-only"

    def validate(self) -> "RunConfig":
        if not self.periods:
            raise ConfigError("periods must be non-empty")
        if any(int(p) != p or p < 1 for p in self.periods):
            raise ConfigError(f"periods must be positive integers, got {self.periods}")
        self.periods = sorted(set(int(p) for p in self.periods))
        if not 0.0 < self.rho < 1.0:
            raise ConfigError(f"rho must lie in (0, 1), got {self.rho}")
        if not 0.0 < self.rho_l < self.rho_r < 1.0:
            raise ConfigError(f"need 0 < rho_l < rho_r < 1, got {self.rho_l}, {self.rho_r}")
        if self.freq_seconds <= 0:
            raise ConfigError("freq_seconds must be positive")
        for name, allowed in (("windows", WINDOWS), ("aggregators", AGGREGATORS)):
            vals = getattr(self, name)
            bad = [v for v in vals if v not in allowed]
            if bad or not vals:
                raise ConfigError(f"{name} must be a non-empty subset of {allowed}, got {vals}")
            setattr(self, name, [v for v in allowed if v in vals])
        if self.assumption is not None and self.assumption not in ASSUMPTIONS:
            raise ConfigError(f"assumption must be one of {ASSUMPTIONS}")
        if self.m_cap is not None and self.m_cap < 1:
            raise ConfigError("m_cap must be a positive integer")
        if self.ensembles < 1 or self.trees < 1:
            raise ConfigError("ensembles and trees must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.lambda_method not in LAMBDA_METHODS:
            raise ConfigError(f"lambda_method must be one of {LAMBDA_METHODS}")
        if self.edge_policy not in EDGE_POLICIES:
            raise ConfigError(f"edge_policy must be one of {EDGE_POLICIES}")
        return self


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.replace(" ", "").split(",") if t]


def _str_list(text: str) -> list[str]:
    return [t for t in text.replace(" ", "").split(",") if t]


def _optional(conv):
    def parse(text):
        return None if text.strip().lower() in ("", "auto", "none") else conv(text)
    return parse


_PARSERS = {
    "freq_seconds": float,
    "assumption": _optional(lambda s: s.strip().lower()),
    "m_cap": _optional(int),
    "periods": _int_list,
    "windows": _str_list,
    "aggregators": _str_list,
    "rho": float,
    "rho_l": float,
    "rho_r": float,
    "ensembles": int,
    "trees": int,
    "seed": int,
    "lambda_method": str.strip,
    "edge_policy": str.strip,
}


def parse_value(key: str, text: str):
    if key not in _PARSERS:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        return _PARSERS[key](text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc


def read_config_file(path) -> dict:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key] = parse_value(key, value)
    return out


def build_config(file_values: dict | None = None, **overrides) -> RunConfig:
    cfg = RunConfig()
    names = {f.name for f in dataclasses.fields(RunConfig)}
    for source in (file_values or {}, overrides):
        for key, value in source.items():
            if value is None:
                continue
            if key not in names:
                raise ConfigError(f"unknown config key {key!r}")
            setattr(cfg, key, value)
    return cfg.validate()
