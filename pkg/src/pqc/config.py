"""Flat ``key=value`` run configuration files.

Blank lines and ``#`` comments are ignored, unknown keys are rejected.
Values are written with ``repr`` so a dumped file re-parses bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Optional

from .operator import NormalizationMode, OperatorConfig
from .pq_core import PQParams


class ConfigError(ValueError):
    pass


BN_RULES = {
    "log-squared": lambda n: math.log(n) ** 2,
    "log10-squared": lambda n: math.log10(n) ** 2,
    "shifted-log-squared": lambda n: math.log(n + 1) ** 2 + 1.0,
}


@dataclass(frozen=True)
class RunConfig:
    p: Optional[float] = None
    q: Optional[float] = None
    n: Optional[int] = None
    m: int = 0
    alpha: int = 0
    beta: int = 0
    bn: Optional[float] = None
    bn_rule: Optional[str] = None
    fn: Optional[str] = None
    lo: float = 0.0
    hi: Optional[float] = None
    resolution: int = 101
    mode: str = NormalizationMode.SUM_NORMALIZED.value
    format: str = "csv"
    out: Optional[str] = None

    def __post_init__(self):
        if self.bn is not None and self.bn_rule is not None:
            raise ConfigError("give either bn or bn_rule, not both")
        if self.bn_rule is not None and self.bn_rule not in BN_RULES:
            raise ConfigError(f"unknown bn_rule {self.bn_rule!r}; use one of {sorted(BN_RULES)}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        NormalizationMode.parse(self.mode)
        if self.resolution < 2:
            raise ConfigError("resolution must be at least 2")

    def resolved_bn(self) -> float:
        if self.bn is not None:
            return self.bn
        if self.bn_rule is not None:
            if self.n is None:
                raise ConfigError("bn_rule needs n")
            return BN_RULES[self.bn_rule](self.n)
        raise ConfigError("missing bn (or bn_rule)")

    def operator_config(self) -> OperatorConfig:
        missing = [k for k in ("p", "q", "n") if getattr(self, k) is None]
        if missing:
            raise ConfigError(f"missing required setting(s): {', '.join(missing)}")
        return OperatorConfig(
            n=self.n, m=self.m, alpha=self.alpha, beta=self.beta, b_n=self.resolved_bn(), params=PQParams(self.p, self.q)
        )

    def grid(self):
        b_n = self.resolved_bn()
        hi = b_n if self.hi is None else self.hi
        if not 0 <= self.lo <= hi <= b_n:
            raise ConfigError(f"grid [{self.lo}, {hi}] must lie inside [0, b_n] = [0, {b_n}]")
        return self.lo, hi, self.resolution

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is not None:
                lines.append(f"{f.name}={value!r}" if isinstance(value, float) else f"{f.name}={value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        kinds = {f.name: f for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep:
                raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
            if key not in kinds:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            values[key] = _convert(key, value)
        return cls(**values)

    def merged(self, **overrides) -> "RunConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


_INTS = {"n", "m", "alpha", "beta", "resolution"}
_FLOATS = {"p", "q", "bn", "lo", "hi"}


def _convert(key, value):
    try:
        if key in _INTS:
            return int(value)
        if key in _FLOATS:
            return float(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r}") from None
    return value


def load(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return RunConfig.from_text(fh.read())
