"""Run configuration: defaults, flat ``key=value`` files, validation."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping

from .propagation import VARIANTS


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    K: float = 0.1
    sigma: float = 0.35
    m: int = 8
    n: int = 8
    # desk-scale corpora hold hundreds of documents per entity, not millions
    N: int = 50
    k: int = 1
    candidate_cap: int = 30
    session_gap_seconds: int = 1800
    variant: str = "indicator"
    topic_T: int = 32

    def __post_init__(self):
        checks = [
            (self.K >= 0, "K must be >= 0"),
            (0.0 <= self.sigma <= 1.0, "sigma must lie in [0, 1]"),
            (self.m >= 1, "m must be >= 1"),
            (self.n >= 1, "n must be >= 1"),
            (self.N >= 1, "N must be >= 1"),
            (self.k >= 1, "k must be >= 1"),
            (self.candidate_cap >= 1, "candidate_cap must be >= 1"),
            (self.session_gap_seconds > 0, "session_gap_seconds must be > 0"),
            (self.variant in VARIANTS, f"variant must be one of {VARIANTS}"),
            (self.topic_T >= 1, "topic_T must be >= 1"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)

    def updated(self, values: Mapping[str, Any]) -> "Config":
        """Copy with string or typed overrides applied; ``None`` values are skipped."""
        types = {f.name: f.type for f in fields(self)}
        out = {}
        for key, raw in values.items():
            if raw is None:
                continue
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            conv = {"float": float, "int": int, "str": str}[types[key]]
            try:
                out[key] = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        return replace(self, **out)

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


def parse_config_text(text: str) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value")
        values[key.strip()] = value.strip()
    return values


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> Config:
    """Defaults, then the file at ``path``, then ``overrides``."""
    cfg = Config()
    if path:
        cfg = cfg.updated(parse_config_text(Path(path).read_text(encoding="utf-8")))
    if overrides:
        cfg = cfg.updated(overrides)
    return cfg
