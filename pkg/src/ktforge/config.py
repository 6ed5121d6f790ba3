"""Run configuration: nested dataclasses loaded from a TOML file.

Relative paths in the file resolve against the file's own directory. Unknown
keys are rejected so typos fail loudly.
"""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

try:
    import tomllib  # Python 3.11+
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

from .frontend.model import DEFAULT_EXCLUDES, DEFAULT_INCLUDES

DEFAULT_VIEWS = ("branch", "functional", "exception")


class ConfigError(ValueError):
    pass


@dataclass
class ProjectConfig:
    root: str = "."
    include: list[str] = field(default_factory=lambda: list(DEFAULT_INCLUDES))
    exclude: list[str] = field(default_factory=lambda: list(DEFAULT_EXCLUDES))
    test_include: list[str] = field(default_factory=lambda: ["**/src/test/**/*.java"])


@dataclass
class GatewayConfig:
    backend: str = "live"  # live | replay | record
    base_url: str = "https://api.openai.com/v1"
    model: str = "gpt-4o-mini"
    temperature: float = 1.0
    fixture_dir: str = "fixtures/llm"
    max_in_flight: int = 4
    attempts: int = 3
    timeout_s: float = 120.0


@dataclass
class BuildConfig:
    compile_command: str = ""
    test_command: str = ""
    coverage_report: str = ""  # path template; empty disables coverage collection
    class_path: str = ""
    timeout_s: float = 120.0


@dataclass
class Config:
    project: ProjectConfig = field(default_factory=ProjectConfig)
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    build: BuildConfig = field(default_factory=BuildConfig)
    index_path: str = "kb.jsonl"
    output_dir: str = "out"
    related_top_n: int = 5
    max_usage_traces: int = 3
    repair_cap: int = 5
    views: list[str] = field(default_factory=lambda: list(DEFAULT_VIEWS))
    template_dir: str = ""  # overrides for bundled prompt templates
    workers: int = 0  # 0 means one per processor
    focal_methods: list[str] = field(default_factory=list)
    base_dir: str = field(default=".", metadata={"internal": True})

    def path(self, value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def worker_count(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)

    def validate(self) -> None:
        if self.gateway.backend not in ("live", "replay", "record"):
            raise ConfigError(f"gateway.backend must be live, replay or record, not {self.gateway.backend!r}")
        if self.gateway.temperature < 0:
            raise ConfigError("gateway.temperature must be >= 0")
        for name in ("related_top_n", "max_usage_traces", "repair_cap"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        unknown = [v for v in self.views if v not in DEFAULT_VIEWS]
        if unknown:
            raise ConfigError(f"unknown prompt view(s): {', '.join(unknown)}")


_SECTIONS = {"project": ProjectConfig, "gateway": GatewayConfig, "build": BuildConfig}


def _coerce(cls, data: dict, where: str):
    known = {f.name: f for f in fields(cls) if not f.metadata.get("internal")}
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown config key {where}{key!r}")
        if key in _SECTIONS and cls is Config:
            if not isinstance(value, dict):
                raise ConfigError(f"config key {key!r} must be a table")
            kwargs[key] = _coerce(_SECTIONS[key], value, f"{key}.")
            continue
        default = getattr(cls(), key)
        if isinstance(default, list) and not (isinstance(value, list) and all(isinstance(v, str) for v in value)):
            raise ConfigError(f"config key {where}{key} must be a list of strings")
        if isinstance(default, bool) != isinstance(value, bool):
            raise ConfigError(f"config key {where}{key} has the wrong type")
        if isinstance(default, float) and isinstance(value, int):
            value = float(value)
        if not isinstance(default, list) and type(value) is not type(default):
            raise ConfigError(f"config key {where}{key} must be {type(default).__name__}")
        kwargs[key] = value
    return cls(**kwargs)


def load_config(path: Optional[str | Path]) -> Config:
    if path is None:
        cfg = Config()
        cfg.validate()
        return cfg
    p = Path(path)
    try:
        data = tomllib.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {p}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid config file {p}: {exc}") from exc
    cfg = _coerce(Config, data, "")
    cfg.base_dir = str(p.resolve().parent)
    cfg.validate()
    return cfg


def describe_keys() -> list[tuple[str, Any]]:
    """Every config key with its default, dotted for nested tables."""
    out: list[tuple[str, Any]] = []
    base = Config()
    for f in fields(Config):
        if f.metadata.get("internal"):
            continue
        value = getattr(base, f.name)
        if dataclasses.is_dataclass(value):
            for sub in fields(value):
                out.append((f"{f.name}.{sub.name}", getattr(value, sub.name)))
        else:
            out.append((f.name, value))
    return out
