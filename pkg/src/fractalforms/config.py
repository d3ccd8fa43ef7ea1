"""Run configuration: plain-text key=value files plus flag overrides.

Flags win over the file; the file wins over defaults.  Validation happens
once at load so every experiment starts from a checked parameter set.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

from .kinds import (
    SC_LEVEL_CAP,
    SC_RHO_NUMERIC,
    SG_BETA_STAR,
    SG_LEVEL_CAP,
    FractalKind,
    sc_beta_star,
)


class ConfigError(ValueError):
    """Invalid configuration; maps to exit code 2 in the CLI."""


@dataclass(frozen=True)
class RunConfig:
    kind: str = "sg"
    level_cap_sg: int = SG_LEVEL_CAP
    level_cap_sc: int = SC_LEVEL_CAP
    solver_tol: float = 1e-12
    dense_limit: int = 10_000
    beta_grid: tuple[float, ...] = ()
    lam: float = 0.5
    C1: float = 1.0
    C2: float = 1.0
    c: Optional[float] = None
    a: float = 1.0
    samples: int = 100_000
    mc_samples: int = 200_000
    depth_cut: int = 12
    seed: int = 0
    threads: int = 4
    out_dir: str = "runs"
    cache_dir: str = ".fractalforms-cache"

    def fractal_kind(self) -> FractalKind:
        return FractalKind.SG if self.kind == "sg" else FractalKind.SC

    def level_cap(self) -> int:
        return self.level_cap_sg if self.kind == "sg" else self.level_cap_sc

    def beta_star(self) -> float:
        if self.kind == "sg":
            return SG_BETA_STAR
        return sc_beta_star(SC_RHO_NUMERIC)

    def validate(self) -> "RunConfig":
        if self.kind not in ("sg", "sc"):
            raise ConfigError(f"kind must be sg or sc, got {self.kind!r}")
        if not 0.0 < self.lam < 1.0:
            raise ConfigError("lam must be in (0,1)")
        if self.c is not None and not 0.0 < self.c < self.lam:
            raise ConfigError("c must be in (0, lam)")
        if self.C1 <= 0 or self.C2 <= 0:
            raise ConfigError("C1 and C2 must be positive")
        if self.a <= 0:
            raise ConfigError("a must be positive")
        alpha = self.fractal_kind().alpha
        bstar = self.beta_star()
        for b in self.beta_grid:
            if not alpha < b < bstar:
                raise ConfigError(
                    f"beta grid entry {b} outside ({alpha:.6f}, {bstar:.6f})"
                )
        if self.level_cap_sg < 1 or self.level_cap_sc < 1:
            raise ConfigError("level caps must be >= 1")
        if self.solver_tol <= 0 or self.dense_limit < 1:
            raise ConfigError("solver_tol must be positive, dense_limit >= 1")
        if self.samples < 1 or self.mc_samples < 2:
            raise ConfigError("sample budgets must be positive")
        if self.depth_cut < 2:
            raise ConfigError("depth_cut must be >= 2")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        return self


_BOOLISH = {"true": True, "false": False, "1": True, "0": False}


def _parse_value(name: str, raw: str):
    ftypes = {f.name: f.type for f in fields(RunConfig)}
    if name not in ftypes:
        raise ConfigError(f"unknown config key {name!r}")
    raw = raw.strip()
    try:
        if name == "beta_grid":
            if not raw:
                return ()
            return tuple(float(x) for x in raw.split(","))
        if name == "c":
            if raw in ("", "none"):
                return None
            return float(raw)
        if name in ("kind", "out_dir", "cache_dir"):
            return raw
        if name in ("lam", "C1", "C2", "a", "solver_tol"):
            return float(raw)
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name!r}: {raw!r}") from exc


def parse_config_text(text: str) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = line.split("=", 1)
        key = key.strip()
        values[key] = _parse_value(key, raw)
    return RunConfig(**values).validate()


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text())


def serialize_config(cfg: RunConfig) -> str:
    lines = []
    for f in fields(RunConfig):
        v = getattr(cfg, f.name)
        if f.name == "beta_grid":
            v = ",".join(repr(x) for x in v)
        elif f.name == "c":
            v = "none" if v is None else repr(v)
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{f.name}={v}")
    return "\n".join(lines) + "\n"


def config_dict(cfg: RunConfig) -> dict:
    out = {}
    for f in fields(RunConfig):
        v = getattr(cfg, f.name)
        out[f.name] = list(v) if isinstance(v, tuple) else v
    return out


def apply_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    clean = {k: v for k, v in overrides.items() if v is not None}
    if not clean:
        return cfg.validate()
    return replace(cfg, **clean).validate()
