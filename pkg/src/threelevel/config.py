"""Run configuration: an INI-style key-value file with a fixed key list.

Schema (version 1)::

    [run]      engine, format, out, seed, workers
    [engine]   omega10, omega20, lam, drive_freq
    [baths]    beta_c, beta_h, g_c_res, g_h_res, g_c_det, g_h_det
    [levels]   dbeta, D_r, D_d          (three "a b" pairs separated by ';')
    [grid]     omega20, lam             ("min max count")
    [closure]  mode, gw_fixed, width_G

Every key is optional; an empty value means "unset" for optional
fields. Unknown sections or keys are rejected.
"""
from __future__ import annotations

import configparser
import hashlib
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .doe import DEFAULT_LEVELS, FactorLevels
from .errors import ConfigError, ThreeLevelError
from .kinetic import ClosureMode, WorkChannelClosure
from .model import BathSpec, EngineSpec
from .sweep import DEFAULT_AXES, ENGINES, Axis

SCHEMA_VERSION = 1
SCHEMA = {
    "run": ("engine", "format", "out", "seed", "workers"),
    "engine": ("omega10", "omega20", "lam", "drive_freq"),
    "baths": ("beta_c", "beta_h", "g_c_res", "g_h_res", "g_c_det", "g_h_det"),
    "levels": ("dbeta", "D_r", "D_d"),
    "grid": ("omega20", "lam"),
    "closure": ("mode", "gw_fixed", "width_G"),
}
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    engine: str = "kinetic"
    fmt: str = "csv"
    out: str = "out"
    seed: int = 0
    workers: int = 1
    spec: EngineSpec = field(default_factory=lambda: EngineSpec(2.6, 0.5))
    baths: BathSpec = field(default_factory=lambda: BathSpec(2.5, 0.5, 2.0, 2.0, 2.0, 2.0))
    levels: FactorLevels = DEFAULT_LEVELS
    axes: tuple = DEFAULT_AXES
    closure: WorkChannelClosure = WorkChannelClosure()

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ConfigError(f"[run] engine: expected one of {ENGINES}, got {self.engine!r}")
        if self.fmt not in FORMATS:
            raise ConfigError(f"[run] format: expected one of {FORMATS}, got {self.fmt!r}")
        if self.workers < 1:
            raise ConfigError("[run] workers: must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("[run] seed: must be an unsigned 64-bit integer")

    def digest(self) -> str:
        """Hash of everything that affects results; the output path is excluded."""
        return hashlib.sha256(emit_config(replace(self, out="")).encode()).hexdigest()[:16]


def _num(x) -> str:
    return repr(float(x))


def _opt(x) -> str:
    return "" if x is None else _num(x)


def emit_config(cfg: RunConfig) -> str:
    lv = cfg.levels
    pairs = lambda levels: "; ".join(f"{_num(a)} {_num(b)}" for a, b in levels)  # noqa: E731
    sections = {
        "run": {
            "engine": cfg.engine, "format": cfg.fmt, "out": cfg.out,
            "seed": str(cfg.seed), "workers": str(cfg.workers),
        },
        "engine": {
            "omega10": _num(cfg.spec.omega10), "omega20": _num(cfg.spec.omega20),
            "lam": _num(cfg.spec.lam), "drive_freq": _opt(cfg.spec.drive_freq),
        },
        "baths": {k: _num(getattr(cfg.baths, k)) for k in SCHEMA["baths"]},
        "levels": {"dbeta": pairs(lv.dbeta), "D_r": pairs(lv.D_r), "D_d": pairs(lv.D_d)},
        "grid": {a.name: f"{_num(a.start)} {_num(a.stop)} {a.count}" for a in cfg.axes},
        "closure": {
            "mode": cfg.closure.mode.value,
            "gw_fixed": _opt(cfg.closure.gw_fixed),
            "width_G": _opt(cfg.closure.width_G),
        },
    }
    lines = [f"# threelevel run configuration, schema {SCHEMA_VERSION}"]
    for name, keys in sections.items():
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {v}".rstrip() for k, v in keys.items())
        lines.append("")
    return "\n".join(lines)


def _line_of(text: str, section: str, key: str) -> int | None:
    current = None
    for no, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[(.+)\]\s*$", line)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"\s*{re.escape(key)}\s*[=:]", line):
            return no
    return None


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case-sensitive (D_r, width_G)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax: {exc}") from None

    def where(section, key):
        line = _line_of(text, section, key)
        return f"line {line}: [{section}] {key}" if line else f"[{section}] {key}"

    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in SCHEMA[section]:
                raise ConfigError(f"{where(section, key)}: unknown key")

    def get(section, key, conv, default):
        if not parser.has_option(section, key):
            return default
        raw = parser.get(section, key).strip()
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{where(section, key)}: {exc}") from None

    def opt_float(raw):
        return None if raw == "" else float(raw)

    def pairs(raw):
        out = tuple(tuple(float(x) for x in chunk.split()) for chunk in raw.split(";"))
        if len(out) != 3 or any(len(p) != 2 for p in out):
            raise ValueError("expected three 'a b' pairs separated by ';'")
        return out

    def axis(name):
        def conv(raw):
            parts = raw.split()
            if len(parts) != 3:
                raise ValueError("expected 'min max count'")
            return Axis(name, float(parts[0]), float(parts[1]), int(parts[2]))
        return conv

    base = base or RunConfig()
    try:
        spec = EngineSpec(
            omega20=get("engine", "omega20", float, base.spec.omega20),
            lam=get("engine", "lam", float, base.spec.lam),
            omega10=get("engine", "omega10", float, base.spec.omega10),
            drive_freq=get("engine", "drive_freq", opt_float, base.spec.drive_freq),
        )
        baths = BathSpec(**{k: get("baths", k, float, getattr(base.baths, k)) for k in SCHEMA["baths"]})
        levels = FactorLevels(
            dbeta=get("levels", "dbeta", pairs, base.levels.dbeta),
            D_r=get("levels", "D_r", pairs, base.levels.D_r),
            D_d=get("levels", "D_d", pairs, base.levels.D_d),
            omega10=spec.omega10,
        )
        axes = (
            get("grid", "omega20", axis("omega20"), base.axes[0]),
            get("grid", "lam", axis("lam"), base.axes[1]),
        )
        closure = WorkChannelClosure(
            mode=get("closure", "mode", ClosureMode, base.closure.mode),
            gw_fixed=get("closure", "gw_fixed", opt_float, base.closure.gw_fixed),
            width_G=get("closure", "width_G", opt_float, base.closure.width_G),
        )
        return RunConfig(
            engine=get("run", "engine", str, base.engine),
            fmt=get("run", "format", str, base.fmt),
            out=get("run", "out", str, base.out),
            seed=get("run", "seed", int, base.seed),
            workers=get("run", "workers", int, base.workers),
            spec=spec, baths=baths, levels=levels, axes=axes, closure=closure,
        )
    except ConfigError:
        raise
    except (ThreeLevelError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def with_grid(cfg: RunConfig, shape: str) -> RunConfig:
    """Apply a ``--grid NxM`` override: N omega20 points by M lam points."""
    m = re.fullmatch(r"(\d+)x(\d+)", shape.strip())
    if not m:
        raise ConfigError(f"--grid: expected NxM, got {shape!r}")
    n, k = int(m.group(1)), int(m.group(2))
    a0, a1 = cfg.axes
    try:
        axes = (Axis(a0.name, a0.start, a0.stop, n), Axis(a1.name, a1.start, a1.stop, k))
    except ValueError as exc:
        raise ConfigError(f"--grid: {exc}") from None
    return replace(cfg, axes=axes)
