"""Flat key=value run configuration.

One `key = value` pair per line; `#` starts a comment.  Lengths accept
multiples of pi ("16pi"), exponents accept "inf", booleans accept
true/false/yes/no/1/0.  Unknown keys are rejected with the full key list so
typos surface immediately.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, fields as dataclass_fields
from pathlib import Path

from .fixed_point import SolverConfig
from .grid import Grid, desk_grid


class ConfigError(ValueError):
    """Malformed configuration; message carries the offending line or key."""


_PI_RE = re.compile(r"^([+-]?[\d.]*(?:[eE][+-]?\d+)?)\s*\*?\s*pi$")


def parse_length(text: str) -> float:
    """A float, or a multiple of pi written like '16pi' or '1.5*pi'."""
    text = text.strip()
    m = _PI_RE.match(text)
    if m:
        factor = m.group(1)
        return (float(factor) if factor not in ("", "+", "-") else float(factor + "1")) * math.pi
    return float(text)


def parse_extended(text: str) -> float:
    text = text.strip().lower()
    if text in ("inf", "infinity"):
        return math.inf
    return float(text)


def parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


@dataclass
class RunConfig:
    """Everything a CLI run needs: solver exponents, grid, data source, output."""

    n: int = 3
    N: int | None = None
    L: float | None = None
    M: int | None = None
    x_max: float | None = None
    p: float = 2.0
    q: float = 2.0
    r: float = 2.0
    tol: float = 1e-10
    max_iter: int = 100
    enforce_smallness: bool = True
    preset: str | None = None
    amplitude: float = 0.5
    perturb: float = 0.0
    a_file: str | None = None
    f_file: str | None = None
    seed: int = 0
    format: str = "csv"
    out: str | None = None

    def grid(self) -> Grid:
        base = desk_grid(self.n)
        return Grid(
            d=self.n - 1,
            N=self.N if self.N is not None else base.N,
            L=self.L if self.L is not None else base.L,
            M=self.M if self.M is not None else base.M,
            x_max=self.x_max if self.x_max is not None else base.x_max,
        )

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            n=self.n,
            p=self.p,
            q=self.q,
            r=self.r,
            tol=self.tol,
            max_iter=self.max_iter,
            enforce_smallness=self.enforce_smallness,
            grid=self.grid(),
        )


_PARSERS = {
    "n": int,
    "N": int,
    "L": parse_length,
    "M": int,
    "x_max": parse_length,
    "p": parse_extended,
    "q": parse_extended,
    "r": parse_extended,
    "tol": float,
    "max_iter": int,
    "enforce_smallness": parse_bool,
    "preset": str,
    "amplitude": float,
    "perturb": float,
    "a_file": str,
    "f_file": str,
    "seed": int,
    "format": str,
    "out": str,
}

assert set(_PARSERS) == {f.name for f in dataclass_fields(RunConfig)}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"{source}:{lineno}: empty key or value in {line.strip()!r}")
        if key in pairs:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def build_run_config(pairs: dict[str, str], source: str = "<config>") -> RunConfig:
    rc = RunConfig()
    for key, value in pairs.items():
        if key not in _PARSERS:
            raise ConfigError(
                f"{source}: unknown key {key!r}; valid keys: {', '.join(sorted(_PARSERS))}"
            )
        try:
            setattr(rc, key, _PARSERS[key](value))
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{source}: bad value for {key}: {value!r} ({exc})") from exc
    if rc.format not in ("csv", "json-lines"):
        raise ConfigError(f"{source}: format must be 'csv' or 'json-lines', got {rc.format!r}")
    return rc


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return build_run_config(parse_config_text(text, str(path)), str(path))
