"""Flat ``key = value`` config files for variance runs.

Blank lines and anything after ``#`` are ignored. Every key can be overridden
from the environment as ``QUADVAR_<KEY>`` with the key upper-cased, e.g.
``QUADVAR_THETA=0.7``. Environment values win over the file.
"""

from __future__ import annotations

import os
from collections.abc import Mapping
from pathlib import Path

from .variance import ExperimentConfig, QuadraticPoly

__all__ = ["ENV_PREFIX", "KEYS", "ConfigSyntaxError", "load_config", "parse_config", "resolve"]

ENV_PREFIX = "QUADVAR_"

# key -> converter; "poly" takes "A, B, C" with half-integers allowed
KEYS = {
    "K": float,
    "theta": float,
    "X": float,
    "poly": QuadraticPoly.parse,
    "psi_l": float,
    "eps": float,
    "eps0": float,
    "eps1": float,
    "eps2": float,
    "c_max": int,
    "tail_tol": float,
    "two_route_tol": float,
}
_CANONICAL = {k.lower(): k for k in KEYS}


class ConfigSyntaxError(ValueError):
    """Malformed line, unknown key or unparsable value. A usage error, not a constraint failure."""


def parse_config(text: str) -> dict[str, str]:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, value = body.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigSyntaxError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        if key.lower() not in _CANONICAL:
            raise ConfigSyntaxError(f"line {lineno}: unknown key {key!r}")
        canon = _CANONICAL[key.lower()]
        if canon in raw:
            raise ConfigSyntaxError(f"line {lineno}: duplicate key {canon!r}")
        raw[canon] = value
    return raw


def resolve(raw: Mapping[str, str], env: Mapping[str, str] | None = None) -> tuple[dict[str, object], dict[str, str]]:
    """Apply environment overrides and convert values.

    Returns the typed values and the source of each ("file" or the env var name).
    """
    env = os.environ if env is None else env
    merged = dict(raw)
    sources = {k: "file" for k in raw}
    for key in KEYS:
        name = ENV_PREFIX + key.upper()
        if name in env:
            merged[key] = env[name]
            sources[key] = name
    typed: dict[str, object] = {}
    for key, value in merged.items():
        try:
            typed[key] = KEYS[key](value)
        except (ValueError, ArithmeticError) as exc:
            raise ConfigSyntaxError(f"{key}: cannot parse {value!r} ({exc})") from None
    return typed, sources


def load_config(path: str | os.PathLike, env: Mapping[str, str] | None = None) -> ExperimentConfig:
    """Read, override and validate. Raises ConfigSyntaxError or variance.ConfigError."""
    typed, _ = resolve(parse_config(Path(path).read_text()), env)
    missing = [k for k in ("K", "theta", "X") if k not in typed]
    if missing:
        raise ConfigSyntaxError(f"missing required keys: {', '.join(missing)}")
    return ExperimentConfig(**typed)
