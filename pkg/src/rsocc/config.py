"""
Flat ``key=value`` configuration files mapped onto the package's dataclasses.

Values are coerced using the type of each field's default; tuple fields take
comma-separated lists. Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

from dataclasses import MISSING, fields
from pathlib import Path

from rsocc.errors import ConfigError

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def read_config(path) -> dict[str, str]:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{n}: empty key")
        out[key] = value
    return out


def _scalar(text: str, like, key: str):
    try:
        if isinstance(like, bool):
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(text)
        if isinstance(like, int):
            return int(text)
        if isinstance(like, float):
            return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {type(like).__name__}") from None
    return text


def coerce(value, default, key: str):
    """Convert a config string to the type of ``default``."""
    if not isinstance(value, str):
        return value
    if isinstance(default, tuple):
        like = default[0] if default else 0.0
        items = [s.strip() for s in value.split(",") if s.strip()]
        return tuple(_scalar(s, like, key) for s in items)
    return _scalar(value, default, key)


def field_defaults(cls) -> dict:
    out = {}
    for f in fields(cls):
        if f.default is not MISSING:
            out[f.name] = f.default
        elif f.default_factory is not MISSING:
            out[f.name] = f.default_factory()
    return out


def build(cls, values: dict, extra_keys=()):
    """Instantiate ``cls`` from string values; unknown keys are errors.

    Keys listed in ``extra_keys`` are accepted and returned separately so a
    caller can route them elsewhere.
    """
    defaults = field_defaults(cls)
    unknown = sorted(set(values) - set(defaults) - set(extra_keys))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    kwargs = {k: coerce(v, defaults[k], k) for k, v in values.items() if k in defaults}
    rest = {k: v for k, v in values.items() if k not in defaults}
    try:
        obj = cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return obj, rest
