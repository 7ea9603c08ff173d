"""Flat key=value configuration files with list syntax ``[a, b, c]``.

Every key can also be overridden on the command line as ``key=value``.
Values parse as int, then float, then bool, then bare string; a bracketed
list parses element-wise.
"""

from __future__ import annotations

from .errors import ConfigError

Scalar = int | float | bool | str
Value = Scalar | list[Scalar]


def parse_scalar(text: str) -> Scalar:
    s = text.strip()
    if s == "":
        raise ConfigError("empty value")
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        pass
    if s.lower() in ("true", "false"):
        return s.lower() == "true"
    return s


def parse_value(text: str) -> Value:
    s = text.strip()
    if s.startswith("[") and s.endswith("]"):
        inner = s[1:-1].strip()
        if not inner:
            return []
        return [parse_scalar(part) for part in inner.split(",")]
    return parse_scalar(s)


def format_value(value: Value) -> str:
    if isinstance(value, list):
        return "[" + ", ".join(format_scalar(v) for v in value) + "]"
    return format_scalar(value)


def format_scalar(value: Scalar) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def load_config(path: str) -> dict[str, Value]:
    out: dict[str, Value] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, _, val = line.partition("=")
                key = key.strip()
                if not key:
                    raise ConfigError(f"{path}:{lineno}: empty key")
                try:
                    out[key] = parse_value(val)
                except ConfigError as exc:
                    raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return out


def apply_overrides(cfg: dict[str, Value], overrides: list[str]) -> dict[str, Value]:
    out = dict(cfg)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, _, val = item.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"override {item!r} has an empty key")
        out[key] = parse_value(val)
    return out


def resolve(
    defaults: dict[str, Value], cfg: dict[str, Value], experiment: str
) -> dict[str, Value]:
    """Merge user config into defaults, rejecting unknown keys."""
    out = dict(defaults)
    for key, value in cfg.items():
        if key not in defaults:
            known = ", ".join(sorted(defaults))
            raise ConfigError(
                f"unknown key {key!r} for experiment {experiment!r} (known: {known})"
            )
        out[key] = value
    return out


def as_float(cfg: dict[str, Value], key: str) -> float:
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"key {key!r} must be a number, got {v!r}")
    return float(v)


def as_int(cfg: dict[str, Value], key: str) -> int:
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"key {key!r} must be an integer, got {v!r}")
    return v


def as_float_list(cfg: dict[str, Value], key: str) -> list[float]:
    v = cfg[key]
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return [float(v)]
    if isinstance(v, list) and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
    ):
        return [float(x) for x in v]
    raise ConfigError(f"key {key!r} must be a number or list of numbers, got {v!r}")
