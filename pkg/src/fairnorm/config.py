"""Flat key = value run configuration with typed known keys.

The file format is one `section.key = value` pair per line; `#` lines
are comments. Every key has a declared type and default. Command-line
flags override file values; the fully resolved configuration is echoed
into each output directory so a run can be reproduced from it alone.
"""

from dataclasses import dataclass, field

from .data import PROTECTED_COLUMNS
from .errors import ConfigError


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("true", "1", "yes"):
        return True
    if t in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int_list(text):
    return tuple(int(p) for p in text.replace(",", " ").split())


_PARSERS = {
    "str": str,
    "int": int,
    "float": float,
    "bool": _parse_bool,
    "int_list": _parse_int_list,
}

# key -> (type name, default)
KNOWN_KEYS = {
    "data.path": ("str", ""),
    "data.protected": ("str", "gender"),
    "data.dump_encoded": ("bool", False),
    "split.train": ("float", 0.6),
    "split.val": ("float", 0.2),
    "split.test": ("float", 0.2),
    "model.hidden": ("int_list", (50, 50, 50)),
    "model.groupmixnorm": ("bool", True),
    "mixnorm.alpha": ("float", 0.1),
    "mixnorm.epsilon": ("float", 1e-5),
    "train.epochs": ("int", 10),
    "train.batch_size": ("int", 1000),
    "train.lr": ("float", 1e-4),
    "train.runs": ("int", 10),
    "eval.threshold": ("float", 0.5),
    "seed": ("int", 0),
    "out": ("str", "runs/out"),
}


@dataclass
class RunConfig:
    """Resolved configuration for one command invocation."""

    values: dict = field(default_factory=dict)

    def __post_init__(self):
        resolved = {k: default for k, (_, default) in KNOWN_KEYS.items()}
        for key, value in self.values.items():
            if key not in KNOWN_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            resolved[key] = value
        self.values = resolved
        if self.values["data.protected"] not in PROTECTED_COLUMNS:
            raise ConfigError(
                f"data.protected must be one of {sorted(PROTECTED_COLUMNS)}"
            )

    def __getitem__(self, key):
        return self.values[key]

    def replaced(self, **overrides):
        mapped = {k.replace("__", "."): v for k, v in overrides.items()}
        return RunConfig({**self.values, **mapped})


def parse_config_text(text, origin="<config>"):
    """Parse key = value lines into a typed mapping."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{origin}: line {lineno}: expected key = value")
        key, _, raw_value = stripped.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{origin}: line {lineno}: unknown config key {key!r}")
        type_name, _ = KNOWN_KEYS[key]
        try:
            out[key] = _PARSERS[type_name](raw_value)
        except ValueError as exc:
            raise ConfigError(
                f"{origin}: line {lineno}: bad value for {key}: {exc}"
            ) from None
    return out


def load_config_file(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    return parse_config_text(text, origin=str(path))


def _render_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def flat_items(cfg):
    """String form of every resolved key, e.g. for checkpoint snapshots."""
    return {key: _render_value(value) for key, value in sorted(cfg.values.items())}


def render_config(cfg):
    """Serialize a RunConfig in the same format parse_config_text reads."""
    lines = [f"{key} = {text}" for key, text in flat_items(cfg).items()]
    return "\n".join(lines) + "\n"
