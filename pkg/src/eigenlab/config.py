"""Experiment configuration files.

A config is an INI-style file of ``key = value`` lines under ``[section]``
headers.  Values stay strings until a subcommand asks for them, which keeps
``parse -> serialize -> parse`` exact.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field

__all__ = ["ConfigError", "ExperimentConfig", "SECTIONS", "REQUIRED"]

_OR_KEYS = frozenset(
    {"kind", "s", "logexp", "log_shift", "t0", "r", "theta_base", "theta_shift",
     "beta_const", "knots", "beta", "gamma"}
)

SECTIONS: dict[str, frozenset[str]] = {
    "or": _OR_KEYS,
    "beta": _OR_KEYS,
    "field": frozenset({"n", "epsilon", "R", "seed"}),
    "norms": frozenset({"kind", "p", "ell", "grid", "oversample"}),
    "schedule": frozenset({"lambdas", "geometric", "m", "svg"}),
    "stress": frozenset({"trials", "seed", "max_prefixes"}),
    "abstract": frozenset({"M", "q", "configs", "seed"}),
    "index": frozenset({"t_max", "lambdas"}),
    "embed": frozenset({"n", "ell", "t_max"}),
    "weyl": frozenset({"n", "lambdas"}),
}

REQUIRED: dict[str, tuple[str, ...]] = {
    "or-index": ("or",),
    "embed-check": ("or", "embed"),
    "weyl": ("weyl",),
    "synth": ("or", "field"),
    "converge": ("or", "field", "norms", "schedule"),
    "stress": ("or", "field", "norms", "stress"),
    "abstract": ("abstract",),
}
_MISSING = object()


class ConfigError(ValueError):
    """Malformed or incomplete configuration."""


@dataclass
class ExperimentConfig:
    sections: dict[str, dict[str, str]] = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None, default_section="\x00")
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from exc
        out: dict[str, dict[str, str]] = {}
        for name in cp.sections():
            if name not in SECTIONS:
                raise ConfigError(f"unknown section [{name}]")
            keys = dict(cp[name])
            unknown = set(keys) - SECTIONS[name]
            if unknown:
                raise ConfigError(f"unknown keys in [{name}]: {', '.join(sorted(unknown))}")
            out[name] = {k: v.strip() for k, v in keys.items()}
        return cls(out)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.parse(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc

    def serialize(self) -> str:
        buf = io.StringIO()
        for name in sorted(self.sections):
            buf.write(f"[{name}]\n")
            for k in sorted(self.sections[name]):
                buf.write(f"{k} = {self.sections[name][k]}\n")
            buf.write("\n")
        return buf.getvalue()

    def require(self, subcommand: str) -> None:
        if subcommand not in REQUIRED:
            raise ConfigError(f"unknown subcommand {subcommand!r}")
        missing = [s for s in REQUIRED[subcommand] if s not in self.sections]
        if missing:
            raise ConfigError(f"{subcommand} needs section(s) {', '.join(missing)}")

    def override_seed(self, seed: int) -> None:
        for name in ("field", "stress", "abstract"):
            if name in self.sections:
                self.sections[name]["seed"] = str(seed)

    # typed accessors -------------------------------------------------------

    def _raw(self, section: str, key: str, default):
        sec = self.sections.get(section, {})
        if key not in sec:
            if default is _MISSING:
                raise ConfigError(f"missing key {key} in [{section}]")
            return None if default is None else str(default)
        return sec[key]

    def get_int(self, section: str, key: str, default=_MISSING, lo=None, hi=None):
        raw = self._raw(section, key, default)
        if raw is None:
            return None
        try:
            val = int(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} must be an integer, got {raw!r}") from exc
        _check_range(section, key, val, lo, hi)
        return val

    def get_float(self, section: str, key: str, default=_MISSING, lo=None, hi=None):
        raw = self._raw(section, key, default)
        if raw is None:
            return None
        try:
            val = float(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} must be a number, got {raw!r}") from exc
        if math.isnan(val):
            raise ConfigError(f"[{section}] {key} is NaN")
        _check_range(section, key, val, lo, hi)
        return val

    def get_floats(self, section: str, key: str, default=_MISSING) -> list[float] | None:
        raw = self._raw(section, key, default)
        if raw is None:
            return None
        try:
            return [float(x) for x in raw.split(",") if x.strip()]
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} must be a comma list of numbers") from exc

    def get_bool(self, section: str, key: str, default: bool = False) -> bool:
        raw = self.sections.get(section, {}).get(key)
        if raw is None:
            return default
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"[{section}] {key} must be a boolean, got {raw!r}")

    def get_str(self, section: str, key: str, default=_MISSING) -> str | None:
        return self._raw(section, key, default)


def _check_range(section, key, val, lo, hi):
    if lo is not None and val < lo:
        raise ConfigError(f"[{section}] {key} = {val} is below {lo}")
    if hi is not None and val > hi:
        raise ConfigError(f"[{section}] {key} = {val} is above {hi}")
