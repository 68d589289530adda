"""
Run configuration: built-in defaults, then a flat key=value file, then
command-line flags.

The file format is one 'key=value' per line; '#' starts a comment and blank
lines are skipped. Values may be quoted.
"""

import logging
import math
import os
from dataclasses import dataclass, fields, replace
from typing import Optional

from ptsusy.errors import ConfigError, ParameterError
from ptsusy.numerics import default_grid, make_grid
from ptsusy.susy_core import ScarfParams

log = logging.getLogger(__name__)

DEFAULT_N_POINTS = 4001
OUTPUT_FORMATS = ("json", "csv")
TRUE_WORDS = ("1", "true", "yes", "y", "on")
FALSE_WORDS = ("0", "false", "no", "n", "off")

# file key -> RunConfig field
FILE_KEYS = {
    "mu": "mu",
    "lambda": "lam",
    "half_width": "half_width",
    "n_points": "n_points",
    "refine": "refine",
    "output_format": "output_format",
    "output_path": "output_path",
    "allow_mu_eq_lambda": "allow_mu_eq_lambda",
}


@dataclass(frozen=True)
class RunConfig:
    """
    half_width None means 16/|mu|; output_path None means standard output.
    """

    mu: Optional[float] = None
    lam: Optional[float] = None
    half_width: Optional[float] = None
    n_points: int = DEFAULT_N_POINTS
    refine: bool = True
    output_format: str = "json"
    output_path: Optional[str] = None
    allow_mu_eq_lambda: bool = False

    def merged(self, **overrides):
        """
        Copy with every override that is not None applied.
        """
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def params(self):
        if self.mu is None or self.lam is None:
            raise ConfigError("both mu and lambda are required")
        try:
            return ScarfParams(self.mu, self.lam, allow_mu_eq_lambda=self.allow_mu_eq_lambda)
        except ParameterError as err:
            raise ConfigError(str(err)) from err

    def grid(self):
        try:
            if self.half_width is None:
                return default_grid(self.params().mu, self.n_points)
            return make_grid(self.half_width, self.n_points)
        except ParameterError as err:
            raise ConfigError(str(err)) from err

    def validate(self):
        """
        Re-check everything the library would check, as ConfigError.
        """
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError("output_format must be one of {}, got {!r}"
                              .format(", ".join(OUTPUT_FORMATS), self.output_format))
        if self.output_path is not None:
            parent = os.path.dirname(os.path.abspath(self.output_path))
            if not os.path.isdir(parent):
                raise ConfigError("output directory does not exist: {}".format(parent))
        p = self.params()
        g = self.grid()
        log.debug("[*] config ok: mu={} lambda={} L={} n={}".format(p.mu, p.lam, g.half_width, g.n_points))
        return self

    def as_dict(self):
        """
        Resolved values, keyed as in the config file.
        """
        grid = self.grid()
        return {
            "mu": self.mu,
            "lambda": self.lam,
            "half_width": grid.half_width,
            "n_points": grid.n_points,
            "refine": self.refine,
            "output_format": self.output_format,
            "output_path": self.output_path,
            "allow_mu_eq_lambda": self.allow_mu_eq_lambda,
        }


def _parse_float(key, text):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError("{}: not a number: {!r}".format(key, text))
    if not math.isfinite(value):
        raise ConfigError("{}: must be finite, got {!r}".format(key, text))
    return value


def _parse_int(key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError("{}: not an integer: {!r}".format(key, text))


def _parse_bool(key, text):
    word = text.strip().lower()
    if word in TRUE_WORDS:
        return True
    if word in FALSE_WORDS:
        return False
    raise ConfigError("{}: not a flag value: {!r}".format(key, text))


PARSERS = {
    "mu": _parse_float,
    "lam": _parse_float,
    "half_width": _parse_float,
    "n_points": _parse_int,
    "refine": _parse_bool,
    "output_format": lambda key, text: text.strip().lower(),
    "output_path": lambda key, text: text,
    "allow_mu_eq_lambda": _parse_bool,
}


def parse_config_text(text, source="<config>"):
    """
    Parse key=value lines into RunConfig field values.
    """
    values = {}
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("{}:{}: expected key=value, got {!r}".format(source, number, raw.strip()))
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in FILE_KEYS:
            raise ConfigError("{}:{}: unknown key {!r}".format(source, number, key))
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        name = FILE_KEYS[key]
        values[name] = PARSERS[name](key, value)
    return values


def load_config_file(path):
    try:
        with open(path) as f:
            text = f.read()
    except OSError as err:
        raise ConfigError("cannot read config file {}: {}".format(path, err.strerror))
    values = parse_config_text(text, source=path)
    log.debug("[*] loaded {} keys from {}".format(len(values), path))
    return values


def build_config(path=None, **overrides):
    """
    defaults < file at 'path' < overrides (None overrides are ignored).
    """
    known = {f.name for f in fields(RunConfig)}
    unknown = set(overrides) - known
    if unknown:
        raise ConfigError("unknown settings: {}".format(", ".join(sorted(unknown))))
    config = RunConfig()
    if path is not None:
        config = config.merged(**load_config_file(path))
    return config.merged(**overrides)
