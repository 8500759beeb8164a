"""INI-style experiment configuration with strict key checking.

Example::

    [experiment]
    family = ill_conditioned
    sweep = 1, 10, 100, 1000
    n = 500
    m = 400
    rho = 0.1
    snr_db = 60
    trials = 20
    algorithms = amp-sbl, utamp-sbl, oracle
    seed = 0
    workers = 1

    [solver]
    max_iter = 300
    tol = 1e-10
    damping = 1.0
    eps_update = closed_form

    [output]
    dir = out
    plot = yes

Every key is optional; omitted ones take the defaults of
:class:`sblkit.harness.ExperimentConfig`, and ``sweep`` defaults to the
family's standard grid. Unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser
from pathlib import Path

from .errors import ConfigError
from .harness import DEFAULT_SWEEPS, ExperimentConfig


def _floats(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


def _names(text):
    return tuple(v for v in text.replace(",", " ").split())


def _bool(text):
    lowered = text.strip().lower()
    if lowered in ("1", "yes", "true", "on"):
        return True
    if lowered in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# section -> key -> (ExperimentConfig field, parser)
SCHEMA = {
    "experiment": {
        "family": ("family", str.strip),
        "sweep": ("sweep", _floats),
        "n": ("n", int),
        "m": ("m", int),
        "rho": ("rho", float),
        "sigma2_x": ("sigma2_x", float),
        "snr_db": ("snr_db", float),
        "trials": ("trials", int),
        "algorithms": ("algorithms", _names),
        "seed": ("seed", int),
        "workers": ("workers", int),
    },
    "solver": {
        "max_iter": ("max_iter", int),
        "tol": ("tol", float),
        "damping": ("damping", float),
        "eps_update": ("eps_update", str.strip),
    },
    "output": {
        "dir": ("out_dir", str.strip),
        "plot": ("plot", _bool),
    },
}


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from INI text plus keyword overrides."""
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    values = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            name, conv = SCHEMA[section][key]
            try:
                values[name] = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: {exc}") from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    if "sweep" not in values:
        values["sweep"] = DEFAULT_SWEEPS.get(values.get("family", ExperimentConfig.family), (0.0,))
    try:
        return ExperimentConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, **overrides) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, **overrides)
