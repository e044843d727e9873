"""Experiment configuration: flat ``key = value`` files with optional sections.

Keys before the first section header apply everywhere.  A section named
after a scenario (``[cor:frogs]``) overrides them when that scenario runs.
CLI flags override both.  Keys may use ``-`` or ``_`` interchangeably.

Initial data descriptors::

    delta                       unit vector e_0 at k = 0
    empty                       the zero sequence
    constant(c)                 every entry c·e_0
    perturbed(c[, seed])        constant(c) plus a seeded random window of 16 entries
    window:v0;v1;...            literal window from k = 0, components split by ','
    file:PATH                   a saved lattice state
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ..errors import ConfigError, CoupledSystemError
from ..lattice import LatticeState, load, parse_p
from ..models import ModelSpec

TOP = "__top__"
KEYS = (
    "model", "alpha", "alpha0", "zeta", "p", "n_max", "t_max", "frequencies",
    "out", "threads", "initial", "method", "scenario",
)
PERTURB_WIDTH = 16
PERTURB_SCALE = 0.5

DEFAULTS = {
    "model": "rendezvous",
    "alpha": 0.4,
    "alpha0": 0.25,
    "zeta": 1.0,
    "p": "inf",
    "n_max": 10000,
    "t_max": 10000.0,
    "frequencies": 1024,
    "out": "out",
    "threads": 1,
    "initial": "delta",
    "method": "rk",
}


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelSpec
    p: float = math.inf
    initial: str = "delta"
    n_max: int = 10000
    t_max: float = 10000.0
    frequencies: int = 1024
    out: Path = Path("out")
    threads: int = 1
    method: str = "rk"
    scenario: str = ""

    def __post_init__(self):
        if self.n_max < 16 or self.t_max < 16:
            raise ConfigError("horizon must be at least 16")
        n = self.frequencies
        if n < 2 or n & (n - 1):
            raise ConfigError(f"frequencies must be a power of two, got {n}")
        if self.threads < 1:
            raise ConfigError("threads must be positive")
        if self.method not in ("expm", "rk"):
            raise ConfigError(f"method must be 'expm' or 'rk', got {self.method!r}")

    def initial_state(self) -> LatticeState:
        return parse_initial(self.initial, self.model.build().m, self.p)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


def _norm_key(key: str) -> str:
    return key.strip().replace("-", "_")


def read_config_file(path, section: str = "") -> dict:
    """Flat keys of ``path`` merged with ``[section]`` when present."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    try:
        parser.read_string(f"[{TOP}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    out = {_norm_key(k): v for k, v in parser[TOP].items()}
    if section and parser.has_section(section):
        out.update({_norm_key(k): v for k, v in parser[section].items()})
    unknown = set(out) - set(KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return out


def build_config(values: dict) -> ExperimentConfig:
    """Coerce a merged key map (strings or typed values) into a config."""
    v = dict(DEFAULTS)
    v.update({_norm_key(k): val for k, val in values.items() if val is not None})
    try:
        name = str(v["model"])
        params = {"rendezvous": {"alpha": float(v["alpha"])},
                  "second-order": {"alpha0": float(v["alpha0"])}}.get(name, {"zeta": float(v["zeta"])})
        model = ModelSpec(name, params)
        return ExperimentConfig(
            model=model,
            p=parse_p(v["p"]),
            initial=str(v["initial"]).strip(),
            n_max=int(v["n_max"]),
            t_max=float(v["t_max"]),
            frequencies=int(v["frequencies"]),
            out=Path(v["out"]),
            threads=int(v["threads"]),
            method=str(v["method"]),
            scenario=str(v.get("scenario", "")),
        )
    except CoupledSystemError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


_CALL = re.compile(r"^(\w+)\((.*)\)$")


def _parse_scalar(text: str) -> complex:
    return complex(text.strip().replace(" ", ""))


def parse_initial(desc: str, m: int, p=math.inf) -> LatticeState:
    """Build the initial state described by ``desc`` for dimension ``m``."""
    desc = desc.strip()
    e0 = np.zeros(m, dtype=complex)
    e0[0] = 1.0
    try:
        if desc == "delta":
            return LatticeState.delta(m, p)
        if desc == "empty":
            return LatticeState.zeros(m, p)
        if desc.startswith("window:"):
            rows = [[_parse_scalar(c) for c in row.split(",")] for row in desc[7:].split(";") if row.strip()]
            return LatticeState.from_window(np.array(rows, dtype=complex).reshape(len(rows), m), p=p)
        if desc.startswith("file:"):
            state = load(desc[5:])
            if state.m != m:
                raise ConfigError(f"state file has dimension {state.m}, model needs {m}")
            return state.with_p(p)
        match = _CALL.match(desc)
        if match:
            name, args = match.group(1), [a for a in match.group(2).split(",") if a.strip()]
            c = _parse_scalar(args[0])
            if name == "constant" and len(args) == 1:
                return LatticeState.constant(c * e0, p)
            if name == "perturbed" and len(args) in (1, 2):
                seed = int(args[1]) if len(args) == 2 else 0
                rng = np.random.default_rng(seed)
                window = c * e0 + PERTURB_SCALE * rng.standard_normal((PERTURB_WIDTH, m))
                return LatticeState.from_window(window, left_tail=c * e0, right_tail=c * e0, p=p)
    except CoupledSystemError:
        raise
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"bad initial data {desc!r}: {exc}") from exc
    raise ConfigError(f"unrecognised initial data {desc!r}")
