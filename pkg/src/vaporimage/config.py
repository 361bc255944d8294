"""Experiment configuration: ``key = value`` lines with unit-suffixed keys.

Lines starting with ``#`` are comments, lists are comma separated. Values
are converted to SI on parsing. Unknown keys are rejected so that a typo
in a unit suffix cannot silently fall back to a default.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

SCENARIOS = ("slit-diffuse", "artificial-diffuse", "image-evolve", "fidelity", "validate")

# key -> factor to SI
_SCALARS = {
    "f_cm": 1e-2,
    "lambda_nm": 1e-9,
    "a_um": 1e-6,
    "w_in_units_of_inv_alpha": 1.0,
    "D_cm2_s": 1e-4,
    "g": 1.0,
    "omega13": 1.0,
    "C": 1.0,
    "relative_floor": 1.0,
    "slit_width_um": 1e-6,
    "h_box_um": 1e-6,
    "h_stroke_um": 1e-6,
    "h_bar_um": 1e-6,
    "h_cross_width_um": 1e-6,
    "h_cross_arm_um": 1e-6,
    "waist_um": 1e-6,
    "pixel_um": 1e-6,
    "tol_commutation": 1.0,
    "tol_dark_leak": 1.0,
    "tol_parseval": 1.0,
    "tol_semigroup": 1.0,
    "tol_mass": 1.0,
    "tol_spectral_green": 1.0,
    "tol_fd_green": 1.0,
}
_STRINGS = {
    "scenario": SCENARIOS,
    "method": ("spectral", "green", "fd"),
    "object": ("single_slit", "dark_wire", "plane_wave", "h_with_cross", "hg_mode", "lg_vortex", "raster_mask"),
    "fidelity_quadrature": ("cell", "midpoint"),
    "pgm_path": None,
}
_PROBE = re.compile(r"^probe_([A-Za-z0-9]+)_um$")

REQUIRED = {
    "slit-diffuse": ("f_cm", "lambda_nm", "a_um", "D_cm2_s", "times_us"),
    "artificial-diffuse": ("f_cm", "lambda_nm", "a_um", "D_cm2_s", "times_us", "w_in_units_of_inv_alpha"),
    "image-evolve": ("f_cm", "lambda_nm", "D_cm2_s", "times_us", "object"),
    "fidelity": ("f_cm", "lambda_nm", "D_cm2_s", "times_us", "object"),
    "validate": (),
}

DEFAULT_TOLERANCES = {
    "commutation": 1e-6,
    "dark_leak": 1e-5,
    "parseval": 1e-10,
    "semigroup": 1e-9,
    "mass": 1e-6,
    "spectral_green": 1e-6,
    "fd_green": 1e-3,
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Parsed configuration in SI units; ``None`` means not given."""

    scenario: Optional[str] = None
    f: Optional[float] = None
    wavelength: Optional[float] = None
    a: Optional[float] = None
    w_inv_alpha: Optional[float] = None
    D: Optional[float] = None
    g: float = 1.0
    omega13: float = 1.0
    C: float = 1.0
    n: Optional[int] = None
    L: Optional[float] = None
    times: Tuple[float, ...] = ()
    method: str = "spectral"
    window: Optional[Tuple[float, float]] = None
    relative_floor: float = 1e-3
    object: Optional[str] = None
    geometry: Dict[str, float] = field(default_factory=dict)
    mode_indices: Tuple[int, int] = (0, 0)
    inverted: bool = False
    pgm_path: Optional[str] = None
    probes: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    fidelity_quadrature: str = "cell"
    fidelity_renormalize: bool = False
    keys: Dict[str, str] = field(default_factory=dict)


def _floats(text: str, where: str) -> List[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{where}: expected comma-separated numbers, got {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise ConfigError(f"{where}: non-finite number")
    return vals


def _bool(text: str, where: str) -> bool:
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{where}: expected a boolean, got {text!r}")


def _apply(cfg: ExperimentConfig, key: str, value: str, where: str) -> None:
    if key in cfg.keys:
        raise ConfigError(f"{where}: duplicate key {key!r} (first set at {cfg.keys[key]})")
    if key in _SCALARS:
        vals = _floats(value, where)
        if len(vals) != 1:
            raise ConfigError(f"{where}: {key} takes one number")
        v = vals[0] * _SCALARS[key]
        if key.startswith("tol_"):
            cfg.tolerances[key[4:]] = v
        elif key.startswith(("h_", "slit_", "waist_", "pixel_")):
            cfg.geometry[key] = v
        else:
            attr = {"f_cm": "f", "lambda_nm": "wavelength", "a_um": "a", "w_in_units_of_inv_alpha": "w_inv_alpha", "D_cm2_s": "D"}.get(key, key)
            setattr(cfg, attr, v)
    elif key in _STRINGS:
        allowed = _STRINGS[key]
        if allowed is not None and value not in allowed:
            raise ConfigError(f"{where}: {key} must be one of {', '.join(allowed)}")
        setattr(cfg, key, value)
    elif key == "n":
        try:
            cfg.n = int(value)
        except ValueError:
            raise ConfigError(f"{where}: n must be an integer") from None
    elif key == "L_um":
        cfg.L = None if value == "auto" else _floats(value, where)[0] * 1e-6
    elif key == "times_us":
        ts = _floats(value, where)
        if any(t < 0 for t in ts):
            raise ConfigError(f"{where}: times must be non-negative")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ConfigError(f"{where}: times must be strictly ascending")
        cfg.times = tuple(t * 1e-6 for t in ts)
    elif key == "window_alphax_over_pi":
        w = _floats(value, where)
        if len(w) != 2 or not w[0] < w[1]:
            raise ConfigError(f"{where}: window needs two ascending numbers")
        cfg.window = (w[0], w[1])
    elif key == "mode_indices":
        w = _floats(value, where)
        if len(w) != 2 or any(int(v) != v for v in w):
            raise ConfigError(f"{where}: mode_indices needs two integers")
        cfg.mode_indices = (int(w[0]), int(w[1]))
    elif key == "inverted":
        cfg.inverted = _bool(value, where)
    elif key == "fidelity_renormalize":
        cfg.fidelity_renormalize = _bool(value, where)
    elif _PROBE.match(key):
        p = _floats(value, where)
        if len(p) != 2:
            raise ConfigError(f"{where}: probe needs x, y")
        cfg.probes[_PROBE.match(key).group(1)] = (p[0] * 1e-6, p[1] * 1e-6)
    else:
        raise ConfigError(f"{where}: unknown key {key!r} (keys carry a unit suffix, e.g. D_cm2_s)")
    cfg.keys[key] = where


def _entries(text: str, label: str) -> Iterable[Tuple[str, str, str]]:
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{label} line {no}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{where}: empty key or value")
        yield key, value, where


def parse_config(text: str, scenario: Optional[str] = None, overrides: Iterable[str] = ()) -> ExperimentConfig:
    """Parse config text, apply ``key=value`` overrides, check required keys.

    ``scenario`` (from the command line) wins over a ``scenario`` key.
    """
    cfg = ExperimentConfig()
    for key, value, where in _entries(text, "config"):
        _apply(cfg, key, value, where)
    for i, ov in enumerate(overrides, 1):
        for key, value, where in _entries(ov, f"override {i}"):
            cfg.keys.pop(key, None)
            _apply(cfg, key, value, where)
    if scenario is not None:
        if scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {scenario!r}")
        cfg.scenario = scenario
    if cfg.scenario is None:
        raise ConfigError("no scenario given")
    missing = [k for k in REQUIRED[cfg.scenario] if k not in cfg.keys]
    if missing:
        raise ConfigError(f"scenario {cfg.scenario} is missing required keys: {', '.join(missing)}")
    if cfg.D is not None and cfg.D < 0:
        raise ConfigError(f"{cfg.keys['D_cm2_s']}: D must be non-negative")
    if cfg.omega13 == 0:
        raise ConfigError(f"{cfg.keys['omega13']}: omega13 must be nonzero")
    for k in ("f", "wavelength", "a"):
        v = getattr(cfg, k)
        if v is not None and v <= 0:
            raise ConfigError(f"{k} must be positive")
    return cfg
