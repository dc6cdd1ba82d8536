"""JSON run configuration.

Frequencies at this boundary are ``f = omega / 2 pi`` in GHz (or MHz where
the key says so) and times are in microseconds; everything is converted to
rad/s and seconds exactly once, in :meth:`RunConfig.system_params` and
friends.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ConfigError
from .evolution import PropagationSettings
from .hamiltonians import SystemParams, ghz, mhz, solve_resonance
from .operators import HilbertConfig
from .protocols import RamseyConfig

MODELS = ("exact", "effective", "interaction_picture", "ramsey", "dirac")
FRAMES = ("rotating", "lab")
POSTSELECT = ("none", "g", "e", "plus", "minus", "ground", "excited")
FORMATS = ("csv",)


@dataclass(frozen=True)
class RamseySection:
    qubit_detuning_MHz: float = -200.0
    drive_detuning_MHz: float = -200.0
    echo_amplitude_GHz: float | None = None    # null: -Omega_1
    phase_continuous: bool = True
    enabled: bool = True


@dataclass(frozen=True)
class WignerSection:
    time_us: float | None = None      # null: g_eff t = pi
    postselect: str = "none"
    x_min: float = -3.5
    x_max: float = 3.5
    n_points: int = 121
    eval_dim: int | None = None


@dataclass(frozen=True)
class OutputSection:
    path: str | None = None          # null: stdout
    format: str = "csv"


@dataclass(frozen=True)
class RunConfig:
    omega_q_GHz: float = 8.01
    omega_GHz: float = 8.01
    g_GHz: float = 0.02
    omega_1_GHz: float = 8.0
    omega_2_GHz: float | None = 6.6   # null: solved from omega_1 - omega_2 = 2 Omega_1
    Omega_1_GHz: float = 0.7
    Omega_2_GHz: float = 0.0
    phi: float = 0.0
    fock_dim: int = 32
    t_final_us: float = 0.2
    n_times: int = 401
    model: str = "effective"
    frame: str = "rotating"
    dt_ps: float | None = None
    steps_per_period: int = 40
    ramsey: RamseySection = field(default_factory=RamseySection)
    wigner: WignerSection = field(default_factory=WignerSection)
    output: OutputSection = field(default_factory=OutputSection)

    # --- conversions -------------------------------------------------------

    def system_params(self) -> SystemParams:
        omega_1 = ghz(self.omega_1_GHz)
        Omega_1 = ghz(self.Omega_1_GHz)
        omega_2 = solve_resonance(omega_1, Omega_1) if self.omega_2_GHz is None else ghz(self.omega_2_GHz)
        return SystemParams(omega_q=ghz(self.omega_q_GHz), omega=ghz(self.omega_GHz), g=ghz(self.g_GHz),
                            omega_1=omega_1, omega_2=omega_2, Omega_1=Omega_1,
                            Omega_2=ghz(self.Omega_2_GHz), phi=self.phi)

    def hilbert(self) -> HilbertConfig:
        return HilbertConfig(self.fock_dim)

    def settings(self) -> PropagationSettings:
        dt = None if self.dt_ps is None else self.dt_ps * 1e-12
        return PropagationSettings(dt=dt, steps_per_fastest_period=self.steps_per_period)

    def time_grid(self) -> np.ndarray:
        """Times in seconds; a single row when ``t_final_us`` is zero."""
        if self.t_final_us == 0:
            return np.zeros(1)
        return np.linspace(0.0, self.t_final_us * 1e-6, self.n_times)

    def ramsey_config(self) -> RamseyConfig:
        r = self.ramsey
        if not r.enabled:
            return RamseyConfig.disabled()
        amp = None if r.echo_amplitude_GHz is None else ghz(r.echo_amplitude_GHz)
        return RamseyConfig(qubit_detuning=mhz(r.qubit_detuning_MHz), drive_detuning=mhz(r.drive_detuning_MHz),
                            echo_amplitude=amp, phase_continuous=r.phase_continuous)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> RunConfig:
        return dataclasses.replace(self, **changes)


# --- validation --------------------------------------------------------------

_POSITIVE = ("omega_q_GHz", "omega_GHz", "omega_1_GHz", "omega_2_GHz")
_NON_NEGATIVE = ("g_GHz", "Omega_1_GHz", "Omega_2_GHz", "t_final_us")
_SECTIONS = {"ramsey": RamseySection, "wigner": WignerSection, "output": OutputSection}


def _coerce(path: str, value: Any, ftype: str):
    """Check a JSON value against a dataclass annotation string."""
    nullable = "None" in ftype
    if value is None:
        if nullable:
            return None
        raise ConfigError(f"{path}: null is not allowed")
    base = ftype.replace(" | None", "").strip()
    if base == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}")
        return value
    if base == "int":
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return int(value)
    if base == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(f"{path}: must be finite")
        return float(value)
    if base == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    raise ConfigError(f"{path}: unsupported field type {ftype}")    # pragma: no cover


def _build(cls, data: dict, prefix: str = ""):
    if not isinstance(data, dict):
        raise ConfigError(f"{prefix.rstrip('.') or '<root>'}: expected an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"{prefix}{unknown[0]}: unknown key")
    kwargs = {}
    for name, value in data.items():
        path = prefix + name
        if name in _SECTIONS and cls is RunConfig:
            kwargs[name] = _build(_SECTIONS[name], value, path + ".")
        else:
            kwargs[name] = _coerce(path, value, fields[name].type)
    return cls(**kwargs)


def validate(cfg: RunConfig) -> RunConfig:
    for key in _POSITIVE:
        v = getattr(cfg, key)
        if v is not None and not v > 0:
            raise ConfigError(f"{key}: frequency must be positive, got {v}")
    for key in _NON_NEGATIVE:
        v = getattr(cfg, key)
        if v < 0:
            raise ConfigError(f"{key}: must be >= 0, got {v}")
    if cfg.model not in MODELS:
        raise ConfigError(f"model: unknown model {cfg.model!r} (choose from {', '.join(MODELS)})")
    if cfg.frame not in FRAMES:
        raise ConfigError(f"frame: must be one of {', '.join(FRAMES)}")
    if cfg.fock_dim < 2:
        raise ConfigError(f"fock_dim: must be >= 2, got {cfg.fock_dim}")
    if cfg.n_times < 1:
        raise ConfigError("n_times: time grid must be nonempty")
    if cfg.t_final_us > 0 and cfg.n_times < 2:
        raise ConfigError("n_times: need at least 2 points when t_final_us > 0")
    if cfg.dt_ps is not None and not cfg.dt_ps > 0:
        raise ConfigError(f"dt_ps: must be positive, got {cfg.dt_ps}")
    if cfg.steps_per_period < 10:
        raise ConfigError("steps_per_period: must be >= 10")
    if cfg.omega_2_GHz is None:
        try:
            solve_resonance(ghz(cfg.omega_1_GHz), ghz(cfg.Omega_1_GHz))
        except ValueError as exc:
            raise ConfigError(f"omega_2_GHz: {exc}") from exc
    w = cfg.wigner
    if w.postselect not in POSTSELECT:
        raise ConfigError(f"wigner.postselect: must be one of {', '.join(POSTSELECT)}")
    if w.time_us is not None and w.time_us < 0:
        raise ConfigError("wigner.time_us: must be >= 0")
    if not w.x_max > w.x_min:
        raise ConfigError("wigner.x_max: must exceed wigner.x_min")
    if w.n_points < 2:
        raise ConfigError("wigner.n_points: must be >= 2")
    if w.eval_dim is not None and w.eval_dim < cfg.fock_dim:
        raise ConfigError("wigner.eval_dim: must be >= fock_dim")
    if cfg.output.format not in FORMATS:
        raise ConfigError(f"output.format: must be one of {', '.join(FORMATS)}")
    return cfg


def from_dict(data: dict) -> RunConfig:
    return validate(_build(RunConfig, data))


def parse_config(text: str) -> RunConfig:
    """Parse a JSON document; missing keys take their default values."""
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<root>: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return from_dict(data)


def emit_config(cfg: RunConfig, indent: int | None = None) -> str:
    return json.dumps(cfg.to_dict(), indent=indent)


def apply_overrides(data: dict, overrides) -> dict:
    """Apply ``key=value`` strings with dotted paths; values are parsed as JSON when possible."""
    out = json.loads(json.dumps(data))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = out
        parts = key.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"{key}: {part} is not a section")
        node[parts[-1]] = value
    return out
