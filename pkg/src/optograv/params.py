"""Physical parameters, validation, derived constants and the two reference presets.

All quantities are SI. Frequencies quoted as ``X/2pi = f`` are stored as the
angular value ``2*pi*f``; rates quoted without the ``/2pi`` (drive coupling,
cavity decay) are stored as given, in s^-1.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from importlib import resources

from scipy import constants as _const

from .errors import ConfigError, ValidationError

TWO_PI = 2.0 * math.pi

# Regime-flag thresholds.
FAR_FIELD_RATIO = 10.0
ADIABATIC_RATIO = 10.0


@dataclass(frozen=True)
class DetuningMode:
    """How the effective detuning is obtained.

    ``FixedDelta`` pins the effective detuning to ``value`` (rad/s) and
    back-computes the drive frequency. ``FromFrequencies`` solves for it from
    ``omega_c``, ``omega_0`` and the radiation-pressure shift.
    """

    kind: str = "FixedDelta"
    value: float | None = 0.0

    def __post_init__(self):
        if self.kind not in ("FixedDelta", "FromFrequencies"):
            raise ConfigError(f"unknown detuning mode {self.kind!r}")
        if self.kind == "FixedDelta" and self.value is None:
            raise ConfigError("FixedDelta mode needs a value")

    @property
    def fixed(self) -> bool:
        return self.kind == "FixedDelta"

    def to_json(self):
        if self.fixed:
            return {"FixedDelta": self.value}
        return "FromFrequencies"

    @classmethod
    def from_json(cls, obj) -> "DetuningMode":
        if obj == "FromFrequencies":
            return cls("FromFrequencies", None)
        if isinstance(obj, dict) and set(obj) == {"FixedDelta"}:
            return cls("FixedDelta", float(obj["FixedDelta"]))
        raise ConfigError(
            f"detuning_mode must be 'FromFrequencies' or {{'FixedDelta': value}}, got {obj!r}"
        )


def fixed_delta(value: float = 0.0) -> DetuningMode:
    return DetuningMode("FixedDelta", float(value))


FROM_FREQUENCIES = DetuningMode("FromFrequencies", None)


@dataclass(frozen=True)
class ParameterSet:
    G: float = _const.G
    hbar: float = _const.hbar
    kB: float = _const.k
    m1: float = 1e-10
    m2: float = 1e-12
    dx: float = 5e-7
    dy: float = 1e-6
    omega_c: float = TWO_PI * 3.7e14
    omega_0: float | None = None
    detuning_mode: DetuningMode = field(default_factory=fixed_delta)
    L: float = 1e-3
    kappa: float = 9e7
    drive_E: float = 6e12
    omega_2: float = TWO_PI * 1e7
    gamma_m: float = TWO_PI * 100.0
    T: float = 300.0

    # convenience -----------------------------------------------------------
    @property
    def chi(self) -> float:
        return self.omega_c / self.L

    def replace(self, **changes) -> "ParameterSet":
        if "Delta" in changes:
            changes["detuning_mode"] = fixed_delta(changes.pop("Delta"))
        return dataclasses.replace(self, **changes)

    # serialization ---------------------------------------------------------
    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.to_json() if isinstance(v, DetuningMode) else v
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ParameterSet":
        if not isinstance(data, dict):
            raise ConfigError("parameter configuration must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown parameter keys: {', '.join(unknown)}")
        kwargs = {}
        for key, value in data.items():
            if key == "detuning_mode":
                kwargs[key] = DetuningMode.from_json(value)
            elif key == "omega_0" and value is None:
                kwargs[key] = None
            else:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ConfigError(f"{key} must be a number, got {value!r}")
                kwargs[key] = float(value)
        return cls(**kwargs)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "ParameterSet":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from None
        return cls.from_dict(data)


def drive_from_power(power: float, kappa: float, omega_0: float, hbar: float = _const.hbar) -> float:
    """Drive coupling rate from laser power, sqrt(2*kappa*P/(hbar*omega_0))."""
    if power < 0 or kappa <= 0 or omega_0 <= 0:
        raise ValidationError(["power must be >= 0 and kappa, omega_0 positive"])
    return math.sqrt(2.0 * kappa * power / (hbar * omega_0))


def load_schema() -> dict:
    text = resources.files("optograv").joinpath("data/params.schema.json").read_text()
    return json.loads(text)


# --------------------------------------------------------------------------
# presets


def preset(name: str) -> ParameterSet:
    """Reference parameter sets: "A" (microgram-scale mirror) and "B" (nanomechanical)."""
    key = name.upper()
    base = ParameterSet(
        m1=1e-10,
        m2=1e-12,
        dx=5e-7,
        dy=1e-6,
        omega_c=TWO_PI * 3.7e14,
        detuning_mode=fixed_delta(0.0),
        L=1e-3,
        kappa=9e7,
        drive_E=6e12,
        omega_2=TWO_PI * 1e7,
        gamma_m=TWO_PI * 100.0,
        T=300.0,
    )
    if key == "A":
        return base
    if key == "B":
        return base.replace(m2=3e-15, dy=1e-8, dx=5e-9)
    raise ConfigError(f"unknown preset {name!r} (expected 'A' or 'B')")


PRESETS = ("A", "B")


# --------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def raise_for_errors(self):
        if self.errors:
            raise ValidationError(self.errors)


_POSITIVE = ("G", "hbar", "kB", "m1", "m2", "dy", "omega_c", "L", "kappa", "omega_2", "gamma_m")


def validate(params: ParameterSet) -> ValidationReport:
    rep = ValidationReport()
    for name in _POSITIVE:
        v = getattr(params, name)
        if not math.isfinite(v):
            rep.errors.append(f"{name} must be finite")
        elif v <= 0:
            rep.errors.append(f"{name} must be positive")
    for name in ("dx", "drive_E", "T"):
        v = getattr(params, name)
        if not math.isfinite(v):
            rep.errors.append(f"{name} must be finite")
        elif v < 0:
            rep.errors.append(f"{name} must be non-negative")

    mode = params.detuning_mode
    if mode.fixed:
        if not math.isfinite(mode.value):
            rep.errors.append("FixedDelta value must be finite")
    elif params.omega_0 is None:
        rep.errors.append("omega_0 is required in FromFrequencies mode")
    elif not math.isfinite(params.omega_0) or params.omega_0 <= 0:
        rep.errors.append("omega_0 must be positive")
    if rep.errors:
        return rep

    if params.T == 0:
        rep.warnings.append("T = 0: zero-temperature mode, thermal factor uses sign(omega)")
    if params.dx > 0 and params.dy / params.dx < FAR_FIELD_RATIO:
        rep.warnings.append(
            f"d_y/d_x = {params.dy / params.dx:.3g}, far-field expansion marginal"
        )
    if params.kappa < params.omega_2:
        rep.warnings.append(
            f"sideband-not-resolved condition kappa>>omega_2 fails (kappa/omega_2 = {params.kappa / params.omega_2:.3g})"
        )
    if params.m1 / params.m2 < ADIABATIC_RATIO:
        rep.warnings.append(
            f"adiabatic condition m1>>m2 fails (m1/m2 = {params.m1 / params.m2:.3g})"
        )
    return rep


# --------------------------------------------------------------------------
# derived constants


@dataclass(frozen=True)
class DerivedConstants:
    chi: float
    mu: float  # hbar/(kB T); inf in zero-temperature mode
    thermal_occupancy: float  # kB T/(hbar omega_2)
    zero_temperature: bool


def derive(params: ParameterSet) -> DerivedConstants:
    chi = params.omega_c / params.L
    if params.T == 0:
        return DerivedConstants(chi, math.inf, 0.0, True)
    mu = params.hbar / (params.kB * params.T)
    occ = params.kB * params.T / (params.hbar * params.omega_2)
    return DerivedConstants(chi, mu, occ, False)
