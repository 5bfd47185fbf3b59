"""Response denominator, position-noise spectrum and position variance of the mirror.

    D(w) = m2*[Delta^2 + (kappa - i w)^2]*[w^2 - omega_2^2 + i gamma_m w]
           + 2 hbar chi^2 |a|^2 Delta

    S0(w) = {2 hbar^2 chi^2 kappa |a|^2 (Delta^2 + kappa^2 + w^2)
             + hbar m2 gamma_m w coth(hbar w / 2 kB T)
               * [(Delta^2 + kappa^2 - w^2)^2 + 4 kappa^2 w^2]} / |D(w)|^2

The thermal factor uses the symmetrized quantum Brownian-motion correlator,
whose classical limit hbar w coth(hbar w/2kBT) -> 2 kB T reproduces
equipartition. The static gravitational force adds a delta(w) term to the
spectrum; it is integrated analytically into the widening
f^2 (Delta^2 + kappa^2)^2 / D(0)^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import ConfigError, NumericalFailure, UnstableSystemError
from .params import ParameterSet, derive
from .steady import SteadyState, stability_check

COTH_SERIES_CUTOFF = 1e-4
THERMAL_MODES = ("quantum", "classical")


def response_D(params: ParameterSet, steady: SteadyState, omega):
    p = params
    w = np.asarray(omega, dtype=float)
    opt = steady.Delta**2 + (p.kappa - 1j * w) ** 2
    mech = w * w - p.omega_2**2 + 1j * p.gamma_m * w
    val = p.m2 * opt * mech + 2 * p.hbar * p.chi**2 * steady.n_photons * steady.Delta
    return val if val.ndim else complex(val)


def D_zero(params: ParameterSet, steady: SteadyState) -> float:
    p = params
    return (
        -p.m2 * (steady.Delta**2 + p.kappa**2) * p.omega_2**2
        + 2 * p.hbar * p.chi**2 * steady.n_photons * steady.Delta
    )


def thermal_factor(params: ParameterSet, omega, mode: str = "quantum"):
    """hbar * w * coth(hbar w / 2 kB T) in J, with its limits.

    ``classical`` replaces it by 2 kB T; zero temperature gives hbar |w|.
    """
    if mode not in THERMAL_MODES:
        raise ConfigError(f"thermal mode must be one of {THERMAL_MODES}")
    w = np.asarray(omega, dtype=float)
    p = params
    if mode == "classical":
        return np.full_like(w, 2 * p.kB * p.T) if w.ndim else 2 * p.kB * p.T
    mu = derive(p).mu
    if math.isinf(mu):
        return p.hbar * np.abs(w)
    x = 0.5 * mu * w
    small = np.abs(x) < COTH_SERIES_CUTOFF
    xs = np.where(small, 1.0, x)
    big = p.hbar * w / np.tanh(xs)
    # w coth(mu w/2) = 2/mu + mu w^2/6 + O(w^4)
    ser = p.hbar * (2.0 / mu + mu * w * w / 6.0)
    out = np.where(small, ser, big)
    return out if out.ndim else float(out)


def spectrum_baseline(params: ParameterSet, steady: SteadyState, omega,
                      thermal: str = "quantum", optical_noise: bool = True):
    """Gravity-free position spectrum S0(w), m^2 s."""
    p = params
    w = np.asarray(omega, dtype=float)
    k2 = steady.Delta**2 + p.kappa**2
    D = response_D(p, steady, w)
    absD2 = D.real**2 + D.imag**2
    mech = p.m2 * p.gamma_m * thermal_factor(p, w, thermal) * ((k2 - w * w) ** 2 + 4 * p.kappa**2 * w * w)
    if optical_noise:
        rad = 2 * p.hbar**2 * p.chi**2 * p.kappa * steady.n_photons * (k2 + w * w)
    else:
        rad = 0.0
    S = (rad + mech) / absD2
    return S if np.ndim(S) else float(S)


def widening(params: ParameterSet, steady: SteadyState, f: float) -> float:
    k2 = steady.Delta**2 + params.kappa**2
    d0 = D_zero(params, steady)
    return f * f * k2 * k2 / (d0 * d0)


@dataclass
class VarianceReport:
    var0: float
    widening: dict = field(default_factory=dict)
    total: dict = field(default_factory=dict)
    quadrature_error: float = 0.0
    tail: float = 0.0

    def to_dict(self) -> dict:
        return {
            "var0": self.var0,
            "widening": {s.value: v for s, v in self.widening.items()},
            "total": {s.value: v for s, v in self.total.items()},
            "quadrature_error": self.quadrature_error,
            "tail": self.tail,
        }


def _breakpoints(params: ParameterSet, steady: SteadyState, omega_max: float) -> list[float]:
    p = params
    g = p.gamma_m
    pts = {0.0, omega_max, p.kappa, abs(steady.Delta)}
    # bare and optical-spring-shifted mechanical resonances
    k2 = steady.Delta**2 + p.kappa**2
    shifted = p.omega_2**2 - 2 * p.hbar * p.chi**2 * steady.n_photons * steady.Delta / (p.m2 * k2)
    centres = {p.omega_2, math.sqrt(max(shifted, 0.0))}
    for c in centres:
        for k in (0.0, 1.0, 3.0, 10.0, 30.0, 100.0, 1000.0):
            pts.add(c + k * g)
            pts.add(c - k * g)
    return sorted(x for x in pts if 0.0 <= x <= omega_max)


def baseline_variance(params: ParameterSet, steady: SteadyState, rtol: float = 1e-9,
                      omega_max: float | None = None, thermal: str = "quantum",
                      optical_noise: bool = True) -> tuple[float, float, float]:
    """(1/2pi) * integral of S0 over the real line: returns (var0, error, tail)."""
    p = params
    if omega_max is None:
        omega_max = 20.0 * max(p.omega_2, p.kappa, abs(steady.Delta))

    def S(w):
        return spectrum_baseline(p, steady, w, thermal, optical_noise)

    pts = _breakpoints(p, steady, omega_max)
    total, err = 0.0, 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi <= lo:
            continue
        v, e = integrate.quad(S, lo, hi, epsabs=0.0, epsrel=rtol, limit=500)
        total += v
        err += e
    # tail beyond omega_max: local power law S ~ w^-n, integral S(W) W/(n-1)
    s1, s2 = S(omega_max), S(1.25 * omega_max)
    n = math.log(s1 / s2) / math.log(1.25) if s1 > 0 and s2 > 0 else 3.0
    n = max(n, 2.0)
    tail = s1 * omega_max / (n - 1.0)
    total += tail
    var0 = total / math.pi  # 2 * (1/2pi) * half-line integral
    error = (err + abs(tail)) / math.pi
    if not math.isfinite(var0) or var0 <= 0:
        raise NumericalFailure("baseline variance quadrature failed", achieved=error)
    if error > 1e-3 * var0:
        raise NumericalFailure(
            f"variance quadrature error {error:.3g} exceeds tolerance", achieved=error
        )
    return var0, error, tail / math.pi


def variance(params: ParameterSet, steady: SteadyState, forces: dict | None = None,
             rtol: float = 1e-9, omega_max: float | None = None, thermal: str = "quantum",
             optical_noise: bool = True) -> VarianceReport:
    """Position variance split into baseline and per-scenario gravitational widening."""
    if not stability_check(params, steady).stable:
        raise UnstableSystemError("linearized dynamics unstable: position variance diverges")
    var0, err, tail = baseline_variance(params, steady, rtol, omega_max, thermal, optical_noise)
    rep = VarianceReport(var0, quadrature_error=err, tail=tail)
    for s, force in (forces or {}).items():
        f = force.f if hasattr(force, "f") else float(force)
        w = widening(params, steady, f)
        rep.widening[s] = w
        rep.total[s] = var0 + w
    return rep


def spectrum_curve(params: ParameterSet, steady: SteadyState, omega, thermal: str = "quantum",
                   optical_noise: bool = True) -> np.ndarray:
    """(N, 2) array of (omega, S0)."""
    w = np.asarray(omega, dtype=float)
    return np.column_stack([w, spectrum_baseline(params, steady, w, thermal, optical_noise)])

