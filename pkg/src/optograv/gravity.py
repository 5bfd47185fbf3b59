"""Gravitational force on the mirror for each source scenario.

Geometry: the mirror (probe) sits at (x2_bar, d_y, 0); the source branches
sit at (+d_x, 0, 0) (alpha) and (-d_x, 0, 0) (beta). In the semiclassical
scenario the source is the mean density of both branches.

Sign convention: forces are attractive, i.e. the x-force on the probe points
toward the source branch,

    f_gamma = -G*m1*m2*(x2_bar + s_gamma*d_x)/d_y^3,   s_alpha = -1, s_beta = +1,
    f_cl    = -G*m1*m2*x2_bar/d_y^3.

Published far-field expansions sometimes carry the opposite overall sign;
only f**2 enters the variance and the figure of merit.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import NumericalFailure, SingularGeometryError
from .params import ParameterSet

QUAD_TARGET = 1e-6


class Scenario(enum.Enum):
    QUANTUM_ALPHA = "QuantumAlpha"
    QUANTUM_BETA = "QuantumBeta"
    SEMICLASSICAL = "Semiclassical"

    @property
    def s_gamma(self) -> int | None:
        return {"QuantumAlpha": -1, "QuantumBeta": 1}.get(self.value)

    @property
    def short(self) -> str:
        return {"QuantumAlpha": "alpha", "QuantumBeta": "beta", "Semiclassical": "cl"}[self.value]

    @classmethod
    def parse(cls, text: str) -> "Scenario":
        key = text.strip().lower()
        for s in cls:
            if key in (s.value.lower(), s.short, s.name.lower()):
                return s
        raise ValueError(f"unknown scenario {text!r}")


SCENARIOS = tuple(Scenario)


class Provenance(enum.Enum):
    LINEARIZED = "Linearized"
    POINT_MASS_EXACT = "PointMassExact"
    GAUSSIAN_QUADRATURE = "GaussianQuadrature"


@dataclass(frozen=True)
class GravityForce:
    scenario: Scenario | None
    f: float
    provenance: Provenance
    error: float = 0.0


@dataclass(frozen=True)
class WavepacketSpec:
    center: tuple[float, float, float]
    sigma: float
    mass: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("wavepacket sigma must be positive")


def branch_centers(params: ParameterSet) -> dict[Scenario, np.ndarray]:
    return {
        Scenario.QUANTUM_ALPHA: np.array([params.dx, 0.0, 0.0]),
        Scenario.QUANTUM_BETA: np.array([-params.dx, 0.0, 0.0]),
    }


def probe_position(params: ParameterSet, x2_bar: float) -> np.ndarray:
    return np.array([x2_bar, params.dy, 0.0])


def force_linearized(params: ParameterSet, x2_bar: float, scenario: Scenario) -> GravityForce:
    if params.dy == 0:
        raise SingularGeometryError("d_y = 0: probe sits on the source axis")
    k = params.G * params.m1 * params.m2 / params.dy**3
    s = scenario.s_gamma
    offset = x2_bar if s is None else x2_bar + s * params.dx
    return GravityForce(scenario, -k * offset, Provenance.LINEARIZED)


def force_point_exact(params: ParameterSet, probe, source, scenario: Scenario | None = None) -> GravityForce:
    """Exact Newtonian x-force on a point probe (mass m2) from a point source (mass m1)."""
    d = np.asarray(source, float) - np.asarray(probe, float)
    r = math.sqrt(float(d @ d))
    if r == 0.0:
        raise SingularGeometryError("probe and source coincide")
    f = params.G * params.m1 * params.m2 * d[0] / r**3
    return GravityForce(scenario, f, Provenance.POINT_MASS_EXACT)


def scenario_force_set(params: ParameterSet, steady) -> dict[Scenario, GravityForce]:
    x2 = steady.x2_bar if hasattr(steady, "x2_bar") else float(steady)
    return {s: force_linearized(params, x2, s) for s in SCENARIOS}


# --------------------------------------------------------------------------
# quadrature oracles


def _radial_pdf(t):
    # Maxwell (chi, 3 dof) density of |r - c|/sigma for an isotropic Gaussian
    return math.sqrt(2.0 / math.pi) * t * t * math.exp(-0.5 * t * t)


def _shell_kernel(u, t, R):
    # axial attraction per unit shell mass at polar cosine u; lengths in units of sigma
    q = R * R + t * t - 2.0 * R * t * u
    return (R - t * u) / q**1.5


def force_gaussian_quadrature(params: ParameterSet, probe, packet: WavepacketSpec,
                              rtol: float = QUAD_TARGET) -> GravityForce:
    """x-force from an isotropic Gaussian source density, by nested adaptive quadrature.

    Spherical coordinates are centred on the packet with the polar axis toward
    the probe; the integrand is then independent of the azimuth, which
    contributes a factor 2*pi already folded into the normalized density.
    The radial variable is t = |r1 - c|/sigma with the Maxwell weight; the
    range is cut at 14 sigma (tail mass < 1e-40).
    """
    probe = np.asarray(probe, float)
    c = np.asarray(packet.center, float)
    d = c - probe
    R = math.sqrt(float(d @ d)) / packet.sigma
    if R <= 6.0:
        raise ValueError("probe must lie outside 6 sigma of the packet centre")

    def inner(t):
        # roundoff warnings appear only for shells grazing the probe, where the
        # Maxwell weight is < 1e-7; the returned error estimate is still used
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(_shell_kernel, -1.0, 1.0, args=(t, R), epsabs=0.0,
                                      epsrel=1e-10, limit=400)
        return 0.5 * val * _radial_pdf(t), 0.5 * err * _radial_pdf(t)

    errs = []

    def outer(t):
        v, e = inner(t)
        errs.append(e)
        return v

    tmax = 14.0
    pts = [R] if R < tmax else None
    val, err = integrate.quad(outer, 0.0, tmax, points=pts, epsabs=0.0, epsrel=1e-11, limit=400)
    # mean inner error bounds the contribution of inner inaccuracy to the outer integral
    err_tot = err + tmax * (max(errs) if errs else 0.0)
    scale = params.G * packet.mass * params.m2 / packet.sigma**2
    axial = scale * val
    f = axial * d[0] / (R * packet.sigma)
    achieved = err_tot / abs(val) if val else math.inf
    if achieved > rtol:
        raise NumericalFailure(
            f"Gaussian quadrature reached only {achieved:.2e} relative error", achieved=achieved
        )
    return GravityForce(None, f, Provenance.GAUSSIAN_QUADRATURE, abs(f) * achieved)


def force_density_quadrature(params: ParameterSet, probe, packets: list[WavepacketSpec],
                             n_phi: int = 64, rtol: float = QUAD_TARGET) -> GravityForce:
    """x-force from a sum of Gaussian packets treated as a single density.

    Integrates the full mixture in spherical coordinates about the origin with
    the polar axis along x, so no per-packet symmetry is used: radial and polar
    directions are nested adaptive quadratures restricted to the union of the
    packets' 14-sigma supports, the azimuth a periodic trapezoid rule.
    """
    probe = np.asarray(probe, float)
    centers = np.array([pk.center for pk in packets], float)
    sig = np.array([pk.sigma for pk in packets])
    mass = np.array([pk.mass for pk in packets])
    norm = mass / ((2 * math.pi) ** 1.5 * sig**3)
    for c, s in zip(centers, sig):
        if np.linalg.norm(c - probe) <= 6 * s:
            raise ValueError("probe must lie outside 6 sigma of every packet centre")

    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    cphi, sphi = np.cos(phi), np.sin(phi)
    cut = 14.0

    def density_kernel(r, th):
        st_, ct = math.sin(th), math.cos(th)
        x = r * ct
        y = r * st_ * cphi
        z = r * st_ * sphi
        rho = np.zeros(n_phi)
        for c, s, a in zip(centers, sig, norm):
            d2 = (x - c[0]) ** 2 + (y - c[1]) ** 2 + (z - c[2]) ** 2
            rho += a * np.exp(-0.5 * d2 / s**2)
        dx_ = x - probe[0]
        dist = np.sqrt(dx_**2 + (y - probe[1]) ** 2 + (z - probe[2]) ** 2)
        kern = dx_ / dist**3
        return float(np.mean(rho * kern)) * 2 * math.pi * r * r * st_

    # support boxes in (r, theta)
    r_iv, th_iv = [], []
    for c, s in zip(centers, sig):
        rc = float(np.linalg.norm(c))
        r_iv.append((max(0.0, rc - cut * s), rc + cut * s))
        if rc > cut * s:
            thc = math.acos(max(-1.0, min(1.0, c[0] / rc)))
            half = math.asin(min(1.0, cut * s / rc))
            th_iv.append((max(0.0, thc - half), min(math.pi, thc + half)))
        else:
            th_iv.append((0.0, math.pi))
    r_iv = _merge(r_iv)
    th_iv = _merge(th_iv)

    errs = []

    def over_theta(r):
        tot = 0.0
        for lo, hi in th_iv:
            v, e = integrate.quad(lambda th: density_kernel(r, th), lo, hi, epsabs=0.0,
                                  epsrel=1e-11, limit=200)
            tot += v
            errs.append(e)
        return tot

    val, err = 0.0, 0.0
    for lo, hi in r_iv:
        v, e = integrate.quad(over_theta, lo, hi, epsabs=0.0, epsrel=1e-10, limit=200)
        val += v
        err += e
    err += sum(hi - lo for lo, hi in r_iv) * (max(errs) if errs else 0.0)
    f = params.G * params.m2 * val
    achieved = err / abs(val) if val else math.inf
    if achieved > rtol:
        raise NumericalFailure(
            f"mixture quadrature reached only {achieved:.2e} relative error", achieved=achieved
        )
    return GravityForce(None, f, Provenance.GAUSSIAN_QUADRATURE, abs(f) * achieved)


def _merge(intervals):
    out = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def semiclassical_packets(params: ParameterSet, sigma: float | None = None) -> list[WavepacketSpec]:
    """Two half-mass Gaussians at the branch centres (default sigma = d_x/50)."""
    if sigma is None:
        sigma = params.dx / 50.0
    return [
        WavepacketSpec(tuple(c), sigma, 0.5 * params.m1)
        for c in branch_centers(params).values()
    ]
