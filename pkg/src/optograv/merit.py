"""Figure of merit separating quantum from semiclassical gravity.

    Theta(w) = G m1 m2 (Delta^2 + kappa^2) sqrt(d_x (d_x + x2_bar)) / (d_y^3 |D(w)|)

Evaluated against w this peaks at the minimum of |D|, i.e. at the mechanical
resonance; with Delta = 0 and kappa >> omega_2 the peak tends to

    Theta* = G m1 sqrt(d_x (d_x + x2_bar)) / (d_y^3 omega_2 gamma_m)
           ~ G m1 d_x / (d_y^3 omega_2 gamma_m).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gravity import Scenario
from .params import ParameterSet
from .spectrum import D_zero, response_D, variance

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _separation(params: ParameterSet, steady) -> float:
    if params.dx < 0:
        raise ValueError("d_x must be non-negative")
    return math.sqrt(params.dx * (params.dx + steady.x2_bar))


def theta_at(params: ParameterSet, steady, omega, literal_denominator: bool = False):
    """Theta in metres. ``literal_denominator`` uses the constant |D(0)| instead of |D(w)|."""
    p = params
    num = p.G * p.m1 * p.m2 * (steady.Delta**2 + p.kappa**2) * _separation(p, steady) / p.dy**3
    w = np.asarray(omega, dtype=float)
    if literal_denominator:
        den = np.full_like(w, abs(D_zero(p, steady)))
    else:
        den = np.abs(response_D(p, steady, w))
    out = num / den
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class ThetaStar:
    full: float
    simplified: float


def theta_star(params: ParameterSet, steady) -> ThetaStar:
    p = params
    den = p.dy**3 * p.omega_2 * p.gamma_m
    return ThetaStar(
        p.G * p.m1 * _separation(p, steady) / den,
        p.G * p.m1 * p.dx / den,
    )


@dataclass(frozen=True)
class ArgmaxResult:
    omega: float
    theta: float
    multimodal: bool
    n_local_maxima: int


def _golden_max(fn, a, b, rtol=1e-13, max_iter=200):
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if abs(b - a) <= rtol * abs(c + d):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def theta_argmax(params: ParameterSet, steady, omega_range=(1e5, 1e10), n_grid: int = 4001) -> ArgmaxResult:
    """Maximize Theta(w) over a log grid, then refine by golden-section search.

    Since the numerator is constant this is the minimizer of |D(w)|.
    """
    lo, hi = omega_range
    if not 0 < lo < hi:
        raise ValueError("omega_range must be increasing and positive")
    grid = np.geomspace(lo, hi, n_grid)
    vals = theta_at(params, steady, grid)
    i = int(np.argmax(vals))
    interior = (vals[1:-1] > vals[:-2]) & (vals[1:-1] >= vals[2:])
    n_max = int(interior.sum()) + int(vals[0] > vals[1]) + int(vals[-1] > vals[-2])
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, n_grid - 1)]

    def absD2(w):
        D = response_D(params, steady, w)
        return -(D.real**2 + D.imag**2)

    w_best = _golden_max(absD2, a, b)
    return ArgmaxResult(w_best, theta_at(params, steady, w_best), n_max > 1, n_max)


@dataclass
class ThetaResult:
    curve: np.ndarray  # (N, 2): omega, Theta/G
    theta_star_full: float
    theta_star_simplified: float
    argmax_omega: float
    theta_max: float
    multimodal: bool = False
    literal_constant: float = field(default=float("nan"))


def theta_result(params: ParameterSet, steady, omega_range=(1e5, 1e10), n_curve: int = 2001) -> ThetaResult:
    grid = np.geomspace(*omega_range, n_curve)
    curve = np.column_stack([grid, theta_at(params, steady, grid) / params.G])
    star = theta_star(params, steady)
    am = theta_argmax(params, steady, omega_range)
    return ThetaResult(
        curve,
        star.full,
        star.simplified,
        am.omega,
        am.theta,
        am.multimodal,
        theta_at(params, steady, 0.0, literal_denominator=True),
    )


def _sqrt_diff(var0, wa, wb):
    # sqrt(var0 + wa) - sqrt(var0 + wb) without cancellation
    return (wa - wb) / (math.sqrt(var0 + wa) + math.sqrt(var0 + wb))


def variance_difference_diagnostic(params: ParameterSet, steady, forces, report=None) -> dict:
    """Standard-deviation differences implied by the widening, next to Theta(omega_2).

    Reports the per-branch differences (alpha, beta against semiclassical) and
    the branch-averaged one; none of these aggregations reproduces the
    sqrt(d_x (d_x + x2_bar)) structure of Theta, which is why both are shown.
    """
    if report is None:
        report = variance(params, steady, forces)
    var0 = report.var0
    w = report.widening
    wa, wb, wc = (w[Scenario.QUANTUM_ALPHA], w[Scenario.QUANTUM_BETA], w[Scenario.SEMICLASSICAL])
    alpha = _sqrt_diff(var0, wa, wc)
    beta = _sqrt_diff(var0, wb, wc)
    sd = math.sqrt(var0)
    return {
        "theta_at_omega_2": theta_at(params, steady, params.omega_2),
        "per_branch_alpha": alpha,
        "per_branch_beta": beta,
        "branch_averaged": 0.5 * (alpha + beta),
        "first_order_beta": (wb - wc) / (2 * sd),
        "var0": var0,
        "widening_over_var0": max(wa, wb, wc) / var0,
        "var0_dominated": max(wa, wb, wc) < 1e-6 * var0,
    }
