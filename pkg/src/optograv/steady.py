"""Steady state of the driven cavity and linear stability of the fluctuations.

The mean-field relations are

    a = E/(kappa + i*Delta),   x2 = hbar*chi*|a|^2/(m2*omega_2^2),
    Delta = omega_c - omega_0 - chi*x2.

With a fixed effective detuning they are explicit. With fixed frequencies,
eliminating x2 and |a|^2 leaves a cubic in Delta:

    (Delta0 - Delta)*(kappa^2 + Delta^2) = hbar*chi^2*E^2/(m2*omega_2^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import NumericalFailure
from .params import ParameterSet, validate

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class SteadyState:
    a_bar: complex
    n_photons: float
    x2_bar: float
    Delta: float
    omega_0: float | None
    branch_count: int = 1
    stable: bool = True
    residuals: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "a_bar_re": self.a_bar.real,
            "a_bar_im": self.a_bar.imag,
            "n_photons": self.n_photons,
            "x2_bar": self.x2_bar,
            "Delta": self.Delta,
            "omega_0": self.omega_0,
            "branch_count": self.branch_count,
            "stable": self.stable,
        }


def _state_from_delta(p: ParameterSet, delta: float) -> tuple[complex, float, float]:
    a = p.drive_E / complex(p.kappa, delta)
    n = a.real * a.real + a.imag * a.imag
    x2 = p.hbar * p.chi * n / (p.m2 * p.omega_2**2)
    return a, n, x2


def residuals(p: ParameterSet, st: SteadyState) -> dict:
    """Relative residuals of the three mean-field relations."""
    a_ref = p.drive_E / complex(p.kappa, st.Delta)
    r_a = abs(st.a_bar - a_ref) / max(abs(a_ref), 1e-300)
    x_ref = p.hbar * p.chi * st.n_photons / (p.m2 * p.omega_2**2)
    r_x = abs(st.x2_bar - x_ref) / max(abs(x_ref), 1e-300) if x_ref else abs(st.x2_bar)
    out = {"a_bar": r_a, "x2_bar": r_x}
    if not p.detuning_mode.fixed:
        bare = p.omega_c - p.omega_0
        scale = max(abs(bare), abs(st.Delta), p.kappa)
        out["Delta"] = abs(st.Delta - (bare - p.chi * st.x2_bar)) / scale
    return out


def _cubic_roots(bare: float, kappa: float, K: float) -> tuple[list[float], int]:
    """Real roots of (bare - D)(kappa^2 + D^2) = K, plus the multiplicity-counted branch count.

    Works in units of kappa so the coefficients stay O(1)..O(K/kappa^3).
    """
    d0 = bare / kappa
    k = K / kappa**3
    # z^3 - d0 z^2 + z + (k - d0) = 0
    a, b, c, d = 1.0, -d0, 1.0, k - d0
    terms = (18 * a * b * c * d, -4 * b**3 * d, b * b * c * c, -4 * a * c**3, -27 * a * a * d * d)
    disc = math.fsum(terms)
    three_real = disc >= -1e-12 * max(abs(t) for t in terms)

    def f(z):
        return ((z - d0) * z + 1.0) * z + (k - d0)

    def fp(z):
        return (3.0 * z - 2.0 * d0) * z + 1.0

    raw = np.roots([a, b, c, d])
    if three_real:
        cands = sorted(r.real for r in raw)
    else:
        cands = [min(raw, key=lambda r: abs(r.imag)).real]

    roots = []
    for z in cands:
        for _ in range(100):
            der = fp(z)
            if der == 0.0:
                break
            step = f(z) / der
            z -= step
            if abs(step) <= 1e-16 * max(1.0, abs(z)):
                break
        roots.append(z)
    roots.sort()
    dedup = []
    for z in roots:
        if not dedup or abs(z - dedup[-1]) > 1e-9 * max(1.0, abs(z)):
            dedup.append(z)
    return [z * kappa for z in dedup], 3 if three_real else 1


def solve_steady(params: ParameterSet) -> list[SteadyState]:
    """All steady-state branches, sorted by Delta, each tagged with its stability."""
    validate(params).raise_for_errors()
    p = params
    mode = p.detuning_mode
    if mode.fixed:
        delta = float(mode.value)
        a, n, x2 = _state_from_delta(p, delta)
        omega_0 = p.omega_c - p.chi * x2 - delta
        deltas = [(delta, a, n, x2, omega_0)]
        count = 1
    else:
        bare = p.omega_c - p.omega_0
        K = p.hbar * p.chi**2 * p.drive_E**2 / (p.m2 * p.omega_2**2)
        if K == 0.0:
            roots, count = [bare], 1
        else:
            roots, count = _cubic_roots(bare, p.kappa, K)
        if not roots:
            raise NumericalFailure("steady-state cubic returned no real root")
        deltas = []
        for delta in roots:
            a, n, x2 = _state_from_delta(p, delta)
            deltas.append((delta, a, n, x2, p.omega_0))

    states = []
    for delta, a, n, x2, omega_0 in deltas:
        st = SteadyState(a, n, x2, delta, omega_0, count, True)
        res = residuals(p, st)
        worst = max(res.values())
        if worst >= RESIDUAL_TOL:
            raise NumericalFailure(
                f"steady-state residual {worst:.3g} exceeds {RESIDUAL_TOL:g}", achieved=worst
            )
        stab = stability_check(p, st)
        states.append(
            SteadyState(a, n, x2, delta, omega_0, count, stab.stable, res)
        )
    return states


def select_branch(params: ParameterSet, states: list[SteadyState] | None = None) -> SteadyState:
    """The stable branch nearest the bare detuning (the one reached by a slow drive turn-on)."""
    if states is None:
        states = solve_steady(params)
    if params.detuning_mode.fixed:
        return states[0]
    bare = params.omega_c - params.omega_0
    stable = [s for s in states if s.stable] or states
    return min(stable, key=lambda s: abs(s.Delta - bare))


# --------------------------------------------------------------------------
# linearized dynamics


def drift_matrix(params: ParameterSet, st: SteadyState) -> np.ndarray:
    """Homogeneous drift of (dx2, dp2, Re da, Im da)."""
    p = params
    chi = p.chi
    ar, ai = st.a_bar.real, st.a_bar.imag
    return np.array(
        [
            [0.0, 1.0 / p.m2, 0.0, 0.0],
            [-p.m2 * p.omega_2**2, -p.gamma_m, 2 * p.hbar * chi * ar, 2 * p.hbar * chi * ai],
            [-chi * ai, 0.0, -p.kappa, st.Delta],
            [chi * ar, 0.0, -st.Delta, -p.kappa],
        ]
    )


def characteristic_coefficients(params: ParameterSet, st: SteadyState) -> tuple[float, ...]:
    """Monic quartic det(sI - A), highest power first.

    Equal to -D(i*s)/m2 with D the response denominator.
    """
    p = params
    k2 = p.kappa**2 + st.Delta**2
    w2 = p.omega_2**2
    g = p.gamma_m
    spring = 2 * p.hbar * p.chi**2 * st.n_photons * st.Delta / p.m2
    return (
        1.0,
        2 * p.kappa + g,
        k2 + 2 * p.kappa * g + w2,
        2 * p.kappa * w2 + g * k2,
        k2 * w2 - spring,
    )


def hurwitz_determinants(coeffs) -> list[Fraction]:
    """Leading principal minors of the Hurwitz matrix, computed exactly.

    ``coeffs`` are highest power first with a positive leading coefficient.
    """
    c = [Fraction(x) for x in coeffs]
    n = len(c) - 1

    def a(k):
        return c[k] if 0 <= k <= n else Fraction(0)

    H = [[a(2 * (j + 1) - (i + 1)) for j in range(n)] for i in range(n)]
    return [_det([row[:k] for row in H[:k]]) for k in range(1, n + 1)]


def _det(M) -> Fraction:
    M = [row[:] for row in M]
    n = len(M)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = -det
        det *= M[col][col]
        for r in range(col + 1, n):
            fac = M[r][col] / M[col][col]
            if fac:
                for k in range(col, n):
                    M[r][k] -= fac * M[col][k]
    return det


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    margin: float
    determinants: tuple[float, ...]
    coefficients: tuple[float, ...]


def stability_check(params: ParameterSet, st: SteadyState) -> StabilityReport:
    """Routh-Hurwitz test on the linearized drift.

    The polynomial is rescaled to s = Omega*z with Omega = |a0|^(1/4) before
    forming the determinants, so ``margin`` (the smallest one) is dimensionless.
    """
    coeffs = characteristic_coefficients(params, st)
    n = len(coeffs) - 1
    omega = abs(coeffs[-1]) ** (1.0 / n) if coeffs[-1] != 0 else max(abs(coeffs[1]), 1.0)
    if not math.isfinite(omega) or omega == 0.0:
        omega = 1.0
    scaled = [cf / omega**k for k, cf in enumerate(coeffs)]
    dets = hurwitz_determinants(scaled)
    stable = all(d > 0 for d in dets) and scaled[-1] > 0
    dets_f = tuple(float(d) for d in dets)
    return StabilityReport(stable, min(dets_f), dets_f, tuple(coeffs))
