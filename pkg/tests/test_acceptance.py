"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (shown in pytest's terminal summary) and
then asserts the criterion at its stated tolerance. Run on its own with

    python3 -m pytest tests/test_acceptance.py -v
"""
import math
import time

import numpy as np
import pytest

from optograv.errors import UnstableSystemError
from optograv.gravity import (
    Scenario,
    WavepacketSpec,
    branch_centers,
    force_density_quadrature,
    force_gaussian_quadrature,
    force_linearized,
    force_point_exact,
    probe_position,
    semiclassical_packets,
)
from optograv.langevin import SimConfig, simulate, validate_against_frequency_domain
from optograv.merit import theta_argmax, theta_at, theta_star
from optograv.params import ParameterSet, fixed_delta, preset
from optograv.spectrum import D_zero, baseline_variance, response_D, spectrum_baseline, variance, widening
from optograv.steady import select_branch, solve_steady, stability_check
from optograv.sweep import X2_TARGETS, synthetic_sideband_set

from conftest import record


def test_1_theta_star_reproduction():
    t0 = time.perf_counter()
    vals = {}
    for name, target in (("A", 1.3e-9), ("B", 1.3e-5)):
        p = preset(name)
        vals[name] = (theta_star(p, select_branch(p)).simplified / p.G, target)
    elapsed = time.perf_counter() - t0
    errs = {k: abs(v / t - 1) for k, (v, t) in vals.items()}
    ok = all(e <= 0.05 for e in errs.values()) and elapsed < 1.0
    record("1. Theta* reproduction", ok,
           f"A {vals['A'][0]:.5g} (err {errs['A']:.3%}), B {vals['B'][0]:.5g} (err {errs['B']:.3%}), "
           f"{elapsed:.3f} s")
    assert ok


def test_2_figure_replication():
    t0 = time.perf_counter()
    parts = []
    ok = True
    for name in ("A", "B"):
        p = preset(name)
        s = select_branch(p)
        am = theta_argmax(p, s, (1e5, 1e10))
        err = abs(am.omega / p.omega_2 - 1)
        ok &= err <= 1e-6
        parts.append(f"argmax {name} rel err {err:.2g}")
    p = preset("A")
    s = select_branch(p)
    ratio_a = theta_argmax(p, s).theta / theta_star(p, s).full
    ok_a = abs(ratio_a - 1) <= 0.05
    parts.append(f"A max/Theta*_full {ratio_a:.5f} (needs 5%)")
    q = synthetic_sideband_set()
    sq = select_branch(q)
    ratio_s = theta_argmax(q, sq).theta / theta_star(q, sq).full
    ok_s = abs(ratio_s - 1) <= 1e-3
    parts.append(f"kappa=1e3 omega_2 max/Theta*_full {ratio_s:.7f}")
    elapsed = time.perf_counter() - t0
    parts.append(f"{elapsed:.2f} s")
    ok = ok and ok_a and ok_s and elapsed < 10.0
    if not ok_a:
        parts.append("A limited by kappa^2/(kappa^2+omega_2^2) = "
                     f"{p.kappa**2 / (p.kappa**2 + p.omega_2**2):.5f}")
    record("2. Figure replication", ok, "; ".join(parts))
    assert ok


def test_3_x2_estimate():
    parts, ok = [], True
    for name, target in X2_TARGETS.items():
        p = preset(name)
        x = select_branch(p).x2_bar
        ratio = target / x
        ok &= 1 / 3 <= ratio <= 3
        parts.append(f"{name}: {x:.4g} m vs {target:.2g} m, convention gap {ratio:.3f}x")
    print("\n".join(parts))
    record("3. x2 estimate", ok, "; ".join(parts))
    assert ok


def test_4_equipartition():
    p = preset("A").replace(drive_E=0.0)
    occ = p.kB * p.T / (p.hbar * p.omega_2)
    assert occ >= 100
    s = select_branch(p)
    var0, _, _ = baseline_variance(p, s)
    target = p.kB * p.T / (p.m2 * p.omega_2**2)
    err = abs(var0 / target - 1)
    ok = err <= 0.01
    record("4. Equipartition", ok, f"var0/(kB T/m2 omega_2^2) - 1 = {var0 / target - 1:.3g} at occupancy {occ:.3g}")
    assert ok


def _linearization_error(ratio):
    p = preset("A").replace(dx=ratio * 1e-6, dy=1e-6)
    s = select_branch(p)
    probe = probe_position(p, s.x2_bar)
    errs = []
    for sc, c in branch_centers(p).items():
        lin = force_linearized(p, s.x2_bar, sc).f
        exact = force_point_exact(p, probe, c, sc).f
        errs.append(abs(lin / exact - 1))
    return max(errs)


def test_5_gravity_oracles():
    e2, e3 = _linearization_error(1e-2), _linearization_error(1e-3)
    order = math.log10(e2 / e3)
    ok_lin = e2 <= 1e-4
    ok_shrink = e3 / e2 <= 0.1  # at least proportional to d_x/d_y

    p = preset("A").replace(dx=1e-8, dy=1e-6)
    s = select_branch(p)
    probe = probe_position(p, s.x2_bar)
    q_err = 0.0
    for sc, c in branch_centers(p).items():
        q = force_gaussian_quadrature(p, probe, WavepacketSpec(tuple(c), 1e-4 * p.dy, p.m1))
        exact = force_point_exact(p, probe, c, sc).f
        q_err = max(q_err, abs(q.f / exact - 1))
    ok_quad = q_err <= 1e-6

    sigma = p.dx / 50
    mix = force_density_quadrature(p, probe, semiclassical_packets(p, sigma)).f
    avg = np.mean([force_gaussian_quadrature(p, probe, WavepacketSpec(tuple(c), sigma, p.m1)).f
                   for c in branch_centers(p).values()])
    sc_err = abs(mix / avg - 1)
    ok_sc = sc_err <= 1e-6

    ok = ok_lin and ok_shrink and ok_quad and ok_sc
    record("5. Oracle equivalence (gravity)", ok,
           f"linearized vs exact {e2:.3g} at 1e-2 (needs 1e-4), {e3:.3g} at 1e-3, order {order:.2f}; "
           f"quadrature vs point {q_err:.2g}; semiclassical vs branch average {sc_err:.2g}")
    assert ok_shrink and ok_quad and ok_sc
    assert ok_lin, f"linearization error {e2:.3g} exceeds 1e-4 at d_x/d_y = 1e-2"


def test_6_time_domain_oracle():
    t0 = time.perf_counter()
    p = preset("A")
    s = select_branch(p)
    cfg = SimConfig.default(p, scenario=Scenario.SEMICLASSICAL, seed=0)
    v = validate_against_frequency_domain(p, s, cfg, n_seeds=8)
    f_cl = force_linearized(p, s.x2_bar, Scenario.SEMICLASSICAL).f
    static = f_cl / (p.m2 * p.omega_2**2)
    ok_mean = abs(v.td_mean - static) <= 3 * v.mean_se
    elapsed = time.perf_counter() - t0
    ok = v.variance_pass and ok_mean and elapsed < 120
    record("6. Cross-method oracle (dynamics)", ok,
           f"TD {v.td_second_moment:.5g} vs FD {v.fd_variance:.5g} (rel {v.rel_diff:.3%}, "
           f"SE {v.td_se / v.fd_variance:.3%}); mean {v.td_mean:.3g} vs f_cl/(m2 omega_2^2) "
           f"{static:.3g} +- {v.mean_se:.2g}; 8 seeds, {elapsed:.1f} s")
    assert ok


def _random_params(rng):
    lg = lambda lo, hi: float(10 ** rng.uniform(lo, hi))
    return ParameterSet(
        m1=lg(-12, -6), m2=lg(-16, -9), dx=lg(-10, -6), dy=lg(-8, -4), omega_c=lg(13, 16),
        L=lg(-4, -1), kappa=lg(4, 9), drive_E=lg(6, 13), omega_2=lg(3, 8), gamma_m=lg(-1, 3),
        T=float(rng.choice([0.0, lg(-3, 3)])),
        detuning_mode=fixed_delta(float(rng.uniform(-1, 1) * lg(3, 9))),
    )


def test_7_structural_invariants():
    rng = np.random.default_rng(20240501)
    worst = dict(conj=0.0, even=0.0, widening=0.0, m1=0.0, dy=0.0)
    for _ in range(1000):
        p = _random_params(rng)
        s = solve_steady(p)[0]
        w = 10 ** rng.uniform(2, 11, 4)
        Dp, Dm = response_D(p, s, w), response_D(p, s, -w)
        worst["conj"] = max(worst["conj"], float(np.max(np.abs(Dm - np.conj(Dp)) / np.abs(Dp))))
        Sp, Sm = spectrum_baseline(p, s, w), spectrum_baseline(p, s, -w)
        worst["even"] = max(worst["even"], float(np.max(np.abs(Sm - Sp) / np.abs(Sp))))

        f = float(rng.uniform(-1, 1)) * 10 ** rng.uniform(-25, -15)
        k2 = s.Delta**2 + p.kappa**2
        d0 = (-p.m2 * k2 * p.omega_2**2 + 2 * p.hbar * (p.omega_c / p.L) ** 2 * s.n_photons * s.Delta)
        direct = f**2 * k2**2 / d0**2
        worst["widening"] = max(worst["widening"], abs(widening(p, s, f) / direct - 1))

        th = theta_at(p, s, w)
        lam = float(10 ** rng.uniform(-1, 1))
        th_m1 = theta_at(p.replace(m1=lam * p.m1), s, w)
        worst["m1"] = max(worst["m1"], float(np.max(np.abs(th_m1 / (lam * th) - 1))))
        th_dy = theta_at(p.replace(dy=lam * p.dy), s, w)
        worst["dy"] = max(worst["dy"], float(np.max(np.abs(th_dy * lam**3 / th - 1))))
    ok = (worst["conj"] == 0.0 and worst["even"] == 0.0
          and worst["widening"] <= 1e-12 and worst["m1"] <= 1e-12 and worst["dy"] <= 1e-12)
    record("7. Structural invariants", ok, ", ".join(f"{k} {v:.2g}" for k, v in worst.items()) + " over 1000 draws")
    assert ok


def test_8_stability_gate():
    p = preset("A")
    s = select_branch(p)
    rep_a = stability_check(p, s)
    bad = p.replace(Delta=-3e7)
    sb = solve_steady(bad)[0]
    refused = 0
    try:
        variance(bad, sb)
    except UnstableSystemError:
        refused += 1
    try:
        simulate(bad, sb, SimConfig.default(bad))
    except UnstableSystemError:
        refused += 1
    ok = rep_a.stable and s.Delta == 0.0 and not stability_check(bad, sb).stable and refused == 2
    record("8. Stability gate", ok,
           f"Preset A margin {rep_a.margin:.3g}; Delta=-3e7 rad/s refused by {refused}/2 entry points")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
