import math

import numpy as np
import pytest

from optograv.errors import SingularGeometryError
from optograv.gravity import (
    Scenario,
    WavepacketSpec,
    branch_centers,
    force_density_quadrature,
    force_gaussian_quadrature,
    force_linearized,
    force_point_exact,
    probe_position,
    scenario_force_set,
    semiclassical_packets,
)
from optograv.params import preset


def geometry(ratio, dy=1e-6):
    return preset("A").replace(dx=ratio * dy, dy=dy)


def test_scenario_parse():
    assert Scenario.parse("alpha") is Scenario.QUANTUM_ALPHA
    assert Scenario.parse("QuantumBeta") is Scenario.QUANTUM_BETA
    assert Scenario.parse("cl") is Scenario.SEMICLASSICAL
    with pytest.raises(ValueError):
        Scenario.parse("gamma")


def test_linearized_closed_forms(preset_a, steady_a):
    p, x = preset_a, steady_a.x2_bar
    k = p.G * p.m1 * p.m2 / p.dy**3
    f = scenario_force_set(p, steady_a)
    assert f[Scenario.QUANTUM_ALPHA].f == pytest.approx(-k * (x - p.dx), rel=1e-15)
    assert f[Scenario.QUANTUM_BETA].f == pytest.approx(-k * (x + p.dx), rel=1e-15)
    assert f[Scenario.SEMICLASSICAL].f == pytest.approx(-k * x, rel=1e-15)
    mean = 0.5 * (f[Scenario.QUANTUM_ALPHA].f + f[Scenario.QUANTUM_BETA].f)
    assert mean == pytest.approx(f[Scenario.SEMICLASSICAL].f, rel=1e-12)


def test_forces_attractive():
    p = geometry(1e-2)
    probe = probe_position(p, 0.0)
    for s, c in branch_centers(p).items():
        f = force_point_exact(p, probe, c, s).f
        assert np.sign(f) == np.sign(c[0])  # pulled toward the source


def test_singular_geometry():
    p = preset("A").replace(dy=0.0)
    with pytest.raises(SingularGeometryError):
        force_linearized(p, 0.0, Scenario.SEMICLASSICAL)
    with pytest.raises(SingularGeometryError):
        force_point_exact(p, [0, 0, 0], [0, 0, 0])


@pytest.mark.parametrize("ratio", [1e-2, 1e-3])
def test_linearization_error_is_second_order(ratio):
    p = geometry(ratio)
    probe = probe_position(p, 0.0)
    for s, c in branch_centers(p).items():
        lin = force_linearized(p, 0.0, s).f
        exact = force_point_exact(p, probe, c, s).f
        rel = abs(lin / exact - 1)
        # lin/exact = (1 + r^2)^(3/2) at x2 = 0
        assert rel == pytest.approx((1 + ratio**2) ** 1.5 - 1, rel=1e-6)


def test_shell_theorem():
    p = preset("A")
    probe = np.array([0.0, 1e-6, 0.0])
    pk = WavepacketSpec((0.0, 0.0, 0.0), 1e-6 / 7.0, p.m1)
    q = force_gaussian_quadrature(p, probe, pk)
    # probe on the y axis: no x-force
    assert abs(q.f) < 1e-30
    pk = WavepacketSpec((3e-7, 0.0, 0.0), 1e-6 / 7.0, p.m1)
    q = force_gaussian_quadrature(p, probe, pk)
    exact = force_point_exact(p, probe, pk.center).f
    assert abs(q.f / exact - 1) < 1e-9


def test_quadrature_rejects_overlap():
    p = preset("A")
    with pytest.raises(ValueError):
        force_gaussian_quadrature(p, [0, 1e-6, 0], WavepacketSpec((0, 0, 0), 2e-7, p.m1))
    with pytest.raises(ValueError):
        WavepacketSpec((0, 0, 0), 0.0, 1.0)


def test_density_quadrature_single_packet_matches_point():
    p = geometry(1e-1)
    probe = probe_position(p, 0.0)
    pk = WavepacketSpec((p.dx, 0.0, 0.0), p.dx / 50, p.m1)
    q = force_density_quadrature(p, probe, [pk])
    exact = force_point_exact(p, probe, pk.center).f
    assert abs(q.f / exact - 1) < 1e-8


def test_semiclassical_packets():
    p = preset("A")
    pk = semiclassical_packets(p)
    assert len(pk) == 2
    assert sum(x.mass for x in pk) == p.m1
    assert pk[0].sigma == p.dx / 50
