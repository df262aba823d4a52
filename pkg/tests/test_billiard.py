import math

import numpy as np
import pytest

from spectral_billiards.billiard import (PhasePoint, billiard_map,
                                         flowout_integral,
                                         generating_residual, map_jacobian,
                                         orbit)
from spectral_billiards.disk import disk_circle
from spectral_billiards.errors import DegenerateChord, GlancingRay
from spectral_billiards.tori import liouville_integral


def test_circle_diameter(unit_circle):
    q, chord = billiard_map(unit_circle, PhasePoint(0.0, 0.0))
    assert q.s == pytest.approx(math.pi, abs=1e-13)
    assert q.xi == pytest.approx(0.0, abs=1e-13)
    assert chord.length == pytest.approx(2.0, abs=1e-13)


def test_circle_closed_form_advance(unit_circle):
    q, chord = billiard_map(unit_circle, PhasePoint(0.0, 0.5))
    assert q.s == pytest.approx(2.0 * math.pi / 3.0, abs=1e-13)
    assert q.xi == pytest.approx(0.5, abs=1e-13)
    assert chord.length == pytest.approx(math.sqrt(3.0), abs=1e-13)


def test_ellipse_major_axis(ellipse21):
    q, chord = billiard_map(ellipse21, PhasePoint(0.0, 0.0))
    assert q.s == pytest.approx(ellipse21.total_length / 2.0, abs=1e-10)
    assert q.xi == pytest.approx(0.0, abs=1e-12)
    assert chord.length == pytest.approx(4.0, abs=1e-12)


def test_glancing_cutoff(unit_circle):
    with pytest.raises(GlancingRay):
        billiard_map(unit_circle, PhasePoint(0.0, 1.0 - 1e-9))


def test_period_three_orbit(unit_circle):
    ob = orbit(unit_circle, PhasePoint(0.0, 0.5), 3)
    wrapped = ob.s_lifted[-1] % (2.0 * math.pi)
    assert min(wrapped, 2.0 * math.pi - wrapped) < 1e-12
    assert ob.total_geodesic_length == pytest.approx(3.0 * math.sqrt(3.0), abs=1e-12)


def test_golden_orbit_never_repeats(unit_circle, golden):
    ob = orbit(unit_circle, PhasePoint(0.0, math.cos(math.pi * golden)), 10_000)
    assert np.ptp(ob.xi) < 5e-12          # xi invariant on the disk
    s = ob.s_mod[1:]
    assert np.min(np.abs(s - ob.s_mod[0])) > 1e-6


def test_ellipse_conserved_quantity(ellipse21):
    ob = orbit(ellipse21, PhasePoint(0.0, 0.5), 10_000)
    vals = liouville_integral(ellipse21, ob.s_mod, ob.xi)
    assert np.max(np.abs(vals - vals[0])) < 1e-9


def test_generating_residual_circle_closed_form(unit_circle):
    r1, r2 = generating_residual(unit_circle, 0.0, 2.0 * math.pi / 3.0)
    assert abs(r1) < 1e-8 and abs(r2) < 1e-8


def test_generating_residual_random_chords(ellipse21, rng):
    L = ellipse21.total_length
    for _ in range(25):
        s = rng.uniform(0.0, L)
        sp = (s + rng.uniform(0.05 * L, 0.95 * L)) % L
        r1, r2 = generating_residual(ellipse21, s, sp)
        assert abs(r1) < 1e-7 and abs(r2) < 1e-7


def test_generating_residual_degenerate(unit_circle):
    with pytest.raises(DegenerateChord):
        generating_residual(unit_circle, 1.0, 1.0)


def test_reversibility(ellipse21, rng):
    for _ in range(20):
        p = PhasePoint(rng.uniform(0.0, ellipse21.total_length), rng.uniform(-0.9, 0.9))
        q, _ = billiard_map(ellipse21, p)
        back, _ = billiard_map(ellipse21, PhasePoint(q.s, -q.xi))
        assert back.s == pytest.approx(p.s, abs=1e-9)
        assert back.xi == pytest.approx(-p.xi, abs=1e-10)


def test_area_preservation_sample(ellipse21):
    for s in np.linspace(0.5, 9.0, 5):
        for xi in (-0.6, 0.1, 0.7):
            J = map_jacobian(ellipse21, PhasePoint(float(s), xi))
            assert np.linalg.det(J) == pytest.approx(1.0, abs=1e-6)


def test_orbit_error_carries_bounce_index(ellipse21):
    # on the ellipse xi grows toward the minor axis along a rotational
    # caustic orbit; the seed passes the cutoff, a later bounce does not
    with pytest.raises(GlancingRay, match="bounce"):
        orbit(ellipse21, PhasePoint(0.0, 0.7071), 40, eps_glance=0.07)


# --- flow-out integrals -------------------------------------------------------

def test_flowout_constant_potential(unit_circle):
    circ = disk_circle(unit_circle, math.pi / 3.0)
    res = flowout_integral(unit_circle, circ, lambda x, y: 1.0)
    assert res.value == pytest.approx(math.sqrt(3.0), abs=1e-12)
    assert res.volume == pytest.approx(math.sqrt(3.0), abs=1e-12)


def test_flowout_r_squared_diameter_circle(unit_circle):
    # theta = pi/2: integral of cos^2(theta) + u^2 over the diameter = 2/3
    circ = disk_circle(unit_circle, math.pi / 2.0)
    res = flowout_integral(unit_circle, circ, lambda x, y: x ** 2 + y ** 2)
    assert res.value == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_flowout_zero_potential(unit_circle):
    circ = disk_circle(unit_circle, math.pi / 4.0)
    res = flowout_integral(unit_circle, circ, lambda x, y: 0.0 * np.asarray(x))
    assert res.value == 0.0


def test_flowout_closed_form_any_theta(unit_circle):
    theta = 1.1
    circ = disk_circle(unit_circle, theta)
    res = flowout_integral(unit_circle, circ, lambda x, y: x ** 2 + y ** 2)
    expected = 2.0 * math.sin(theta) * math.cos(theta) ** 2 + (2.0 / 3.0) * math.sin(theta) ** 3
    assert res.value == pytest.approx(expected, abs=1e-12)
