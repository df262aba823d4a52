import math

import numpy as np
import pytest
from scipy.integrate import quad

from spectral_billiards.errors import ConfigError, ValidationError
from spectral_billiards.geometry import (curve_from_spec, elliptic_table,
                                         liouville_validate, make_circle,
                                         make_ellipse, make_fourier,
                                         table_from_spec, LiouvilleTable)


def test_unit_circle_closed_forms(unit_circle):
    c = unit_circle
    assert c.total_length == pytest.approx(2.0 * math.pi, abs=1e-14)
    x, y = c.position(0.0)
    assert (x, y) == (1.0, 0.0)
    for s in np.linspace(0.0, 2.0 * math.pi, 13, endpoint=False):
        x, y = c.position(s)
        assert x == pytest.approx(math.cos(s), abs=1e-15)
        assert y == pytest.approx(math.sin(s), abs=1e-15)
        assert c.curvature(s) == 1.0


def test_ellipse_perimeter_against_quadrature_oracle():
    a, b = 2.0, 1.0
    e = make_ellipse(a, b)
    oracle, err = quad(lambda t: math.hypot(a * math.sin(t), b * math.cos(t)),
                       0.0, 2.0 * math.pi, epsabs=1e-12, epsrel=1e-12)
    assert err < 1e-9
    assert e.total_length == pytest.approx(oracle, abs=1e-6)
    assert e.total_length == pytest.approx(9.688448, abs=1e-6)


def test_arclength_parametrization_unit_speed(ellipse21):
    h = 1e-6
    for s in np.linspace(0.1, ellipse21.total_length - 0.1, 23):
        x1, y1 = ellipse21.position(s + h)
        x0, y0 = ellipse21.position(s - h)
        speed = math.hypot(x1 - x0, y1 - y0) / (2.0 * h)
        assert speed == pytest.approx(1.0, abs=1e-8)


def test_curve_is_closed(ellipse21):
    x0, y0 = ellipse21.position(0.0)
    x1, y1 = ellipse21.position(ellipse21.total_length * (1.0 - 1e-15))
    assert math.hypot(x1 - x0, y1 - y0) < 1e-12


def test_ellipse_radius_bounds_and_convexity(ellipse21):
    s = np.linspace(0.0, ellipse21.total_length, 257, endpoint=False)
    x, y = ellipse21.position(s)
    r = np.hypot(x, y)
    assert np.all(r <= 2.0 + 1e-12) and np.all(r >= 1.0 - 1e-12)
    assert ellipse21.is_convex()


def test_inward_normal_points_at_center(ellipse21):
    for s in np.linspace(0.0, ellipse21.total_length, 17, endpoint=False):
        x, y = ellipse21.position(s)
        nx, ny = ellipse21.inward_normal(s)
        assert nx * (0.0 - x) + ny * (0.0 - y) > 0.0


def test_bad_axes_rejected():
    with pytest.raises(ValidationError):
        make_ellipse(1.0, -2.0)
    with pytest.raises(ValidationError):
        make_ellipse(1.0, 2.0)
    with pytest.raises(ValidationError):
        make_circle(0.0)


def test_fourier_curve_roundtrip_and_convexity():
    c = make_fourier([1.0, 0.0, 0.0, 0.05])
    assert c.is_convex()
    h = 1e-6
    for s in np.linspace(0.0, c.total_length, 11, endpoint=False):
        x1, y1 = c.position(s + h)
        x0, y0 = c.position(s - h)
        assert math.hypot(x1 - x0, y1 - y0) / (2 * h) == pytest.approx(1.0, abs=1e-7)
    with pytest.raises(ValidationError):
        make_fourier([1.0, 0.0, 0.0, 0.4])  # strongly dented: not convex


# --- Liouville tables -------------------------------------------------------

def test_elliptic_table_is_classical(table_c1):
    rep = liouville_validate(table_c1, k_check=4)
    assert rep.classical_type, rep.first_failure()


def test_trig_pair_fails_parity_compatibility_at_k2():
    # f = sin^2 x with q = -sin^2 y: fourth derivatives disagree in sign
    def f(x, m=0):
        if m == 0:
            return math.sin(x) ** 2
        return -0.5 * 2.0 ** m * math.cos(2.0 * x + 0.5 * math.pi * m)

    def q(y, m=0):
        if m == 0:
            return -math.sin(y) ** 2
        return 0.5 * 2.0 ** m * math.cos(2.0 * y + 0.5 * math.pi * m)

    assert f(0.0, 4) == pytest.approx(-8.0)
    assert (-1.0) ** 2 * q(0.0, 4) == pytest.approx(8.0)
    table = LiouvilleTable(f=f, q=q, N=1.0)
    rep = liouville_validate(table, k_check=4)
    assert not rep.classical_type
    bad = rep.first_failure()
    assert bad.name.startswith("iii")
    assert "k=2" in bad.detail


def test_geodesic_convexity_sign_check():
    base = elliptic_table(1.0, 1.0)

    # flip the sign of q' at N by reflecting q about y = N
    def q_reflected(y, m=0):
        return base.q(2.0 * base.N - y, m) * ((-1.0) ** m)

    table = LiouvilleTable(f=base.f, q=q_reflected, N=base.N)
    rep = liouville_validate(table, k_check=2)
    names = {c.name: c.passed for c in rep.conditions}
    assert not names["iv: q'(N)<0 (geodesic convexity)"]


def test_compatibility_holds_at_every_checked_order(table_c1):
    rep = liouville_validate(table_c1, k_check=8)
    names = {c.name: c.passed for c in rep.conditions}
    assert names["iii: parity compatibility"]


# --- domain-spec parsing ----------------------------------------------------

def test_domain_spec_parsing():
    c = curve_from_spec({"type": "circle", "r": 2.0})
    assert c.total_length == pytest.approx(4.0 * math.pi)
    e = curve_from_spec({"type": "ellipse", "a": 2.0, "b": 1.0})
    assert e.kind == "ellipse"
    t = table_from_spec({"type": "liouville", "family": "ellipse", "c": 1.0, "N": 1.0})
    assert t.q_N == pytest.approx(-math.sinh(1.0) ** 2)
    lcurve = curve_from_spec({"type": "liouville", "family": "ellipse", "c": 1.0, "N": 1.0})
    assert lcurve.kind == "ellipse"


def test_domain_spec_strict_keys():
    with pytest.raises(ConfigError):
        curve_from_spec({"type": "circle", "radius": 1.0})
    with pytest.raises(ConfigError):
        curve_from_spec({"type": "torus"})
    with pytest.raises(ConfigError):
        curve_from_spec({"type": "ellipse", "a": 2.0, "b": 1.0, "tilt": 0.3})
