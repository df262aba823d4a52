import math

import numpy as np
import pytest

from spectral_billiards.billiard import PhasePoint, billiard_map
from spectral_billiards.disk import disk_circle
from spectral_billiards.errors import (CirclesNotExchanged, GlancingCircle,
                                       HOutOfRange)
from spectral_billiards.radon import (BoundaryFunction, SymmetryGroup,
                                      bouncing_ball_identity_check,
                                      leray_mass, librational_circles,
                                      liouville_radon, rotational_circle,
                                      symmetry_average, torus_invariant)
from spectral_billiards.tori import circle_conjugacy

TWO_PI = 2.0 * math.pi


# --- torus_invariant ------------------------------------------------------------

def test_constant_kernel_disk(unit_circle):
    circ = disk_circle(unit_circle, math.pi / 3.0)
    val = torus_invariant(unit_circle, [circ], BoundaryFunction.constant(1.0))
    assert val == pytest.approx(2.0 / math.sqrt(3.0), abs=1e-12)


def test_zero_mean_kernel_disk(unit_circle):
    circ = disk_circle(unit_circle, math.pi / 3.0)
    K = BoundaryFunction(s_func=np.cos)
    assert torus_invariant(unit_circle, [circ], K) == pytest.approx(0.0, abs=1e-12)


def test_linearity_and_positivity(ellipse21):
    circ = circle_conjugacy(ellipse21, PhasePoint(0.0, 0.6), n_modes=64)
    K1 = BoundaryFunction.trig(ellipse21, cos_coeffs=[0.2], constant=1.5)
    K2 = BoundaryFunction.trig(ellipse21, sin_coeffs=[0.0, 0.3], constant=0.2)
    v1 = torus_invariant(ellipse21, [circ], K1)
    v2 = torus_invariant(ellipse21, [circ], K2)
    K12 = BoundaryFunction(s_func=lambda s: K1(s) + 2.0 * K2(s))
    assert torus_invariant(ellipse21, [circ], K12) == pytest.approx(v1 + 2.0 * v2, rel=1e-10)
    assert v1 > 0.0  # K1 > 0 pointwise


def test_pushforward_invariance(ellipse21):
    circ = circle_conjugacy(ellipse21, PhasePoint(0.0, 0.55), n_modes=64)
    K = BoundaryFunction.trig(ellipse21, cos_coeffs=[0.4, 0.1], constant=1.0)

    class Pushed:
        def measure_nodes(self, n):
            s, xi = circ.phase_nodes(n)
            s2 = np.empty_like(s)
            xi2 = np.empty_like(xi)
            for i in range(n):
                q, _ = billiard_map(ellipse21, PhasePoint(float(s[i]), float(xi[i])))
                s2[i], xi2[i] = q.s, q.xi
            return s2, xi2, np.full(n, 1.0 / n)

    direct = torus_invariant(ellipse21, [circ], K)
    pushed = torus_invariant(ellipse21, [Pushed()], K)
    assert pushed == pytest.approx(direct, abs=1e-9)


def test_glancing_circle_rejected(unit_circle):
    circ = disk_circle(unit_circle, 1e-4)
    with pytest.raises(GlancingCircle):
        torus_invariant(unit_circle, [circ], BoundaryFunction.constant(1.0),
                        eps_glance=1e-3)


# --- symmetry averaging -----------------------------------------------------------

def test_symmetry_average_kills_odd_modes(unit_circle):
    G = SymmetryGroup.for_curve(unit_circle)
    s = np.linspace(0.0, TWO_PI, 33)
    for K in (BoundaryFunction(s_func=np.cos), BoundaryFunction(s_func=np.sin)):
        assert np.max(np.abs(symmetry_average(K, G)(s))) < 1e-14


def test_symmetry_average_fixes_even_modes(unit_circle):
    G = SymmetryGroup.for_curve(unit_circle)
    K = BoundaryFunction(s_func=lambda s: np.cos(2.0 * np.asarray(s)))
    s = np.linspace(0.0, TWO_PI, 33)
    assert np.max(np.abs(symmetry_average(K, G)(s) - np.cos(2 * s))) < 1e-14


def test_symmetry_average_is_projection(ellipse21, rng):
    G = SymmetryGroup.for_curve(ellipse21)
    K = BoundaryFunction.trig(ellipse21, cos_coeffs=list(rng.standard_normal(4)),
                              sin_coeffs=list(rng.standard_normal(4)))
    once = symmetry_average(K, G)
    twice = symmetry_average(once, G)
    s = np.linspace(0.0, ellipse21.total_length, 65)
    assert np.max(np.abs(twice(s) - once(s))) < 1e-14


def test_group_elements_are_involutions(ellipse21):
    G = SymmetryGroup.for_curve(ellipse21)
    s = np.linspace(0.0, ellipse21.total_length, 17)
    L = ellipse21.total_length
    for name, g in zip(G.element_names(), G.maps()):
        if name.startswith("reflect"):
            d = (g(g(s)) - s) % L
            assert np.max(np.minimum(d, L - d)) < 1e-12


# --- Liouville Radon transform ------------------------------------------------------

def test_radon_zero_kernel(table_c1):
    pair = liouville_radon(table_c1, BoundaryFunction.constant(0.0), -0.5)
    assert pair.plus == 0.0 and pair.minus == 0.0


def test_radon_brute_force_oracle(table_c1):
    # 10^6-node midpoint rule on the closed-form integrand
    h = -0.5
    n = 1_000_000
    x = (np.arange(n) + 0.5) * TWO_PI / n
    f = np.sin(x) ** 2
    oracle = (TWO_PI / n) * np.sum(np.sqrt((f - table_c1.q_N) / ((h - table_c1.q_N) * (f - h))))
    pair = liouville_radon(table_c1, BoundaryFunction.constant(1.0), h)
    assert pair.plus == pytest.approx(oracle, abs=1e-8)
    assert pair.minus == -pair.plus


def test_radon_scaling_linearity(table_c1):
    K = BoundaryFunction(s_func=None, x_func=lambda x: np.cos(2.0 * np.asarray(x)))
    K2 = BoundaryFunction(s_func=None, x_func=lambda x: 2.0 * np.cos(2.0 * np.asarray(x)))
    assert liouville_radon(table_c1, K2, -0.7).plus == pytest.approx(
        2.0 * liouville_radon(table_c1, K, -0.7).plus, rel=1e-12)


def test_radon_h_out_of_range(table_c1):
    for h in (table_c1.q_N - 0.1, 0.0, table_c1.f_max + 0.1):
        with pytest.raises(HOutOfRange):
            liouville_radon(table_c1, BoundaryFunction.constant(1.0), h)


def test_radon_librational_branch_against_tanh_sinh_oracle(table_e21):
    # mpmath's double-exponential rule absorbs the inverse-sqrt endpoints
    import mpmath as mp
    h = 1.0
    c2 = table_e21.c ** 2
    x1 = math.asin(math.sqrt(h / c2))
    x2 = math.pi - x1

    def integrand(x):
        f = c2 * mp.sin(x) ** 2
        return mp.sqrt((f - table_e21.q_N) / ((h - table_e21.q_N) * (f - h)))

    with mp.workdps(30):
        oracle = float(mp.quad(integrand, [x1, x2]))
    pair = liouville_radon(table_e21, BoundaryFunction.constant(1.0), h)
    # the component integral doubles over the two momentum branches
    assert pair.plus == pytest.approx(2.0 * oracle, rel=1e-8)
    assert pair.plus == pytest.approx(pair.minus, rel=1e-10)


def test_leray_vs_probability_normalization(table_c1):
    curve = table_c1.boundary_curve()
    K1 = BoundaryFunction.constant(1.0)
    for h in (-1.0, -0.4):
        lc = rotational_circle(table_c1, h)
        ti = torus_invariant(curve, [lc], K1)
        assert ti * leray_mass(table_c1, h) == pytest.approx(
            liouville_radon(table_c1, K1, h).plus, rel=1e-9)


def test_orbit_circle_matches_leray_circle(table_c1):
    curve = table_c1.boundary_curve()
    h = -0.6
    xi0 = math.sqrt(h / table_c1.q_N)
    orb_circ = circle_conjugacy(curve, PhasePoint(0.0, xi0), n_modes=64)
    K = BoundaryFunction.from_x(lambda x: 1.0 + 0.3 * np.cos(2.0 * np.asarray(x)), curve)
    a = torus_invariant(curve, [orb_circ], K)
    b = torus_invariant(curve, [rotational_circle(table_c1, h)], K)
    assert a == pytest.approx(b, rel=1e-8)


# --- bouncing-ball identity ---------------------------------------------------------

def test_bouncing_ball_identity_asymmetric(ellipse21, table_e21):
    lam1, lam2 = librational_circles(table_e21, 1.0, curve=ellipse21)
    G = SymmetryGroup.for_curve(ellipse21)
    K = BoundaryFunction.trig(ellipse21, cos_coeffs=[0.3, 0.0, 0.2],
                              sin_coeffs=[0.25, 0.4])
    assert bouncing_ball_identity_check(ellipse21, lam1, lam2, K, G) < 1e-8


def test_bouncing_ball_identity_symmetric_kernel(ellipse21, table_e21):
    lam1, lam2 = librational_circles(table_e21, 0.7, curve=ellipse21)
    G = SymmetryGroup.for_curve(ellipse21)
    K = BoundaryFunction.trig(ellipse21, cos_coeffs=[0.0, 0.5])  # cos(4 pi s / L)
    K_sym = symmetry_average(K, G)
    s = np.linspace(0.0, ellipse21.total_length, 33)
    assert np.max(np.abs(K_sym(s) - K(s))) < 1e-12
    assert bouncing_ball_identity_check(ellipse21, lam1, lam2, K, G) < 1e-10


def test_bouncing_ball_constant_kernel(ellipse21, table_e21):
    lam1, lam2 = librational_circles(table_e21, 1.4, curve=ellipse21)
    G = SymmetryGroup.for_curve(ellipse21)
    assert bouncing_ball_identity_check(ellipse21, lam1, lam2,
                                        BoundaryFunction.constant(1.0), G) < 1e-10


def test_bouncing_ball_rejects_unrelated_circles(ellipse21, table_e21):
    lam1, _ = librational_circles(table_e21, 1.0, curve=ellipse21)
    _, other = librational_circles(table_e21, 2.0, curve=ellipse21)
    G = SymmetryGroup.for_curve(ellipse21)
    with pytest.raises(CirclesNotExchanged):
        bouncing_ball_identity_check(ellipse21, lam1, other,
                                     BoundaryFunction.constant(1.0), G)
