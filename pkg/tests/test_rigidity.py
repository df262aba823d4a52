import math

import numpy as np
import pytest
from scipy.interpolate import CubicSpline

from spectral_billiards.errors import HOutOfRange, ValidationError
from spectral_billiards.radon import BoundaryFunction, liouville_radon
from spectral_billiards.rigidity import (invert_radon, radon_matrix,
                                         rotation_profile,
                                         symmetric_basis_function)


@pytest.fixture(scope="module")
def small_matrix(table_c1):
    h = np.linspace(table_c1.q_N + 0.08, -0.08, 8)
    return radon_matrix(table_c1, h, 6)


def test_basis_symmetry():
    xs = np.linspace(0.0, 2.0 * math.pi, 97)
    for j in range(5):
        K = symmetric_basis_function(j)
        assert np.max(np.abs(K.in_x(xs) - K.in_x(-xs))) < 1e-12
        assert np.max(np.abs(K.in_x(xs) - K.in_x(math.pi - xs))) < 1e-12


def test_constant_column_positive(small_matrix):
    assert np.all(small_matrix.entries[:, 0] > 0.0)


def test_entries_linear_in_basis(table_c1, small_matrix):
    doubled = BoundaryFunction(s_func=None,
                               x_func=lambda x: 2.0 * np.cos(2.0 * np.asarray(x)))
    for i, h in enumerate(small_matrix.h_grid):
        val = liouville_radon(table_c1, doubled, float(h)).plus
        assert val == pytest.approx(2.0 * small_matrix.entries[i, 1], rel=1e-10)


def test_sigma_min_positive(small_matrix):
    assert small_matrix.sigma_min > 0.0
    assert np.all(np.diff(small_matrix.singular_values) <= 0.0)


def test_matrix_preconditions(table_c1):
    with pytest.raises(ValidationError):
        radon_matrix(table_c1, [-0.5, -0.7], 2)       # not increasing
    with pytest.raises(HOutOfRange):
        radon_matrix(table_c1, [-0.5, 0.5], 2)        # second not rotational
    with pytest.raises(ValidationError):
        radon_matrix(table_c1, [-0.7, -0.5], 5)       # J > grid


def test_roundtrip_reconstruction(small_matrix):
    c_true = np.zeros(6)
    c_true[1], c_true[2] = 0.3, 0.1
    rep = invert_radon(small_matrix, small_matrix.entries @ c_true, reg=1e-10)
    rel = np.linalg.norm(rep.coefficients - c_true) / np.linalg.norm(c_true)
    assert rel < 1e-3
    assert rep.residual < 1e-10


def test_zero_data_zero_solution(small_matrix):
    rep = invert_radon(small_matrix, np.zeros(len(small_matrix.h_grid)), reg=1e-10)
    assert np.max(np.abs(rep.coefficients)) == 0.0


def test_identical_data_identical_reconstruction(small_matrix):
    c = np.zeros(6)
    c[1] = 0.25
    d1 = small_matrix.entries @ c
    r1 = invert_radon(small_matrix, d1.copy(), reg=1e-10)
    r2 = invert_radon(small_matrix, d1.copy(), reg=1e-10)
    assert np.array_equal(r1.coefficients, r2.coefficients)


def test_noise_linearity(small_matrix, rng):
    c_true = np.zeros(6)
    c_true[1], c_true[2] = 0.3, 0.1
    data = small_matrix.entries @ c_true
    noise = rng.standard_normal(len(data))
    clean = invert_radon(small_matrix, data, reg=1e-6).coefficients
    errs = []
    for scale in (5e-7, 1e-6):
        noisy = invert_radon(small_matrix, data + scale * noise, reg=1e-6).coefficients
        errs.append(np.linalg.norm(noisy - clean))
    assert errs[1] == pytest.approx(2.0 * errs[0], rel=1e-6)


def test_rank_deficient_raised(small_matrix):
    from spectral_billiards.errors import RankDeficient
    with pytest.raises(RankDeficient):
        invert_radon(small_matrix, np.zeros(len(small_matrix.h_grid)), reg=2.0)


def test_profile_smoothness_surrogate(table_c1):
    # Radon profiles of trig-polynomial kernels interpolate to off-grid
    # values at 1e-6: the desk-scale stand-in for analyticity in h
    K = BoundaryFunction(s_func=None,
                         x_func=lambda x: 1.0 + 0.5 * np.cos(2.0 * np.asarray(x)))
    grid = np.linspace(table_c1.q_N + 0.15, -0.1, 49)
    vals = np.array([liouville_radon(table_c1, K, float(h)).plus for h in grid])
    spline = CubicSpline(grid, vals)
    mids = 0.5 * (grid[:-1] + grid[1:])[4:-4]
    direct = np.array([liouville_radon(table_c1, K, float(h)).plus for h in mids])
    assert np.max(np.abs(spline(mids) - direct) / np.abs(direct)) < 1e-6


def test_rotation_profile_monotone(table_c1):
    h = np.linspace(table_c1.q_N + 0.01, table_c1.q_N + 0.2, 10)
    prof = rotation_profile(table_c1, h, n_orbit=4096)
    assert prof["strictly_monotone"]
    omegas = [r[1] for r in prof["rows"]]
    assert all(0.0 < w < 0.5 for w in omegas)


def test_rotation_profile_out_of_range(table_c1):
    with pytest.raises(HOutOfRange):
        rotation_profile(table_c1, [table_c1.q_N - 0.1, -0.5])
