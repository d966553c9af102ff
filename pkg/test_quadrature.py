"""
Tests for oscillator eigenfunctions, interval overlaps and binning effects
"""
import math
import sys
import os

import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.special import erf

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from photonics.errors import DomainError, NumericalError
from photonics.quadrature import (BinRegion, Interval, P_QUADRATURE, QuadratureAngle, RegionOperator,
                                  X_QUADRATURE, hermite_fn, hermite_fns, overlap, region_operator,
                                  region_overlap, region_overlap_matrix)

SQRT_PI = math.sqrt(math.pi)

# phi_m phi_n = pi^(-1/2) e^(-x^2) * polynomial; coefficients by power of x
PRODUCT_POLYS = {
    (0, 0): {0: 1.0},
    (0, 1): {1: math.sqrt(2)},
    (0, 2): {2: math.sqrt(2), 0: -1 / math.sqrt(2)},
    (1, 1): {2: 2.0},
    (1, 2): {3: 2.0, 1: -1.0},
    (2, 2): {4: 2.0, 2: -2.0, 0: 0.5},
}


def _moment_antiderivative(k, x):
    """Antiderivative of x^k e^(-x^2) for k <= 4"""
    g = math.exp(-x * x)
    e = SQRT_PI / 2 * erf(x)
    return {
        0: e,
        1: -g / 2,
        2: e / 2 - x * g / 2,
        3: -(x * x + 1) * g / 2,
        4: 3 * e / 4 - (x ** 3 / 2 + 3 * x / 4) * g,
    }[k]


def erf_overlap(m, n, lo, hi):
    """Closed-form overlap for m, n <= 2"""
    poly = PRODUCT_POLYS[(min(m, n), max(m, n))]
    total = sum(c * (_moment_antiderivative(k, hi) - _moment_antiderivative(k, lo)) for k, c in poly.items())
    return total / SQRT_PI


def test_hermite_fns_normalized_and_orthogonal():
    x = np.linspace(-15, 15, 20001)
    phis = hermite_fns(6, x)
    gram = trapezoid(phis[:, None, :] * phis[None, :, :], x, axis=-1)
    assert np.allclose(gram, np.eye(7), atol=1e-8)


def test_hermite_fn_low_levels():
    x = 0.7
    phi0 = math.pi ** -0.25 * math.exp(-x * x / 2)
    assert hermite_fn(0, x) == pytest.approx(phi0)
    assert hermite_fn(1, x) == pytest.approx(math.sqrt(2) * x * phi0)
    assert hermite_fn(2, x) == pytest.approx((2 * x * x - 1) / math.sqrt(2) * phi0)
    with pytest.raises(DomainError):
        hermite_fns(-1, x)


def test_overlap_matches_erf_closed_forms():
    rng = np.random.default_rng(20240611)
    for _ in range(50):
        lo, hi = np.sort(rng.uniform(-5, 5, size=2))
        interval = Interval(lo, hi)
        for m in range(3):
            for n in range(3):
                assert abs(overlap(m, n, interval) - erf_overlap(m, n, lo, hi)) < 1e-10


def test_vacuum_on_symmetric_interval():
    assert overlap(0, 0, Interval(-0.83, 0.83)) == pytest.approx(erf(0.83), abs=1e-12)
    assert region_overlap(0, 0, BinRegion.symmetric(0.83), outcome=-1) == pytest.approx(1 - erf(0.83), abs=1e-12)


def test_parity_symmetry_and_additivity():
    sym = Interval(-1.3, 1.3)
    assert overlap(1, 2, sym) == 0.0
    assert overlap(0, 3, sym) == 0.0
    assert overlap(1, 3, Interval(-0.4, 2.0)) == pytest.approx(overlap(3, 1, Interval(-0.4, 2.0)), abs=1e-13)
    whole = overlap(2, 4, Interval(-1.0, 2.5))
    parts = overlap(2, 4, Interval(-1.0, 0.3)) + overlap(2, 4, Interval(0.3, 2.5))
    assert whole == pytest.approx(parts, abs=1e-11)


def test_completeness_on_wide_interval():
    matrix = region_overlap_matrix(6, BinRegion.symmetric(12.0))
    assert np.allclose(matrix, np.eye(7), atol=1e-10)


def test_overlap_matrix_matches_scalar_overlaps():
    region = BinRegion.from_bounds([(-2.0, -0.5), (0.1, 1.7)])
    matrix = region_overlap_matrix(4, region)
    for m in range(5):
        for n in range(5):
            assert matrix[m, n] == pytest.approx(region_overlap(m, n, region), abs=1e-11)


def test_region_canonical_form():
    region = BinRegion.from_bounds([(1.0, 2.0), (-1.0, 0.5), (0.5, 1.5)])
    assert region.plus_intervals == (Interval(-1.0, 2.0),)
    assert region.contains(0.0) and not region.contains(2.5)
    assert BinRegion.symmetric(0.0).is_empty
    with pytest.raises(DomainError):
        BinRegion.symmetric(-0.1)
    with pytest.raises(DomainError):
        Interval(1.0, 1.0)
    with pytest.raises(DomainError):
        Interval(-math.inf, 0.0)
    with pytest.raises(DomainError):
        region_overlap(0, 0, region, outcome=0)


def test_region_operator_is_effect():
    for theta in (X_QUADRATURE, P_QUADRATURE, QuadratureAngle(0.4)):
        op = region_operator(theta, BinRegion.symmetric(0.83), 10)
        assert op.is_effect()
        assert op.complement().is_effect()
        assert np.allclose(op.entries + op.complement().entries, np.eye(11))


def test_rotation_only_changes_phases():
    x_op = region_operator(X_QUADRATURE, BinRegion.symmetric(0.9), 6)
    p_op = region_operator(P_QUADRATURE, BinRegion.symmetric(0.9), 6)
    assert np.allclose(np.abs(x_op.entries), np.abs(p_op.entries))
    # level difference 2 picks up e^(2i pi/2) = -1
    assert p_op.entries[0, 2].real == pytest.approx(-x_op.entries[0, 2].real)
    assert QuadratureAngle(2 * math.pi + 0.1).theta == pytest.approx(0.1)


def test_non_hermitian_operator_rejected():
    with pytest.raises(NumericalError):
        RegionOperator(np.array([[0.5, 0.1], [0.0, 0.5]]))
