import math

import numpy as np
import pytest

from filmcascade.errors import UnsupportedError
from filmcascade.spectral import (abs_dx, antiderivative_y, apply_multiplier, bulk_inner, bulk_norm, dealias,
                                  delta_weight, differentiate, dx_symbol, homogeneous_norm, l2_bulk,
                                  make_grid, sobolev_symbol, surface_inner, surface_norm, to_coeffs,
                                  from_coeffs)


def test_grid_layout():
    g = make_grid(16, 12)
    assert g.shape == (16, 12)
    assert g.y[0] == 0.0 and g.y[-1] == 1.0
    assert np.all(np.diff(g.y) > 0)
    np.testing.assert_allclose(g.kx[:3], [0, 2 * np.pi, 4 * np.pi])
    assert make_grid(16, 12) is g


def test_chebyshev_derivative_exact_for_polynomials():
    g = make_grid(4, 12)
    y = g.y
    f = y ** 7 - 3 * y ** 4 + y
    np.testing.assert_allclose(f @ g.Dy.T, 7 * y ** 6 - 12 * y ** 3 + 1, atol=1e-11)
    np.testing.assert_allclose(f @ g.Dy_power(3).T, 210 * y ** 4 - 72 * y, atol=1e-8)


def test_quadrature_and_antiderivative():
    g = make_grid(4, 16)
    assert g.weights.sum() == pytest.approx(1.0, abs=1e-14)
    assert g.weights @ g.y ** 9 == pytest.approx(0.1, abs=1e-14)
    f = np.tile(np.cos(g.y), (4, 1))
    F = antiderivative_y(f)
    np.testing.assert_allclose(F, np.tile(np.sin(g.y) - np.sin(1.0), (4, 1)), atol=1e-13)


def test_fourier_derivatives_exact():
    nx = 32
    x = np.arange(nx) / nx
    f = np.sin(2 * np.pi * 3 * x) + 0.5 * np.cos(2 * np.pi * 5 * x)
    d1 = 2 * np.pi * 3 * np.cos(2 * np.pi * 3 * x) - 0.5 * 2 * np.pi * 5 * np.sin(2 * np.pi * 5 * x)
    np.testing.assert_allclose(differentiate(f, "x", 1), d1, atol=1e-11)
    d4 = (2 * np.pi * 3) ** 4 * np.sin(2 * np.pi * 3 * x) + 0.5 * (2 * np.pi * 5) ** 4 * np.cos(2 * np.pi * 5 * x)
    np.testing.assert_allclose(differentiate(f, "x", 4), d4, rtol=1e-12, atol=1e-7)
    with pytest.raises(UnsupportedError):
        differentiate(f, "x", 5)


def test_nyquist_annihilated_by_odd_symbol():
    nx = 16
    x = np.arange(nx) / nx
    f = np.cos(np.pi * nx * x)
    np.testing.assert_allclose(differentiate(f, "x", 1), 0, atol=1e-12)
    out = apply_multiplier(abs_dx(1.0), f)
    assert np.isrealobj(out)


def test_abs_dx_symbol_uses_two_pi():
    nx = 16
    x = np.arange(nx) / nx
    f = np.cos(2 * np.pi * 2 * x)
    np.testing.assert_allclose(apply_multiplier(abs_dx(1.0), f), 4 * np.pi * f, atol=1e-12)
    np.testing.assert_allclose(apply_multiplier(abs_dx(1.0), np.ones(nx)), 0, atol=1e-14)
    w = apply_multiplier(delta_weight(2.0, 0.1), f)
    np.testing.assert_allclose(w, (1 + 0.4 * np.pi) ** 2 * f, atol=1e-12)
    composed = dx_symbol(1) * dx_symbol(1)
    np.testing.assert_allclose(apply_multiplier(composed, f), -(4 * np.pi) ** 2 * f, atol=1e-10)


def test_surface_norms():
    nx = 32
    x = np.arange(nx) / nx
    f = 2.0 * np.cos(2 * np.pi * x)
    # Parseval: |f|_0^2 = mean f^2 = 2
    assert surface_norm(f) == pytest.approx(math.sqrt(2.0), rel=1e-14)
    assert surface_norm(f, 1.0) == pytest.approx(math.sqrt(2.0 * (1 + 4 * np.pi ** 2)), rel=1e-14)
    assert homogeneous_norm(np.ones(nx), 1.0) == 0.0
    assert homogeneous_norm(f, 0.5) == pytest.approx(math.sqrt(2.0 * 2 * np.pi), rel=1e-14)
    assert surface_inner(f, f) == pytest.approx(2.0, rel=1e-14)
    sym = sobolev_symbol(2.0)(np.array([1]))[0]
    assert sym.real == pytest.approx(1 + 4 * np.pi ** 2)


def test_bulk_norms():
    g = make_grid(16, 16)
    X, Y = np.array(g.X), np.array(g.Y)
    f = np.cos(2 * np.pi * X) * Y
    # ||f||_0^2 = 1/2 * 1/3
    assert l2_bulk(f) == pytest.approx(math.sqrt(1 / 6), rel=1e-13)
    assert bulk_inner(f, f) == pytest.approx(1 / 6, rel=1e-13)
    expected = 1 / 6 + (2 * np.pi) ** 2 / 6 + 0.5
    assert bulk_norm(f, 1) ** 2 == pytest.approx(expected, rel=1e-12)
    with pytest.raises(UnsupportedError):
        bulk_norm(f, 5)


def test_dealias_and_coefficients():
    nx = 24
    x = np.arange(nx) / nx
    f = np.cos(2 * np.pi * 3 * x) + np.cos(2 * np.pi * 9 * x)
    np.testing.assert_allclose(dealias(f), np.cos(2 * np.pi * 3 * x), atol=1e-14)
    c = to_coeffs(f)
    assert c[3] == pytest.approx(0.5)
    np.testing.assert_allclose(from_coeffs(c), f, atol=1e-14)
