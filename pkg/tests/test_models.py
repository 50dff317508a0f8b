import math

import numpy as np
import pytest

from filmcascade.errors import FilmRuptureError, ParameterError
from filmcascade.models import (ModelKind, ModelSolver, ModelState, benney_coefficients, integrate_model,
                                linear_symbol, model_rhs, step_model)
from filmcascade.params import ScalingParams

KINDS = ["burgers", "kdvb", "kawahara", "benney"]
PRM = ScalingParams(0.1, 0.1, 0.5, 0.4, math.pi / 6)


def grid(nx=32):
    return np.arange(nx) / nx


def test_coefficient_golden_values():
    c = benney_coefficients(math.pi / 4, 0.0, 0.3)
    assert c.B1 == pytest.approx(2 / 3, abs=1e-14)
    assert c.D1 == pytest.approx(-2.0, abs=1e-14)
    assert benney_coefficients(math.pi / 2, 0.0, 1.0).G1 == pytest.approx(-2 / 3, abs=1e-14)


def test_coefficients_by_hand():
    a, R, W = 0.7, 0.9, 1.7
    ct = 1 / math.tan(a)
    c = benney_coefficients(a, R, W)
    assert c.B1 == pytest.approx(8 / 15 * (5 / 4 * ct - R), rel=1e-14)
    assert c.D1 == pytest.approx(-2 - 22 / 63 * R * R + 40 / 63 * R * ct, rel=1e-14)
    g = (-2 / 3 * W / math.sin(a) - 157 / 56 * R - 8 / 45 * R * ct * ct
         + 138904 / 155925 * R * R * ct - 1213952 / 2027025 * R ** 3)
    assert c.G1 == pytest.approx(g, rel=1e-14)
    with pytest.raises(ParameterError):
        benney_coefficients(0.0, 1.0, 1.0)


def test_linear_symbol_sign_convention():
    # d^2 D1 eta_xxx acting on e^{ikx} gives -i d^2 D1 k^3
    p = PRM
    c = benney_coefficients(p.alpha, p.reynolds, p.weber)
    k = 2 * np.pi
    lam = linear_symbol("kawahara", p, 1)
    expected = -2j * k - p.delta * c.B1 * k ** 2 - 1j * p.delta ** 2 * c.D1 * k ** 3 + p.delta ** 3 * c.G1 * k ** 4
    assert lam == pytest.approx(expected, rel=1e-14)
    assert linear_symbol("burgers", p, 0) == 0


def test_rhs_matches_finite_formula():
    nx = 64
    x = grid(nx)
    eta = 0.2 * np.cos(2 * np.pi * x) + 0.1 * np.sin(4 * np.pi * x)
    ex = 0.2 * -2 * np.pi * np.sin(2 * np.pi * x) + 0.1 * 4 * np.pi * np.cos(4 * np.pi * x)
    exx = 0.2 * -(2 * np.pi) ** 2 * np.cos(2 * np.pi * x) - 0.1 * (4 * np.pi) ** 2 * np.sin(4 * np.pi * x)
    exxx = 0.2 * (2 * np.pi) ** 3 * np.sin(2 * np.pi * x) - 0.1 * (4 * np.pi) ** 3 * np.cos(4 * np.pi * x)
    exxxx = 0.2 * (2 * np.pi) ** 4 * np.cos(2 * np.pi * x) + 0.1 * (4 * np.pi) ** 4 * np.sin(4 * np.pi * x)
    p = PRM
    c = benney_coefficients(p.alpha, p.reynolds, p.weber)
    d, e = p.delta, p.epsilon
    expected = (-2 * ex - 4 * e * eta * ex + d * c.B1 * exx + d * d * c.D1 * exxx + d ** 3 * c.G1 * exxxx)
    rhs = model_rhs(ModelState(eta, 0.0, p, "kawahara"))
    np.testing.assert_allclose(rhs, expected, atol=1e-9)


def test_benney_rhs_matches_flux_form():
    nx = 64
    x = grid(nx)
    p = PRM
    eta = 0.2 * np.cos(2 * np.pi * x)
    h = 1 + eta
    hx = -0.2 * 2 * np.pi * np.sin(2 * np.pi * x)
    hxx = -0.2 * (2 * np.pi) ** 2 * np.cos(2 * np.pi * x)
    hxxx = 0.2 * (2 * np.pi) ** 3 * np.sin(2 * np.pi * x)
    hxxxx = 0.2 * (2 * np.pi) ** 4 * np.cos(2 * np.pi * x)
    ct = 1 / math.tan(p.alpha)
    wt = p.weber_tilde
    d, R, s = p.delta, p.reynolds, math.sin(p.alpha)
    # eta_t + d/dx Q = 0 with Q = 2/3 h^3 - d (2ct/3 h^3 hx - 8R/15 h^6 hx - 2 wt/(3 s) h^3 hxxx)
    dQ = (2 * h * h * hx
          - d * (2 * ct / 3 * (3 * h * h * hx * hx + h ** 3 * hxx)
                 - 8 * R / 15 * (6 * h ** 5 * hx * hx + h ** 6 * hxx)
                 - 2 * wt / (3 * s) * (3 * h * h * hx * hxxx + h ** 3 * hxxxx)))
    rhs = model_rhs(ModelState(eta, 0.0, p, "benney"))
    np.testing.assert_allclose(rhs, -dQ, atol=1e-8)


@pytest.mark.parametrize("kind", KINDS)
def test_linear_exactness(kind):
    p = PRM.replace(epsilon=0.0)
    x = grid()
    eta = 1e-3 * np.cos(2 * np.pi * x + 0.3)
    out = integrate_model(ModelState(eta, 0.0, p, kind, linearized=True), 1.0, tol=1e-12)
    lam = linear_symbol(kind, p, 1)
    exact = (1e-3 * np.exp(lam) * np.exp(2j * np.pi * x + 0.3j)).real
    assert np.max(np.abs(out.eta - exact)) / np.max(np.abs(exact)) < 1e-8


@pytest.mark.parametrize("kind", KINDS)
def test_mass_conservation(kind):
    x = grid()
    eta = 0.3 * np.cos(2 * np.pi * x) + 0.1 * np.sin(6 * np.pi * x) + 0.05
    s = ModelState(eta, 0.0, PRM, kind)
    m0 = eta.mean()
    for _ in range(1000):
        s = step_model(s, 1e-3)
    assert abs(s.eta.mean() - m0) < 1e-10


def test_same_model_identical_trajectory():
    x = grid()
    eta = 0.2 * np.cos(2 * np.pi * x)
    a = integrate_model(ModelState(eta, 0.0, PRM, "kawahara"), 0.5, tol=1e-10)
    b = integrate_model(ModelState(eta.copy(), 0.0, PRM, "kawahara"), 0.5, tol=1e-10)
    assert np.array_equal(a.eta, b.eta)


def test_adaptive_matches_fixed_step():
    x = grid()
    eta = 0.5 * np.cos(2 * np.pi * x)
    s = ModelState(eta, 0.0, PRM, "kawahara")
    ref = ModelSolver("kawahara", PRM, 32).integrate(s, 1.0, dt=1e-3, adaptive=False)
    out = integrate_model(s, 1.0, tol=1e-11)
    assert np.max(np.abs(out.eta - ref.eta)) < 1e-8


def test_benney_rupture_error():
    x = grid()
    with pytest.raises(FilmRuptureError):
        model_rhs(ModelState(-1.5 + 0.1 * np.cos(2 * np.pi * x), 0.0, PRM, "benney"))


def test_kind_parsing():
    assert ModelKind.parse("KdV-Burgers") is ModelKind.KDVB
    with pytest.raises(ParameterError):
        ModelKind.parse("kdv")
    with pytest.raises(ParameterError):
        step_model(ModelState(np.zeros(8), 0.0, PRM, "burgers"), 0.0)
