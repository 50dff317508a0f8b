import math

import numpy as np
import pytest
import sympy as sp

from filmcascade.params import ScalingParams
from filmcascade.pressure import PressureData, assemble_pressure_data, solve_pressure
from filmcascade.spectral import make_grid
from filmcascade.transform import assemble_boundary_terms, build_transform


def empty_data(nx, ny, delta, phi):
    z = np.zeros((nx, ny))
    return PressureData(g=z, g0=z, phi=phi, N6=np.zeros((2, 2, nx, ny)), delta=delta)


def harmonic_error(ny=48, delta=0.3, nx=16):
    """Max error for the delta-harmonic field cos(2 pi x) cosh(2 pi delta y)."""
    g = make_grid(nx, ny)
    X, Y = np.array(g.X), np.array(g.Y)
    exact = np.cos(2 * np.pi * X) * np.cosh(2 * np.pi * delta * Y)
    p = solve_pressure(empty_data(nx, ny, delta, exact[:, -1]))
    return float(np.max(np.abs(p - exact)))


def zero_data_pressure(nx=16, ny=24, delta=0.1):
    return float(np.max(np.abs(solve_pressure(empty_data(nx, ny, delta, np.zeros(nx))))))


def linear_mode_error():
    """eps = 0: one Fourier mode against the exact two-point BVP solution (relative max error)."""
    nx, ny = 16, 32
    delta, R, W, alpha = 0.2, 0.7, 0.9, 0.5
    k = 2 * np.pi
    prm = ScalingParams(delta, 0.0, R, W, alpha)
    g = make_grid(nx, ny)
    X, Y = np.array(g.X), np.array(g.Y)
    f = lambda y: y ** 2 + 0.5 * y ** 3
    fp = lambda y: 2 * y + 1.5 * y ** 2
    # stream function f(y) cos(kx): u = f' cos, v = k f sin
    u = fp(Y) * np.cos(k * X)
    v = k * f(Y) * np.sin(k * X)
    eta = 0.3 * np.cos(k * g.x)
    asm = build_transform(eta, prm, ny)
    bt = assemble_boundary_terms(asm, u, v, eta)
    p = solve_pressure(assemble_pressure_data(asm, u, v, eta, bt))

    # linearised pressure: Lap_delta p = -R (2 - 2y) delta^2 v_x,
    # p_y(0) = -(delta/2) u_xy(0), p(1) = -delta u_x(1) + eta cot(a) - delta^2 W eta_xx / sin(a)
    y = sp.symbols("y")
    kap = sp.nsimplify(delta) * 2 * sp.pi
    fs = y ** 2 + sp.Rational(1, 2) * y ** 3
    Pc, Ps = sp.Function("Pc"), sp.Function("Ps")
    d, Rs = sp.nsimplify(delta), sp.nsimplify(R)
    src_c = -Rs * (2 - 2 * y) * d ** 2 * (2 * sp.pi) ** 2 * fs
    top_c = 0.3 / math.tan(alpha) + delta ** 2 * W * k ** 2 * 0.3 / math.sin(alpha)
    top_s = delta * k * fp(1.0)
    slope_s = 0.5 * delta * k * 2.0          # -(delta/2) d/dy(-k f' sin) at y = 0
    sol_c = sp.dsolve(sp.Eq(Pc(y).diff(y, 2) - kap ** 2 * Pc(y), src_c), Pc(y),
                      ics={Pc(y).diff(y).subs(y, 0): 0, Pc(1): sp.Float(top_c, 30)}).rhs
    sol_s = sp.dsolve(sp.Eq(Ps(y).diff(y, 2) - kap ** 2 * Ps(y), 0), Ps(y),
                      ics={Ps(y).diff(y).subs(y, 0): sp.Float(slope_s, 30), Ps(1): sp.Float(top_s, 30)}).rhs
    pc = sp.lambdify(y, sol_c, "numpy")(g.y)
    ps = sp.lambdify(y, sol_s, "numpy")(g.y)
    oracle = np.cos(k * X) * pc[None, :] + np.sin(k * X) * ps[None, :]
    return float(np.max(np.abs(p - oracle)) / max(1.0, np.max(np.abs(oracle))))


def test_manufactured_delta_harmonic():
    assert harmonic_error() < 1e-8


def test_zero_data_gives_zero_pressure():
    assert zero_data_pressure() < 1e-12


def test_linear_single_mode_against_bvp_oracle():
    assert linear_mode_error() < 1e-8


def test_nonlinear_pressure_converges():
    nx, ny = 32, 24
    prm = ScalingParams(0.2, 0.3, 0.5, 0.4, math.pi / 6)
    g = make_grid(nx, ny)
    X, Y = np.array(g.X), np.array(g.Y)
    eta = 0.5 * np.cos(2 * np.pi * g.x)
    u = Y * (2 - Y) * np.cos(2 * np.pi * X) * 0.1
    v = np.zeros_like(u)
    asm = build_transform(eta, prm, ny)
    bt = assemble_boundary_terms(asm, u, v, eta)
    p, info = solve_pressure(assemble_pressure_data(asm, u, v, eta, bt), return_info=True)
    assert info["update"] < 1e-10 and np.all(np.isfinite(p))
