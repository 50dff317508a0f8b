"""Pressure on the flattened strip.

The pressure solves  div_delta(A6 grad_delta p) = g  with p = phi on the surface
and (p + g0)_y = 0 on the bottom.  It is computed through the fixed point
q = p + g0,

    Delta_delta q = g + div_delta(grad_delta g0 - N6 grad_delta p),
    q = phi + g0 on y = 1,   q_y = 0 on y = 0,

each sweep being a set of independent two-point problems, one per Fourier mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import PressureSolverError
from .spectral import make_grid
from .transform import BoundaryTerms, TransformAssembly, matvec

__all__ = ["PressureData", "assemble_pressure_data", "solve_pressure", "delta_laplacian_solver",
           "pressure_source"]


@dataclass
class PressureData:
    g: np.ndarray          # bulk source (nx, ny)
    g0: np.ndarray         # bottom correction (nx, ny)
    phi: np.ndarray        # surface datum (nx,)
    N6: np.ndarray         # nonlinear part of the coefficient matrix (2, 2, nx, ny)
    delta: float


@lru_cache(maxsize=32)
def delta_laplacian_solver(nx: int, ny: int, delta: float):
    """LU factors of (D^2 - delta^2 k^2) with Dirichlet top / Neumann bottom rows, per mode."""
    g = make_grid(nx, ny)
    D = g.Dy
    D2 = g.Dy_power(2)
    facs = []
    for n in range(nx // 2 + 1):
        k = 2.0 * np.pi * n
        A = D2 - (delta * k) ** 2 * np.eye(ny)
        A[-1, :] = 0.0
        A[-1, -1] = 1.0
        A[0, :] = D[0]
        facs.append(scipy.linalg.lu_factor(A))
    return facs


def _solve_modes(rhs, top, nx, ny, delta):
    """Solve Delta_delta q = rhs, q(1) = top, q_y(0) = 0 mode by mode (real fields)."""
    facs = delta_laplacian_solver(nx, ny, delta)
    rh = np.fft.rfft(rhs, axis=0)
    th = np.fft.rfft(top)
    out = np.empty_like(rh)
    for n, fac in enumerate(facs):
        b = rh[n].copy()
        b[-1] = th[n]
        b[0] = 0.0
        out[n] = scipy.linalg.lu_solve(fac, b.real) + 1j * scipy.linalg.lu_solve(fac, b.imag)
    return np.fft.irfft(out, n=nx, axis=0)


def pressure_source(asm: TransformAssembly, u, v):
    """g = -(R/2) J { tr(F1 F2 + F2 F1) u_y + eps^{-1} tr(F2^2) }, evaluated eps-safely."""
    prm = asm.params
    eps, d, R = prm.epsilon, prm.delta, prm.reynolds
    ops = asm.ops
    Jinv, a1, a1y = asm.Jinv, asm.a1, asm.a1_y
    Jinv_y = ops.dy(Jinv)
    u_y = ops.dy(u)
    v_y = ops.dy(v)
    Yphys = asm.grid.Y * (1.0 + eps * asm.ext.values)
    # entries of F2 divided by eps where they carry an eps factor
    F11 = d * ops.dx(Jinv * u) + a1 * Jinv_y * u
    F12 = d * ops.dx(-a1 * u + d * v) - a1 * a1y * u + d * a1 * v_y
    F21 = eps * Jinv * Jinv_y * u + (2.0 - 2.0 * Yphys)
    F22 = -Jinv * a1y * u + d * Jinv * v_y
    # F1 = [[a1 J^-1, -a1^2], [J^-2, -a1 J^-1]]
    G11, G12, G21, G22 = a1 * Jinv, -a1 ** 2, Jinv ** 2, -a1 * Jinv
    # tr(F1 F2 + F2 F1) = 2 tr(F1 F2) with F2 = (eps F11, eps F12; F21, eps F22)
    tr12 = 2.0 * (G11 * eps * F11 + G12 * F21 + G21 * eps * F12 + G22 * eps * F22)
    tr22 = eps * (F11 ** 2 + F22 ** 2) + 2.0 * F12 * F21
    return -0.5 * R * asm.J * (tr12 * u_y + tr22)


def assemble_pressure_data(asm: TransformAssembly, u, v, eta, bt: BoundaryTerms) -> PressureData:
    prm = asm.params
    d = prm.delta
    ops = asm.ops
    g = pressure_source(asm, u, v)
    g0 = 0.5 * (d * ops.dx(asm.Jinv * u) + asm.Jinv * asm.a1_y * u)
    eta = np.asarray(eta, dtype=float)
    phi = (-d * ops.surf(ops.dx(u)) + eta * prm.inv_tan_alpha
           - d ** 2 * prm.weber * ops.sdx(eta, 2) / math.sin(prm.alpha) + bt.h2)
    return PressureData(g=g, g0=g0, phi=phi, N6=asm.N6, delta=d)


def solve_pressure(data: PressureData, tol: float = 1e-10, max_iter: int = 200, p0=None,
                   return_info: bool = False):
    """Fixed-point solve of the pressure problem; raises when the iteration fails to contract."""
    nx, ny = data.g.shape
    d = data.delta
    grid = make_grid(nx, ny)
    from .transform import Ops
    ops = Ops(grid)
    div = lambda vec: d * ops.dx(vec[0]) + ops.dy(vec[1])
    grad = lambda f: np.array([d * ops.dx(f), ops.dy(f)])
    base = data.g + div(grad(data.g0))
    top = data.phi + data.g0[:, -1]
    nonlinear = bool(np.any(data.N6 != 0))
    p = np.zeros((nx, ny)) if p0 is None else np.array(p0, dtype=float)
    if not nonlinear:
        q = _solve_modes(base, top, nx, ny, d)
        p = q - data.g0
        return (p, {"iterations": 1, "update": 0.0}) if return_info else p
    prev = np.inf
    upd = np.inf
    for it in range(1, max_iter + 1):
        rhs = base - div(matvec(data.N6, grad(p)))
        q = _solve_modes(rhs, top, nx, ny, d)
        p_new = q - data.g0
        upd = float(np.max(np.abs(p_new - p))) / max(1.0, float(np.max(np.abs(p_new))))
        p = p_new
        if not np.isfinite(upd) or (it > 5 and upd > 2.0 * prev and upd > 1e-6):
            raise PressureSolverError(f"pressure fixed point diverges (update {upd:.3e} at sweep {it})")
        if upd < tol:
            break
        prev = upd
    else:
        raise PressureSolverError(f"pressure fixed point did not converge (update {upd:.3e})")
    return (p, {"iterations": it, "update": upd}) if return_info else p
