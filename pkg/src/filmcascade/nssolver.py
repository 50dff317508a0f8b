"""Time integration of the flattened free-surface Navier-Stokes system.

Discretisation
--------------
Each Fourier mode n != 0 is written with a stream function psi (u = psi_y,
v = -ik psi), so that u_x + v_y = 0 and u = v = 0 at the wall hold exactly.
Eliminating the pressure between the two momentum components gives

    delta d/dt (D^2 - d^2k^2) psi = -delta ik [ubar (D^2 - d^2k^2) + 2] psi
                                    + (1/R) (D^2 - d^2k^2)^2 psi + D F1x - delta ik F1y

in the interior.  The surface rows carry the tangential stress balance
(algebraic), the x-momentum equation at y = 1 with the normal stress balance
substituted for p, and the kinematic equation for eta.  The mean mode carries
the mean streamwise velocity.  Linear terms are implicit, every nonlinear term
(F1, b3 eta + h1, h2, h3) is explicit; the pressure problem is solved at every
step to supply A4 grad p and the diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional

import numpy as np
import scipy.linalg

from .errors import BlowUpError, ContractError, GeometryError, ParameterError
from .params import ScalingParams
from .pressure import assemble_pressure_data, solve_pressure
from .spectral import dealias_mask, l2_bulk, make_grid
from .transform import (
    BoundaryTerms,
    TransformAssembly,
    assemble_boundary_terms,
    assemble_bulk_terms,
    build_transform,
    nonlinear_f,
    matvec,
    _ops_for,
)

__all__ = [
    "NSState",
    "NSSolver",
    "Rates",
    "compatible_initial_state",
    "check_compatibility",
    "solve_state_pressure",
    "state_rates",
    "step_ns",
    "run_ns",
    "divergence_residual",
    "boundary_residuals",
]


@dataclass
class NSState:
    eta: np.ndarray
    u: np.ndarray
    v: np.ndarray
    p: np.ndarray
    t: float
    params: ScalingParams

    @property
    def nx(self):
        return self.u.shape[0]

    @property
    def ny(self):
        return self.u.shape[1]

    def copy(self, **changes):
        return replace(self, **changes)

    @classmethod
    def zero(cls, params, nx, ny):
        z = np.zeros((nx, ny))
        return cls(np.zeros(nx), z.copy(), z.copy(), z.copy(), 0.0, params)


@dataclass
class Rates:
    eta_t: np.ndarray
    u_t: np.ndarray
    v_t: np.ndarray
    p: np.ndarray


# --------------------------------------------------------------------------- residuals

def divergence_residual(state: NSState) -> float:
    ops = _ops_for(make_grid(state.nx, state.ny))
    return l2_bulk(ops.dx(state.u) + ops.dy(state.v))


def kinematic_rate(state: NSState):
    """eta_t = v|_surface - eta_x + h3 with h3 = d/dx(eps^2 eta^3 / 3)."""
    ops = _ops_for(make_grid(state.nx, state.ny))
    eps = state.params.epsilon
    return state.v[:, -1] - ops.sdx(state.eta) + ops.sdx(eps ** 2 * state.eta ** 3 / 3.0)


def _drop_nyquist(f):
    """Remove the unresolved +-N/2 mode (the solver keeps it at zero)."""
    nx = f.shape[0]
    if nx % 2:
        return f
    fh = np.fft.rfft(f)
    fh[-1] = 0.0
    return np.fft.irfft(fh, n=nx)


def boundary_residuals(state: NSState, asm: Optional[TransformAssembly] = None,
                       bt: Optional[BoundaryTerms] = None) -> Dict[str, float]:
    """Max-norm residuals of the tangential and normal stress balances, and no-slip."""
    prm = state.params
    d = prm.delta
    if asm is None:
        asm = build_transform(state.eta, prm, state.ny)
    if bt is None:
        bt = assemble_boundary_terms(asm, state.u, state.v, state.eta)
    ops = asm.ops
    u_y = ops.surf(ops.dy(state.u))
    v_x = ops.surf(ops.dx(state.v))
    v_y = ops.surf(ops.dy(state.v))
    tang = _drop_nyquist(d ** 2 * v_x + u_y - (2.0 + bt.b3) * state.eta - bt.h1)
    normal = _drop_nyquist(state.p[:, -1] - d * v_y - state.eta * prm.inv_tan_alpha
                           + d ** 2 * prm.weber / math.sin(prm.alpha) * ops.sdx(state.eta, 2) - bt.h2)
    return {
        "tangential": float(np.max(np.abs(tang))),
        "normal": float(np.max(np.abs(normal))),
        "no_slip": float(max(np.max(np.abs(state.u[:, 0])), np.max(np.abs(state.v[:, 0])))),
    }


# --------------------------------------------------------------------------- pressure and rates

def solve_state_pressure(state: NSState, asm=None, bt=None, p0=None):
    prm = state.params
    if asm is None:
        asm = build_transform(state.eta, prm, state.ny)
    if bt is None:
        bt = assemble_boundary_terms(asm, state.u, state.v, state.eta)
    data = assemble_pressure_data(asm, state.u, state.v, state.eta, bt)
    return solve_pressure(data, p0=p0 if p0 is not None else state.p)


def state_rates(state: NSState, with_pressure: bool = True) -> Rates:
    """(eta_t, u_t, v_t) from the kinematic and momentum equations at the current state.

    The pressure is recomputed from the elliptic problem unless ``with_pressure``
    is False, in which case ``state.p`` is trusted.
    """
    prm = state.params
    d, R = prm.delta, prm.reynolds
    eta_t = kinematic_rate(state)
    asm = build_transform(state.eta, prm, state.ny, eta_t=eta_t)
    bt = assemble_boundary_terms(asm, state.u, state.v, state.eta)
    p = solve_state_pressure(state, asm, bt) if with_pressure else state.p
    ops = asm.ops
    u, v = state.u, state.v
    f = nonlinear_f(asm, u, v)
    gp = np.array([d * ops.dx(p), ops.dy(p)])
    A4gp = matvec(asm.A4, gp)
    ubar, ubar_y = asm.U[0], asm.ubar_y
    u_yy = ops.dy(u, 2)
    F1x = f[0] - (2.0 / R) * A4gp[0] + asm.b2 * u_yy / R
    F1y = f[1] - (2.0 / R) * A4gp[1]
    u_t = (-d * ubar * ops.dx(u) - d * ubar_y * v - (2.0 / R) * d * ops.dx(p)
           + (u_yy + d ** 2 * ops.dx(u, 2)) / R + F1x) / d
    v_t = (-d ** 2 * ubar * ops.dx(v) - (2.0 / R) * ops.dy(p)
           + (d / R) * (ops.dy(v, 2) + d ** 2 * ops.dx(v, 2)) + F1y) / d ** 2
    return Rates(eta_t=eta_t, u_t=u_t, v_t=v_t, p=p)


# --------------------------------------------------------------------------- solver

class NSSolver:
    """IMEX integrator for one parameter set and resolution.

    ``scheme`` is 'sbdf2' (default), 'cnab2' or 'euler' (first-order baseline).
    ``nonlinear=False`` drops every nonlinear term (the epsilon -> 0 linearisation).

    The variable-coefficient viscous term b2 u_yy / R is split as
    lam u_yy / R (implicit) + (b2 - lam) u_yy / R (explicit).  Treating all of
    it explicitly is unstable for SBDF2/CNAB2 once |eps eta| ~ 0.2.  With
    ``visc_shift=None`` lam is set from max(b2), rounded up to a multiple of
    0.1 and only ever increased; each increase restarts the multistep history.
    """

    def __init__(self, params: ScalingParams, nx: int, ny: int, dt: float, scheme: str = "sbdf2",
                 nonlinear: bool = True, bc_tol: float = 1e-11, bc_iter: int = 30,
                 pressure_every_step: bool = True, visc_shift: Optional[float] = None):
        params.require_inclined()
        if scheme not in ("sbdf2", "cnab2", "euler"):
            raise ParameterError(f"unknown time scheme {scheme!r}")
        if dt <= 0:
            raise ParameterError("dt must be positive")
        self.params = params
        self.nx, self.ny, self.dt = int(nx), int(ny), float(dt)
        self.scheme = scheme
        self.nonlinear = nonlinear and params.epsilon > 0
        self.bc_tol = bc_tol
        self.bc_iter = bc_iter
        self.pressure_every_step = pressure_every_step
        self.auto_shift = visc_shift is None
        self.visc_shift = 0.0 if visc_shift is None else float(visc_shift)
        self.grid = make_grid(self.nx, self.ny)
        self.ops = _ops_for(self.grid)
        self.nmodes = self.nx // 2 + 1
        self.mask = dealias_mask(self.nx)[: self.nmodes].astype(float)
        if self.nx % 2 == 0:
            self.mask[-1] = 0.0
        self._build_operators()
        self._prev_N = None
        self._factor_cache = {}
        self.steps_taken = 0

    # ---------------------------------------------------------------- linear operators
    def _build_operators(self):
        prm = self.params
        d, R = prm.delta, prm.reynolds
        g = self.grid
        ny = self.ny
        D = g.Dy
        D2 = g.Dy_power(2)
        D3 = g.Dy_power(3)
        D4 = g.Dy_power(4)
        I = np.eye(ny)
        ub = 2.0 * g.y - g.y ** 2
        self.M = []
        self.A = []
        self.S = []            # implicit part of u_yy / R, scaled by visc_shift
        self.alg = []          # algebraic (constraint) rows
        for n in range(self.nmodes):
            k = 2.0 * np.pi * n
            ik = 1j * k
            if n == 0:
                M = np.zeros((ny, ny), dtype=complex)
                A = np.zeros((ny, ny), dtype=complex)
                M[1:-1] = d * I[1:-1]
                A[1:-1] = D2[1:-1] / R
                A[0] = I[0]                       # U(0) = 0
                A[-1] = D[-1]                     # U_y(1) = 2 eta0 + ... (data)
                S = np.zeros((ny, ny), dtype=complex)
                S[1:-1] = D2[1:-1] / R
                alg = np.zeros(ny, dtype=bool)
                alg[0] = alg[-1] = True
            else:
                N = ny + 1
                L = D2 - (d * k) ** 2 * I
                M = np.zeros((N, N), dtype=complex)
                A = np.zeros((N, N), dtype=complex)
                M[:ny, :ny] = d * L
                A[:ny, :ny] = -d * ik * (np.diag(ub) @ L + 2.0 * I) + (L @ L) / R
                # wall rows
                M[0] = 0
                A[0] = 0
                A[0, 0] = 1.0
                M[1] = 0
                A[1] = 0
                A[1, :ny] = D[0]
                # dynamic condition at the surface (x-momentum with normal stress)
                G = prm.inv_tan_alpha + d ** 2 * prm.weber * k ** 2 / math.sin(prm.alpha)
                r = ny - 2
                M[r] = 0
                A[r] = 0
                M[r, :ny] = d * D[-1]
                A[r, :ny] = -d * ik * D[-1] + (D3[-1] - 3.0 * (d * k) ** 2 * D[-1]) / R
                A[r, ny] = -2.0 * d * ik * G / R
                # tangential stress balance
                r = ny - 1
                M[r] = 0
                A[r] = 0
                A[r, :ny] = D2[-1] + (d * k) ** 2 * I[-1]
                A[r, ny] = -2.0
                # kinematic condition
                M[ny, ny] = 1.0
                A[ny, ny] = -ik
                A[ny, ny - 1] = -ik
                S = np.zeros((N, N), dtype=complex)
                S[2:ny - 2, :ny] = D4[2:ny - 2] / R
                S[ny - 2, :ny] = D3[-1] / R
                alg = np.zeros(N, dtype=bool)
                alg[[0, 1, ny - 1]] = True
            self.M.append(M)
            self.A.append(A)
            self.S.append(S)
            self.alg.append(alg)

    def _op(self, n):
        if self.visc_shift == 0.0:
            return self.A[n]
        return self.A[n] + self.visc_shift * self.S[n]

    def _factor(self, key, coefM, coefA):
        fk = (key, coefM, coefA, self.visc_shift)
        if fk not in self._factor_cache:
            facs = []
            for n in range(self.nmodes):
                A = self._op(n)
                L = coefM * self.M[n] - coefA * A
                # constraint rows are always imposed at the new level
                alg = self.alg[n]
                L[alg] = -A[alg]
                # row equilibration keeps the boundary rows exact despite the D^4 scale
                scale = 1.0 / np.max(np.abs(L), axis=1)
                facs.append((scipy.linalg.lu_factor(L * scale[:, None]), scale))
            self._factor_cache[fk] = facs
        return self._factor_cache[fk]

    # ---------------------------------------------------------------- state <-> modes
    def to_modes(self, state: NSState):
        uh = np.fft.rfft(state.u, axis=0) / self.nx
        vh = np.fft.rfft(state.v, axis=0) / self.nx
        eh = np.fft.rfft(state.eta) / self.nx
        X = []
        for n in range(self.nmodes):
            if n == 0:
                X.append(uh[0].astype(complex))
            else:
                ik = 2j * np.pi * n
                psi = -vh[n] / ik
                X.append(np.concatenate([psi, [eh[n]]]))
        return X, eh[0].real

    def from_modes(self, X, eta0, t, p=None):
        ny, nx = self.ny, self.nx
        D = self.grid.Dy
        uh = np.zeros((self.nmodes, ny), dtype=complex)
        vh = np.zeros((self.nmodes, ny), dtype=complex)
        eh = np.zeros(self.nmodes, dtype=complex)
        eh[0] = eta0
        uh[0] = X[0]
        for n in range(1, self.nmodes):
            if self.nx % 2 == 0 and n == self.nmodes - 1:
                continue
            psi = X[n][:ny]
            uh[n] = D @ psi
            vh[n] = -2j * np.pi * n * psi
            eh[n] = X[n][ny]
        u = np.fft.irfft(uh * nx, n=nx, axis=0)
        v = np.fft.irfft(vh * nx, n=nx, axis=0)
        eta = np.fft.irfft(eh * nx, n=nx)
        if p is None:
            p = np.zeros((nx, ny))
        return NSState(eta, u, v, p, t, self.params)

    # ---------------------------------------------------------------- explicit terms
    def _boundary_data(self, state: NSState, asm=None):
        """Modal data of the constraint rows: tangential (b3 eta + h1)^ per mode."""
        if not self.nonlinear:
            return np.zeros(self.nmodes, dtype=complex), None, None
        if asm is None:
            asm = build_transform(state.eta, self.params, self.ny)
        bt = assemble_boundary_terms(asm, state.u, state.v, state.eta)
        # the constraint is imposed on every resolved mode (no dealiasing)
        tang = np.fft.rfft(bt.b3 * state.eta + bt.h1) / self.nx
        return tang, bt, asm

    def explicit_terms(self, state: NSState):
        """Per-mode explicit forcing vectors (differential rows) and constraint data."""
        prm = self.params
        d, R = prm.delta, prm.reynolds
        ny = self.ny
        nx = self.nx
        eh3 = np.zeros(self.nmodes, dtype=complex)
        if not self.nonlinear:
            zero = [np.zeros(ny if n == 0 else ny + 1, dtype=complex) for n in range(self.nmodes)]
            return zero, np.zeros(self.nmodes, dtype=complex), state.p, {}
        eta_t = kinematic_rate(state)
        asm = build_transform(state.eta, prm, ny, eta_t=eta_t)
        tang, bt, _ = self._boundary_data(state, asm)
        p = state.p
        if self.pressure_every_step:
            p = solve_state_pressure(state, asm, bt)
        ops = asm.ops
        f = nonlinear_f(asm, state.u, state.v)
        gp = np.array([d * ops.dx(p), ops.dy(p)])
        A4gp = matvec(asm.A4, gp)
        if self.auto_shift:
            self._update_shift(float(np.max(asm.b2)))
        F1x = f[0] - (2.0 / R) * A4gp[0] + (asm.b2 - self.visc_shift) * ops.dy(state.u, 2) / R
        F1y = f[1] - (2.0 / R) * A4gp[1]
        Fxh = np.fft.rfft(F1x, axis=0) / nx * self.mask[:, None]
        Fyh = np.fft.rfft(F1y, axis=0) / nx * self.mask[:, None]
        h2h = np.fft.rfft(bt.h2) / nx * self.mask
        h3h = np.fft.rfft(prm.epsilon ** 2 * state.eta ** 3 / 3.0) / nx * self.mask
        D = self.grid.Dy
        out = []
        for n in range(self.nmodes):
            k = 2.0 * np.pi * n
            ik = 1j * k
            if n == 0:
                vec = Fxh[0].copy()
                vec[0] = 0.0
                vec[-1] = 0.0
            else:
                vec = np.zeros(ny + 1, dtype=complex)
                vec[:ny] = D @ Fxh[n] - d * ik * Fyh[n]
                vec[0] = 0.0
                vec[1] = 0.0
                vec[ny - 2] = Fxh[n][-1] - 2.0 * d * ik * h2h[n] / R
                vec[ny - 1] = 0.0
                vec[ny] = ik * h3h[n]
            out.append(vec)
        return out, tang, p, {"asm": asm, "bt": bt}

    def _update_shift(self, b2max):
        lam = math.ceil(max(b2max, 0.0) / 0.1 - 1e-9) * 0.1
        if lam > self.visc_shift + 1e-12:
            self.visc_shift = round(lam, 10)
            self.reset_history()

    # ---------------------------------------------------------------- stepping
    def _constraint_rhs(self, n, tang_n, eta0):
        """Right-hand side entries for the algebraic rows (sign: -A X = rhs)."""
        if n == 0:
            return {0: 0.0, -1: -(2.0 * eta0 + tang_n)}
        return {0: 0.0, 1: 0.0, self.ny - 1: -tang_n}

    def step(self, state: NSState) -> NSState:
        dt = self.dt
        X, eta0 = self.to_modes(state)
        Nn, tang, p_now, _ = self.explicit_terms(state)
        first = self._prev_N is None or self.scheme == "euler"
        if first:
            facs = self._factor("euler", 1.0 / dt, 1.0)
        elif self.scheme == "sbdf2":
            facs = self._factor("sbdf2", 1.5 / dt, 1.0)
        else:
            facs = self._factor("cnab2", 1.0 / dt, 0.5)
        rhs_base = []
        for n in range(self.nmodes):
            M, A = self.M[n], self._op(n)
            if first:
                b = M @ X[n] / dt + Nn[n]
            elif self.scheme == "sbdf2":
                Xp, Np = self._prev_X[n], self._prev_N[n]
                b = M @ (4.0 * X[n] - Xp) / (2.0 * dt) + 2.0 * Nn[n] - Np
            else:
                Np = self._prev_N[n]
                b = (M / dt + 0.5 * A) @ X[n] + 1.5 * Nn[n] - 0.5 * Np
            rhs_base.append(b)
        # extrapolated constraint data as a predictor
        if first or self._prev_tang is None:
            tang_pred = tang
        else:
            tang_pred = 2.0 * tang - self._prev_tang
        Xnew = self._solve(facs, rhs_base, tang_pred, eta0)
        new = self.from_modes(Xnew, eta0, state.t + dt, p_now)
        # corrector: impose the tangential balance with data from the new state
        if self.nonlinear:
            acc = _Anderson()
            for it in range(self.bc_iter):
                tang_new, _, _ = self._boundary_data(new)
                self.last_bc_update = np.max(np.abs(tang_new - tang_pred)) * self.nx
                if self.last_bc_update < self.bc_tol:
                    break
                tang_pred = acc.update(tang_pred, tang_new)
                Xnew = self._solve(facs, rhs_base, tang_pred, eta0)
                new = self.from_modes(Xnew, eta0, state.t + dt, p_now)
        if not (np.all(np.isfinite(new.u)) and np.all(np.isfinite(new.eta))):
            raise BlowUpError(f"non-finite solution at t={new.t:g}", time=new.t)
        if np.min(1.0 + prm_eps(self.params) * new.eta) <= 0:
            raise GeometryError(f"the surface touched the bottom at t={new.t:g}")
        self._prev_X = X
        self._prev_N = Nn
        self._prev_tang = tang
        self.steps_taken += 1
        return new

    def _solve(self, facs, rhs_base, tang, eta0):
        out = []
        for n in range(self.nmodes):
            b = rhs_base[n].copy()
            for row, val in self._constraint_rhs(n, tang[n], eta0).items():
                b[row] = val
            if self.nx % 2 == 0 and n == self.nmodes - 1:
                out.append(np.zeros_like(b))
                continue
            lu, scale = facs[n]
            b = b * scale
            out.append(scipy.linalg.lu_solve(lu, b.real) + 1j * scipy.linalg.lu_solve(lu, b.imag))
        return out

    def reset_history(self):
        self._prev_N = None
        self._prev_X = None
        self._prev_tang = None

    _prev_X = None
    _prev_tang = None

    def finalize_pressure(self, state: NSState) -> NSState:
        """Attach the elliptic pressure of the state."""
        return state.copy(p=solve_state_pressure(state))


def prm_eps(params):
    return params.epsilon


class _Anderson:
    """Anderson mixing for a complex fixed point x = G(x) (least-squares, depth m)."""

    def __init__(self, m: int = 5):
        self.m = m
        self.X = []
        self.F = []

    def update(self, x, gx):
        f = gx - x
        self.X.append(gx.copy())
        self.F.append(f.copy())
        if len(self.F) > self.m + 1:
            self.X.pop(0)
            self.F.pop(0)
        if len(self.F) == 1:
            return gx
        dF = np.array([self.F[i + 1] - self.F[i] for i in range(len(self.F) - 1)]).T
        dX = np.array([self.X[i + 1] - self.X[i] for i in range(len(self.X) - 1)]).T
        gamma = np.linalg.lstsq(dF, f, rcond=None)[0]
        return gx - dX @ gamma


# --------------------------------------------------------------------------- initial data

def _stokes_profiles(eta_hat, extra, params: ScalingParams, nx: int, ny: int):
    """Quasi-static Stokes response to the surface, per mode n != 0:

        (D^2 - d^2 k^2)^2 psi = 0,  psi(0) = Dpsi(0) = 0,
        D^2 psi + d^2 k^2 psi = 2 eta + extra               at y = 1,
        D^3 psi - 3 d^2 k^2 D psi = 2 d ik G eta            at y = 1,

    that is, the flow driven by the hydrostatic and capillary pressure of eta
    with inertia and time derivatives dropped.  The mean mode is the shear
    U = (2 eta_0 + extra_0) y.
    """
    g = make_grid(nx, ny)
    d = params.delta
    D = g.Dy
    D2 = g.Dy_power(2)
    D3 = g.Dy_power(3)
    I = np.eye(ny)
    uh = np.zeros((nx // 2 + 1, ny), dtype=complex)
    vh = np.zeros_like(uh)
    uh[0] = (2.0 * eta_hat[0].real + extra[0].real) * g.y
    for n in range(1, nx // 2 + 1):
        if nx % 2 == 0 and n == nx // 2:
            continue
        k = 2.0 * np.pi * n
        G = params.inv_tan_alpha + d ** 2 * params.weber * k ** 2 / math.sin(params.alpha)
        L = D2 - (d * k) ** 2 * I
        A = (L @ L).astype(complex)
        b = np.zeros(ny, dtype=complex)
        A[0] = I[0]
        A[1] = D[0]
        A[-2] = D3[-1] - 3.0 * (d * k) ** 2 * D[-1]
        b[-2] = 2.0 * d * 1j * k * G * eta_hat[n]
        A[-1] = D2[-1] + (d * k) ** 2 * I[-1]
        b[-1] = 2.0 * eta_hat[n] + extra[n]
        scale = 1.0 / np.max(np.abs(A), axis=1)
        psi = np.linalg.solve(A * scale[:, None], b * scale)
        uh[n] = D @ psi
        vh[n] = -1j * k * psi
    return uh, vh


def _quadratic_profiles(eta_hat, extra, params: ScalingParams, nx: int, ny: int):
    """psi = c y^2 per mode, c fixed by the tangential balance."""
    g = make_grid(nx, ny)
    d = params.delta
    uh = np.zeros((nx // 2 + 1, ny), dtype=complex)
    vh = np.zeros_like(uh)
    for n in range(nx // 2 + 1):
        if nx % 2 == 0 and n == nx // 2:
            continue
        k = 2.0 * np.pi * n
        c = (2.0 * eta_hat[n] + extra[n]) / (2.0 + (d * k) ** 2)
        uh[n] = 2.0 * c * g.y
        vh[n] = -1j * k * c * g.y ** 2
    return uh, vh


def compatible_initial_state(eta0, params: ScalingParams, ny: int, method: str = "stokes",
                             iterations: int = 60, tol: float = 1e-13) -> NSState:
    """Velocity field compatible with eta0.

    Both methods build (u, v) from a stream function vanishing to second order
    at the wall, so the field is solenoidal with no slip, and enforce the
    tangential stress balance D^2 psi + d^2 k^2 psi - (2 + b3) eta = h1 at y = 1.
    ``method='stokes'`` uses the quasi-static Stokes response, which starts the
    flow close to its slow evolution; ``method='quadratic'`` uses psi = c y^2.
    The nonlinear data b3, h1 are updated by an accelerated fixed point and the
    pressure is then obtained from the elliptic problem.
    """
    if method not in ("stokes", "quadratic"):
        raise ParameterError(f"unknown initializer {method!r}")
    profiles = _stokes_profiles if method == "stokes" else _quadratic_profiles
    eta0 = np.asarray(eta0, dtype=float)
    nx = eta0.size
    eh = np.fft.rfft(eta0) / nx
    extra = np.zeros_like(eh)
    acc = _Anderson()
    state = None
    for it in range(iterations):
        uh, vh = profiles(eh, extra, params, nx, ny)
        u = np.fft.irfft(uh * nx, n=nx, axis=0)
        v = np.fft.irfft(vh * nx, n=nx, axis=0)
        state = NSState(eta0.copy(), u, v, np.zeros((nx, ny)), 0.0, params)
        if params.epsilon == 0:
            break
        asm = build_transform(eta0, params, ny)
        bt = assemble_boundary_terms(asm, u, v, eta0)
        new_extra = np.fft.rfft(bt.b3 * eta0 + bt.h1) / nx
        if np.max(np.abs(new_extra - extra)) < tol:
            extra = new_extra
            break
        extra = acc.update(extra, new_extra)
    return state.copy(p=solve_state_pressure(state))


def check_compatibility(state: NSState, tol: float = 1e-8) -> Dict[str, object]:
    """Residuals of the three compatibility conditions and an overall verdict."""
    div = divergence_residual(state)
    res = boundary_residuals(state)
    report = {
        "divergence": div,
        "tangential": res["tangential"],
        "no_slip": res["no_slip"],
    }
    report["passed"] = all(report[k] < tol for k in ("divergence", "tangential", "no_slip"))
    return report


# --------------------------------------------------------------------------- drivers

def step_ns(state: NSState, dt: float, solver: Optional[NSSolver] = None, **kw) -> NSState:
    """One step (creates a first-order-start solver when none is supplied)."""
    if solver is None:
        solver = NSSolver(state.params, state.nx, state.ny, dt, **kw)
    return solver.step(state)


@dataclass
class Trajectory:
    times: List[float] = field(default_factory=list)
    states: List[NSState] = field(default_factory=list)
    records: List[Dict[str, float]] = field(default_factory=list)


def run_ns(state: NSState, t_end: float, dt: float, record_every: int = 1,
           diagnostics: Optional[Callable[[NSState], Dict[str, float]]] = None,
           keep_states: bool = True, scheme: str = "sbdf2", nonlinear: bool = True,
           solver: Optional[NSSolver] = None) -> Trajectory:
    """Advance ``state`` to ``t_end`` recording every ``record_every`` steps."""
    traj = Trajectory()

    def record(s):
        traj.times.append(s.t)
        if keep_states:
            traj.states.append(s)
        if diagnostics is not None:
            rec = {"t": s.t}
            rec.update(diagnostics(s))
            traj.records.append(rec)

    record(state)
    if t_end <= state.t:
        return traj
    nsteps = int(math.ceil((t_end - state.t) / dt - 1e-9))
    if solver is None:
        solver = NSSolver(state.params, state.nx, state.ny, dt, scheme=scheme, nonlinear=nonlinear)
    s = state
    for i in range(1, nsteps + 1):
        s = solver.step(s)
        if i % record_every == 0 or i == nsteps:
            if solver.nonlinear is False or not solver.pressure_every_step:
                s = solver.finalize_pressure(s)
            record(s)
    return traj
