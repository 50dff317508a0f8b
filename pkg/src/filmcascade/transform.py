"""Flattening of the moving film onto the fixed strip.

The surface elevation eta is lifted into the strip by the Fourier multiplier
1 / (1 + (delta n (1 - y) y)^4), the strip is mapped onto the fluid domain by
(x, y) -> (x, y (1 + eps eta~)), and the velocity is transformed so that it
stays solenoidal.  This module assembles every geometric coefficient and every
nonlinear term of the resulting system on the collocation grid.

Vector fields are stored as arrays of shape (2, nx, ny) holding (u, delta v);
2x2 matrix fields have shape (2, 2, nx, ny).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ContractError, GeometryError
from .params import ScalingParams
from .spectral import Grid, make_grid, surface_norm, homogeneous_norm

__all__ = [
    "ExtendedSurface",
    "extend_surface",
    "extension_multiplier",
    "extension_audit",
    "TransformAssembly",
    "build_transform",
    "BoundaryTerms",
    "assemble_boundary_terms",
    "BulkTerms",
    "assemble_bulk_terms",
    "Ops",
    "matvec",
    "matmul",
    "GUARD",
]

GUARD = 1e-8


# --------------------------------------------------------------------------- grid operators

class Ops:
    """x/y differentiation on a fixed grid (spectral in x, collocation in y)."""

    def __init__(self, grid: Grid):
        self.g = grid
        self.nx, self.ny = grid.nx, grid.ny
        self._ik = 2j * np.pi * grid.n.astype(float)
        if self.nx % 2 == 0:
            self._ik_odd = self._ik.copy()
            self._ik_odd[self.nx // 2] = 0.0
        else:
            self._ik_odd = self._ik

    def dx(self, f, k=1):
        if k == 0:
            return f
        sym = self._ik_odd ** k if k % 2 else self._ik ** k
        fh = np.fft.fft(f, axis=-2)
        shape = [1] * f.ndim
        shape[-2] = self.nx
        return np.fft.ifft(fh * sym.reshape(shape), axis=-2).real

    def dy(self, f, k=1):
        if k == 0:
            return f
        return f @ self.g.Dy_power(k).T

    def surf(self, f):
        return f[..., -1]

    def sdx(self, f, k=1):
        """x-derivative of a surface field (nx,)."""
        if k == 0:
            return f
        sym = self._ik_odd ** k if k % 2 else self._ik ** k
        return np.fft.ifft(np.fft.fft(f) * sym).real

    def grad(self, b, delta):
        """Matrix (i, j) = nabla_delta_i b_j for a vector field b (2, nx, ny)."""
        return np.stack([delta * self.dx(b), self.dy(b)])


def matvec(M, b):
    return np.einsum("ij...,j...->i...", M, b)


def matmul(A, B):
    return np.einsum("ik...,kj...->ij...", A, B)


def transpose(M):
    return np.swapaxes(M, 0, 1)


def _eye(shape):
    I = np.zeros((2, 2) + tuple(shape))
    I[0, 0] = 1.0
    I[1, 1] = 1.0
    return I


def adv(a, M, b, ops: Ops, delta):
    """(a . M nabla_delta) b, i.e. sum_i a_i sum_j M_ij nabla_delta_j b."""
    G = ops.grad(b, delta)              # G[j, c] = nabla_j b_c
    D = np.einsum("ij...,jc...->ic...", M, G)
    return np.einsum("i...,ic...->c...", a, D)


# --------------------------------------------------------------------------- extension

_Q4 = Polynomial([0.0, 1.0, -1.0]) ** 4


@lru_cache(maxsize=64)
def _q4_derivs(y_key, jmax):
    y = np.frombuffer(y_key)
    out = [_Q4(y)]
    for j in range(1, jmax + 1):
        out.append(_Q4.deriv(j)(y))
    return np.array(out)


def extension_multiplier(n, delta, y, jmax=4):
    """y-derivatives (orders 0..jmax) of 1 / (1 + (delta n (1-y) y)^4).

    Returns an array of shape (jmax+1, len(n), len(y)).  The derivatives use
    the Leibniz recurrence for m (1 + P) = 1 with P = (delta n)^4 ((1-y) y)^4.
    """
    n = np.atleast_1d(np.asarray(n, dtype=float))
    y = np.ascontiguousarray(np.atleast_1d(np.asarray(y, dtype=float)))
    Q = _q4_derivs(y.tobytes(), max(jmax, 0))
    c = (delta * n) ** 4
    P = c[None, :, None] * Q[:, None, :]          # P^{(k)}
    m = np.empty((jmax + 1, n.size, y.size))
    onep = 1.0 + P[0]
    m[0] = 1.0 / onep
    for k in range(1, jmax + 1):
        acc = np.zeros_like(onep)
        for j in range(k):
            acc += math.comb(k, j) * m[j] * P[k - j]
        m[k] = -acc / onep
    return m


class ExtendedSurface:
    """eta~ on a grid, with exact x/y derivatives of the multiplier form."""

    def __init__(self, eta, delta: float, grid: Grid):
        eta = np.asarray(eta, dtype=float)
        if eta.shape != (grid.nx,):
            raise ValueError("surface field does not match grid")
        self.eta = eta
        self.delta = float(delta)
        self.grid = grid
        self.eta_hat = np.fft.fft(eta) / grid.nx
        self._m = extension_multiplier(grid.n, self.delta, grid.y, 4)
        self._cache: Dict = {}

    @property
    def values(self):
        return self.d(0, 0)

    def d(self, i=0, j=0):
        """d^i/dx^i d^j/dy^j of eta~ on the grid."""
        key = (i, j)
        if key not in self._cache:
            if j > 4:
                raise ValueError("only y-derivatives up to order 4 are tabulated")
            ik = 2j * np.pi * self.grid.n
            if i % 2 and self.grid.nx % 2 == 0:
                ik = ik.copy()
                ik[self.grid.nx // 2] = 0.0
            coef = (ik ** i) * self.eta_hat
            vals = np.fft.ifft(coef[:, None] * self._m[j], axis=0).real * self.grid.nx
            vals.setflags(write=False)
            self._cache[key] = vals
        return self._cache[key]


def extend_surface(eta, delta: float, ny: int) -> ExtendedSurface:
    eta = np.asarray(eta, dtype=float)
    return ExtendedSurface(eta, delta, make_grid(eta.size, ny))


def extension_audit(delta_list, i: int, j: int, trials: int = 50, nx: int = 64,
                    band: int = 8, seed: int = 0, nquad: int = 400):
    """Derivative-bound ratio maxima for the extension operator.

    For random band-limited eta (|n| <= band) computes
      r1 = ||dx^i dy^j eta~|| / (delta^j |dx^{i+j} eta|_0)
      r2 = ||dx^i dy^j eta~|| / (delta^{j-1/2} | |D_x|^{i+j-1/2} eta|_0)   (i + j >= 1)
    The strip norm uses Parseval in x and Gauss-Legendre quadrature in y of the
    exact multiplier derivatives, so it does not depend on a vertical grid.
    Returns a dict delta -> (max r1, max r2).
    """
    if j > 4:
        raise ValueError("j <= 4 required")
    rng = np.random.default_rng(seed)
    n = np.rint(np.fft.fftfreq(nx) * nx).astype(int)
    active = (np.abs(n) <= band) & (n != 0)
    xg, wg = np.polynomial.legendre.leggauss(nquad)
    yq = 0.5 * (xg + 1.0)
    wq = 0.5 * wg
    out = {}
    coeffs = []
    for _ in range(trials):
        c = np.zeros(nx, dtype=complex)
        pos = np.where((n > 0) & active)[0]
        vals = rng.standard_normal(pos.size) + 1j * rng.standard_normal(pos.size)
        vals /= (1.0 + n[pos]) ** 1.0
        c[pos] = vals
        c[(-n[pos]) % nx] = np.conj(vals)
        coeffs.append(c)
    kabs = np.abs(2.0 * np.pi * n)
    for delta in delta_list:
        m = extension_multiplier(n, delta, yq, j)[j]          # (nx, nq)
        mode_int = (m ** 2) @ wq                               # int_0^1 |m^{(j)}|^2 dy
        r1max = 0.0
        r2max = 0.0
        for c in coeffs:
            lhs2 = np.sum(np.abs(c) ** 2 * kabs ** (2 * i) * mode_int)
            lhs = math.sqrt(lhs2)
            den1 = delta ** j * math.sqrt(np.sum(np.abs(c) ** 2 * kabs ** (2 * (i + j))))
            r1max = max(r1max, lhs / den1 if den1 > 0 else 0.0)
            if i + j >= 1:
                den2 = delta ** (j - 0.5) * math.sqrt(np.sum(np.abs(c) ** 2 * kabs ** (2 * (i + j) - 1)))
                r2max = max(r2max, lhs / den2 if den2 > 0 else 0.0)
        out[float(delta)] = (r1max, r2max if i + j >= 1 else float("nan"))
    return out


# --------------------------------------------------------------------------- geometry

@dataclass
class TransformAssembly:
    params: ScalingParams
    grid: Grid
    ext: ExtendedSurface
    J: np.ndarray
    Jinv: np.ndarray
    a1: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    a1_x: np.ndarray
    a1_y: np.ndarray
    b1_y: np.ndarray
    A1: np.ndarray
    A1inv: np.ndarray
    A2: np.ndarray
    A3: np.ndarray
    A4: np.ndarray
    A5: np.ndarray
    A6: np.ndarray
    N: np.ndarray
    N1: np.ndarray
    N2: np.ndarray
    N6: np.ndarray
    V: np.ndarray                 # Nusselt fluctuation vector (V1, 0)
    U: np.ndarray                 # Nusselt vector (ubar, 0) on the strip
    ubar_y: np.ndarray
    # time-derivative data (present when eta_t was supplied)
    ext_t: Optional[ExtendedSurface] = None
    J_t: Optional[np.ndarray] = None
    a1_t: Optional[np.ndarray] = None
    b1_t: Optional[np.ndarray] = None
    A1t: Optional[np.ndarray] = None

    @property
    def ops(self) -> Ops:
        return _ops_for(self.grid)


@lru_cache(maxsize=16)
def _ops_for(grid):
    return Ops(grid)


def build_transform(eta, params: ScalingParams, ny: int, eta_t=None) -> TransformAssembly:
    """Assemble J, a1, b1, b2, A1..A6 and their nonlinear parts from eta."""
    eta = np.asarray(eta, dtype=float)
    g = make_grid(eta.size, ny)
    ops = _ops_for(g)
    eps, d = params.epsilon, params.delta
    ext = ExtendedSurface(eta, d, g)
    Y = g.Y
    et, et_x, et_y = ext.d(0, 0), ext.d(1, 0), ext.d(0, 1)
    J = 1.0 + eps * (et + Y * et_y)
    if np.min(J) <= GUARD:
        raise GeometryError(f"Jacobian of the flattening map is not positive (min J = {np.min(J):.3e})")
    Jinv = 1.0 / J
    a1 = -Y * Jinv * eps * d * et_x
    b1 = Jinv - 1.0
    b2 = a1 ** 2 + 2.0 * b1 + b1 ** 2
    a1_x = ops.dx(a1)
    a1_y = ops.dy(a1)
    b1_y = ops.dy(b1)
    zero = np.zeros_like(J)
    one = np.ones_like(J)
    A1 = np.array([[1.0 + b1, zero], [-a1, one]])
    A1inv = np.array([[J, zero], [a1 * J, one]])
    A2 = np.array([[one, a1], [zero, 1.0 + b1]])
    A3 = np.array([[b2, zero], [zero, zero]])
    yeta_y = eps * (et + Y * et_y)                    # (y eps eta~)_y
    yex = Y * eps * d * et_x                           # y eps delta eta~_x
    A4 = np.array([[yeta_y, -yex], [-yex, Jinv * (yex ** 2 - yeta_y)]])
    I = _eye(J.shape)
    IA4 = I + A4
    det = IA4[0, 0] * IA4[1, 1] - IA4[0, 1] * IA4[1, 0]
    if np.min(np.abs(det)) <= GUARD:
        raise GeometryError("I + A4 is singular")
    IA4inv = np.array([[IA4[1, 1], -IA4[0, 1]], [-IA4[1, 0], IA4[0, 0]]]) / det
    A5 = matmul(A4, IA4inv)
    A6 = J * matmul(transpose(A2), A2)
    U = np.array([2.0 * Y - Y ** 2, zero])
    V1 = 2.0 * eps * Y * et - 2.0 * eps * Y ** 2 * et - (eps * Y * et) ** 2
    asm = TransformAssembly(
        params=params, grid=g, ext=ext, J=J, Jinv=Jinv, a1=a1, b1=b1, b2=b2,
        a1_x=a1_x, a1_y=a1_y, b1_y=b1_y, A1=A1, A1inv=A1inv, A2=A2, A3=A3, A4=A4,
        A5=A5, A6=A6, N=A1inv - I, N1=A1 - I, N2=A2 - I, N6=A6 - I,
        V=np.array([V1, zero]), U=U, ubar_y=2.0 - 2.0 * Y,
    )
    if eta_t is not None:
        ext_t = ExtendedSurface(np.asarray(eta_t, dtype=float), d, g)
        e_t, e_tx, e_ty = ext_t.d(0, 0), ext_t.d(1, 0), ext_t.d(0, 1)
        J_t = eps * (e_t + Y * e_ty)
        b1_t = -J_t * Jinv ** 2
        a1_t = -Y * eps * d * (e_tx * Jinv - et_x * J_t * Jinv ** 2)
        asm.ext_t = ext_t
        asm.J_t = J_t
        asm.b1_t = b1_t
        asm.a1_t = a1_t
        asm.A1t = np.array([[b1_t, zero], [-a1_t, zero]])
    return asm


# --------------------------------------------------------------------------- boundary terms

@dataclass
class BoundaryTerms:
    h1: np.ndarray
    h2: np.ndarray
    h21: np.ndarray
    h22: np.ndarray
    h3: np.ndarray
    h4: np.ndarray
    h5: np.ndarray
    b3: np.ndarray
    b4: np.ndarray
    h_vec: np.ndarray            # the stress remainder h on the surface (2, nx)


def _stress_remainder_over_eps(asm: TransformAssembly, u, v, eta):
    """h / eps on the surface, evaluated from the printed expression for h."""
    p = asm.params
    eps, d = p.epsilon, p.delta
    ops = asm.ops
    w = np.array([u, d * v])
    A1w = matvec(asm.A1, w)
    N1w = matvec(asm.N1, w)
    Gn = ops.grad(N1w, d)                       # nabla_delta (N1 w)^T
    GA = np.einsum("ij...,jc...->ic...", asm.N2, ops.grad(A1w, d))
    S = Gn + transpose(Gn) + GA + transpose(GA)
    S1 = S[..., -1]
    eta_x = ops.sdx(eta)
    nvec = np.array([-eps * d * eta_x, np.ones_like(eta)])
    u_x = ops.surf(ops.dx(u))
    u_y = ops.surf(ops.dy(u))
    v_x = ops.surf(ops.dx(v))
    tang = d ** 2 * v_x + u_y - 2.0 * eta
    lin = np.array([eps * d ** 2 * eta_x * u_x, 0.5 * eps * d * eta_x * tang])
    return -lin + 0.5 * matvec(S1, nvec)


def assemble_boundary_terms(asm: TransformAssembly, u, v, eta) -> BoundaryTerms:
    """h1..h5, b3, b4 on the surface from the state and the geometry."""
    p = asm.params
    eps, d = p.epsilon, p.delta
    ops = asm.ops
    eta = np.asarray(eta, dtype=float)
    eta_x = ops.sdx(eta)
    eta_xx = ops.sdx(eta, 2)
    s = lambda f: ops.surf(f)
    u1, v1 = s(u), s(v)
    u_x = s(ops.dx(u))
    u_y = s(ops.dy(u))
    v_x = s(ops.dx(v))
    v_y = s(ops.dy(v))
    a1, b1, a1y = s(asm.a1), s(asm.b1), s(asm.a1_y)
    nvec = np.array([-eps * d * eta_x, np.ones_like(eta)])
    tvec = np.array([np.ones_like(eta), eps * d * eta_x])
    # b4
    off = 0.5 * (-a1 ** 2 + b1 * (2.0 + b1))
    M4 = np.array([[a1 * (1.0 + b1), off], [off, -a1 * (1.0 + b1)]])
    b4 = -0.5 * (eps * d * eta_x) ** 2 + np.sum(matvec(M4, nvec) * tvec, axis=0)
    # h5
    mixed = 0.5 * (d * ops.sdx(-a1 * u1) - a1 * a1y * u1 + d * a1 * v_y)
    M5 = np.array([[d * ops.sdx(b1 * u1), mixed], [mixed, -a1y * (1.0 + b1) * u1 + d * b1 * v_y]])
    h5 = (-eps * d ** 2 * eta_x * u_x - 0.5 * (eps * d * eta_x) ** 2 * (d ** 2 * v_x - 2.0 * eta)
          + np.sum(matvec(M5, nvec) * tvec, axis=0))
    den = 1.0 + 2.0 * b4
    if np.min(np.abs(den)) <= GUARD:
        raise GeometryError("1 + 2 b4 vanishes on the surface")
    b3 = -4.0 * b4 / den
    h1 = (2.0 * b4 / den) * d ** 2 * v_x - (2.0 / den) * (eps * d ** 2 * eta_x * v_y + h5)
    hv = _stress_remainder_over_eps(asm, u, v, eta)          # h / eps
    h4 = -2.0 * (eps * d ** 2 * eta_x * v_y + np.sum(hv * tvec, axis=0))
    q = (eps * d * eta_x) ** 2
    tang = d ** 2 * v_x + u_y - 2.0 * eta
    h21 = (-(q / (1.0 + q)) * d * v_y
           + (1.0 / (1.0 + q)) * (-0.5 * eps * d * eta_x * tang + np.sum(hv * nvec, axis=0)))
    h22 = (1.0 - (1.0 + q) ** -1.5) * eta_xx / math.sin(p.alpha)
    h2 = h21 + d ** 2 * p.weber * h22
    h3 = eps ** 2 * eta ** 2 * eta_x
    return BoundaryTerms(h1=h1, h2=h2, h21=h21, h22=h22, h3=h3, h4=h4, h5=h5, b3=b3, b4=b4,
                         h_vec=eps * hv)


# --------------------------------------------------------------------------- bulk terms

@dataclass
class BulkTerms:
    f: np.ndarray
    F1: np.ndarray
    F3: np.ndarray
    f1: np.ndarray                # (f - 2/R A4 grad p) . e2
    f2: np.ndarray                # scalar combination used for the u_yy - 2 delta p_x identity
    f3: np.ndarray                # (f - 2/R A4 grad p) . e1
    A4gradp: np.ndarray
    parts: Dict[str, np.ndarray] = field(default_factory=dict)
    F2: Optional[np.ndarray] = None
    G: Dict[int, np.ndarray] = field(default_factory=dict)


def _p_delta(asm: TransformAssembly, fvec):
    """P_delta f = 2 delta a1 f_xy + {delta a1_x + a1 a1_y + (1 + b1) b1_y} f_y (componentwise)."""
    ops = asm.ops
    d = asm.params.delta
    coef = d * asm.a1_x + asm.a1 * asm.a1_y + (1.0 + asm.b1) * asm.b1_y
    fy = ops.dy(fvec)
    return 2.0 * d * asm.a1 * ops.dx(fy) + coef * fy


def nonlinear_f(asm: TransformAssembly, u, v, eta_t=None, return_parts=False):
    """The collection f of nonlinear momentum terms (printed term-by-term form)."""
    p = asm.params
    eps, d, R = p.epsilon, p.delta, p.reynolds
    ops = asm.ops
    if asm.A1t is None:
        if eta_t is None:
            raise ContractError("the time derivative of eta is required to assemble f")
        asm = build_transform(asm.ext.eta, p, asm.grid.ny, eta_t=eta_t)
    w = np.array([u, d * v])
    I = _eye(u.shape)
    A1w = matvec(asm.A1, w)
    N1w = matvec(asm.N1, w)
    U, V = asm.U, asm.V
    # linear transport about the Nusselt flow
    L_adv = adv(U, I, w, ops, d) + adv(w, I, U, ops, d)
    # time-derivative remainder
    Y = asm.grid.Y
    f1 = d * matvec(asm.A1t, w) - Y * asm.Jinv * eps * d * asm.ext_t.d(0, 0) * ops.dy(A1w)
    # advection remainder
    f2 = (adv(U, I, N1w, ops, d)
          + adv(U, asm.N2, A1w, ops, d)
          + adv(V + eps * A1w, asm.A2, A1w, ops, d)
          + adv(w, asm.N2, U, ops, d)
          + adv(N1w, asm.A2, U, ops, d)
          + adv(A1w, asm.A2, V, ops, d))
    # viscous remainder
    comm_xx = d ** 2 * (ops.dx(A1w, 2) - matvec(asm.A1, ops.dx(w, 2)))
    comm_yy = (1.0 + asm.b2) * (ops.dy(A1w, 2) - matvec(asm.A1, ops.dy(w, 2)))
    extra = matvec(asm.A1, np.array([np.zeros_like(u), d * asm.b2 * ops.dy(v, 2)]))
    f3 = comm_xx + comm_yy + _p_delta(asm, A1w) + extra
    f = -matvec(asm.N, L_adv) + matvec(asm.A1inv, -f1 - f2 + f3 / R)
    if return_parts:
        return f, {"f1": f1, "f2": f2, "f3": f3, "L_adv": L_adv}
    return f


def _F3(asm, u, v, f):
    p = asm.params
    d, R = p.delta, p.reynolds
    ops = asm.ops
    w = np.array([u, d * v])
    I = _eye(u.shape)
    L_adv = adv(asm.U, I, w, ops, d) + adv(w, I, asm.U, ops, d)
    visc = d ** 2 * ops.dx(w, 2) + ops.dy(w, 2) + matvec(asm.A3, ops.dy(w, 2))
    return -L_adv + visc / R + f


def assemble_bulk_terms(asm: TransformAssembly, u, v, p_field, eta_t=None,
                        time_data=None, kmax: int = 2) -> BulkTerms:
    """f, F1, F3 and the scalar pieces f1, f2, f3 at one instant.

    ``time_data`` (optional) is a dict with the central-difference material for
    time derivatives: keys 'tau', 'plus', 'minus' (BulkTerms-producing inputs at
    the shifted states, as returned by :func:`_shifted_inputs`), 'u_t', 'v_t',
    'p_t'.  When given, F2 and the commutators G_k (1 <= k <= kmax) are filled in.
    """
    prm = asm.params
    d, R = prm.delta, prm.reynolds
    ops = asm.ops
    if asm.A1t is None and eta_t is None:
        raise ContractError("the time derivative of eta is required to assemble bulk terms")
    if asm.A1t is None:
        asm = build_transform(asm.ext.eta, prm, asm.grid.ny, eta_t=eta_t)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    f, parts = nonlinear_f(asm, u, v, return_parts=True)
    gp = ops.grad(p_field[None], d)[:, 0]                # nabla_delta p
    A4gp = matvec(asm.A4, gp)
    u_yy = ops.dy(u, 2)
    F1 = f - (2.0 / R) * A4gp + (1.0 / R) * np.array([asm.b2 * u_yy, np.zeros_like(u)])
    F3 = _F3(asm, u, v, f)
    fp = f - (2.0 / R) * A4gp
    f1s = fp[1]
    f3s = fp[0]
    terms = BulkTerms(f=f, F1=F1, F3=F3, f1=f1s, f2=np.zeros_like(u), f3=f3s, A4gradp=A4gp,
                      parts=parts)
    ubar, ubar_y = asm.U[0], asm.ubar_y
    if time_data is not None:
        u_t = time_data["u_t"]
        v_t = time_data["v_t"]
        p_t = time_data["p_t"]
        tau = time_data["tau"]
        Tp, Tm = time_data["plus"], time_data["minus"]
        w_t = np.array([u_t, d * v_t])
        ddt = lambda a, b: (a - b) / (2.0 * tau)
        f_t = ddt(Tp.f, Tm.f)
        b2uyy_t = ddt(Tp.parts["b2u_yy"], Tm.parts["b2u_yy"])
        A4t = ddt(Tp.parts["A4"], Tm.parts["A4"])
        A5t = ddt(Tp.parts["A5"], Tm.parts["A5"])
        F3t = ddt(Tp.F3, Tm.F3)
        A5F3_t = ddt(matvec(Tp.parts["A5"], Tp.F3), matvec(Tm.parts["A5"], Tm.F3))
        terms.F2 = (f_t + (1.0 / R) * np.array([b2uyy_t, np.zeros_like(u)])
                    + 0.5 * d * matvec(A5t, w_t) - A5F3_t)
        gpt = ops.grad(p_t[None], d)[:, 0]
        I = _eye(u.shape)
        X = -(2.0 / R) * matvec(I + asm.A4, gpt) - (2.0 / R) * matvec(A4t, gp) + F3t
        for k in range(1, kmax + 1):
            c1 = ops.dx(matvec(asm.A5, X), k) - matvec(asm.A5, ops.dx(X, k))
            c2 = ops.dx(matvec(A5t, w_t), k) - matvec(A5t, ops.dx(w_t, k))
            terms.G[k] = c1 + 0.5 * d * c2
        # scalar f2 needs u_t
        b2 = asm.b2
        lin = d * u_t + ubar * d * ops.dx(u) + ubar_y * d * v - (1.0 / R) * d ** 2 * ops.dx(u, 2)
        p_x = ops.dx(p_field)
        terms.f2 = -(b2 / (1.0 + b2)) * lin - (2.0 * b2 / (R * (1.0 + b2))) * d * p_x - f3s / (1.0 + b2)
    terms.parts["b2u_yy"] = asm.b2 * u_yy
    terms.parts["A4"] = asm.A4
    terms.parts["A5"] = asm.A5
    return terms
