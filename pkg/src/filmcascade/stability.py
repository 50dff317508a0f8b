"""Linear stability of the flat film: model dispersion relations, the critical
Reynolds number and a collocation Orr-Sommerfeld solver for the free-surface
problem."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
import sympy as sp
from scipy.optimize import brentq

from .errors import ParameterError, ResolutionError
from .models import ModelKind, benney_coefficients
from .params import ScalingParams
from .spectral import make_grid

__all__ = [
    "dispersion",
    "benney_symbol_expr",
    "critical_reynolds",
    "critical_reynolds_root",
    "neutral_wavenumber",
    "OSProblem",
    "os_operators",
    "os_spectrum",
    "os_leading",
    "os_neutral_reynolds",
]


@lru_cache(maxsize=1)
def _benney_symbolic():
    """Linearise the Benney flux about eta = 0 symbolically.

    Returns (expr, fn) where expr is lambda(k) in terms of the symbols
    (k, delta, R, Wt, cot_alpha, sin_alpha) and fn its numpy lambdification.
    """
    x, k, a = sp.symbols("x k a", real=True)
    delta, R, Wt, cot, sin = sp.symbols("delta R Wt cot_alpha sin_alpha", positive=True)
    eta = a * sp.exp(sp.I * k * x)
    h = 1 + eta
    flux = (-sp.Rational(2, 3) * h ** 3
            + delta * (sp.Rational(2, 3) * cot * h ** 3 * sp.diff(eta, x)
                       - sp.Rational(8, 15) * R * h ** 6 * sp.diff(eta, x)
                       - sp.Rational(2, 3) * Wt / sin * h ** 3 * sp.diff(eta, x, 3)))
    rhs = sp.diff(flux, x)
    lin = sp.diff(rhs, a).subs(a, 0)
    lam = sp.expand(sp.simplify(lin * sp.exp(-sp.I * k * x)))
    fn = sp.lambdify((k, delta, R, Wt, cot, sin), lam, "numpy")
    return lam, fn


def benney_symbol_expr():
    """Symbolic linear symbol of the Benney equation about the flat film."""
    return _benney_symbolic()[0]


def _cot(alpha):
    if abs(alpha - math.pi / 2) < 1e-15:
        return 0.0
    return math.cos(alpha) / math.sin(alpha)


def dispersion(kind, k, params: ScalingParams):
    """Complex growth rate lambda(k) of e^{ikx} for the linearised model.

    ``k`` is the angular wavenumber (k = 2 pi n on the unit torus).
    """
    kind = ModelKind.parse(kind)
    k_arr = np.asarray(k, dtype=float)
    d = params.delta
    if kind is ModelKind.BENNEY:
        fn = _benney_symbolic()[1]
        lam = fn(k_arr, d, params.reynolds, params.weber_tilde, _cot(params.alpha),
                 math.sin(params.alpha))
        lam = np.asarray(lam, dtype=complex) * np.ones_like(k_arr)
    else:
        c = benney_coefficients(params.alpha, params.reynolds, params.weber)
        lam = -2j * k_arr - d * c.B1 * k_arr ** 2 + 0j
        if kind in (ModelKind.KDVB, ModelKind.KAWAHARA):
            lam = lam - 1j * d ** 2 * c.D1 * k_arr ** 3
        if kind is ModelKind.KAWAHARA:
            lam = lam + d ** 3 * c.G1 * k_arr ** 4
    if np.ndim(k) == 0:
        return complex(lam)
    return lam


def critical_reynolds(alpha: float) -> float:
    """R_c = 5 / (4 tan(alpha)), cross-checked against the root of B1(alpha, R)."""
    if not (0 < alpha < math.pi / 2):
        raise ParameterError("critical_reynolds requires 0 < alpha < pi/2")
    if alpha < 1e-6:
        warnings.warn("R_c diverges as alpha -> 0", RuntimeWarning, stacklevel=2)
    rc = 1.25 / math.tan(alpha)
    root = critical_reynolds_root(alpha)
    if abs(root - rc) > 1e-12 * max(1.0, rc):
        raise ArithmeticError(f"closed form {rc!r} and root {root!r} of B1 disagree")
    return rc


def critical_reynolds_root(alpha: float) -> float:
    """Zero of R -> B1(alpha, R) located by bracketing root search."""
    f = lambda R: benney_coefficients(alpha, R, 0.0).B1
    hi = 1.0
    while f(hi) > 0:
        hi *= 2.0
    return brentq(f, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def neutral_wavenumber(params: ScalingParams) -> float:
    """k_n = sqrt(B1 / (delta^2 G1)) where the Kawahara growth rate changes sign."""
    c = benney_coefficients(params.alpha, params.reynolds, params.weber)
    ratio = c.B1 / (params.delta ** 2 * c.G1)
    if ratio <= 0:
        return float("nan")
    return math.sqrt(ratio)


# --------------------------------------------------------------------------- Orr-Sommerfeld

@dataclass(frozen=True)
class OSProblem:
    k: float
    params: ScalingParams
    ny: int = 32

    def __post_init__(self):
        if self.k == 0:
            raise ParameterError("the Orr-Sommerfeld problem needs k != 0")
        if self.ny < 8:
            raise ParameterError("ny too small")


def os_operators(k: float, params: ScalingParams, ny: int):
    """Matrices (A, B) of the generalised problem lambda B X = A X.

    Unknowns X = (u[0:ny], v[0:ny], p[0:ny], eta) at the Chebyshev nodes,
    linearised about the Nusselt flow in the flattened variables.
    """
    g = make_grid(2, ny)
    y = g.y
    D = g.Dy
    D2 = D @ D
    I = np.eye(ny)
    ub = 2 * y - y ** 2
    uby = 2 - 2 * y
    d = params.delta
    R = params.reynolds
    ik = 1j * k
    G = _cot(params.alpha) + d ** 2 * params.weber * k ** 2 / math.sin(params.alpha)
    N = 3 * ny + 1
    A = np.zeros((N, N), dtype=complex)
    B = np.zeros((N, N), dtype=complex)
    iu, iv, ip, ie = slice(0, ny), slice(ny, 2 * ny), slice(2 * ny, 3 * ny), 3 * ny
    lap = D2 - d ** 2 * k ** 2 * I
    # x-momentum
    A[iu, iu] = -d * ik * np.diag(ub) + lap / R
    A[iu, iv] = -d * np.diag(uby)
    A[iu, ip] = -(2.0 / R) * d * ik * I
    B[iu, iu] = d * I
    # y-momentum
    A[iv, iv] = -d ** 2 * ik * np.diag(ub) + (d / R) * lap
    A[iv, ip] = -(2.0 / R) * D
    B[iv, iv] = d ** 2 * I
    # continuity at every node
    A[ip, iu] = ik * I
    A[ip, iv] = D
    # wall: u = v = 0
    for blk in (0, ny):
        A[blk, :] = 0
        B[blk, :] = 0
    A[0, 0] = 1.0
    A[ny, ny] = 1.0
    # surface: tangential stress u_y + d^2 ik v - 2 eta = 0
    r = ny - 1
    A[r, :] = 0
    B[r, :] = 0
    A[r, iu] = D[-1]
    A[r, ny + ny - 1] = d ** 2 * ik
    A[r, ie] = -2.0
    # surface: normal stress p - d v_y - G eta = 0
    r = 2 * ny - 1
    A[r, :] = 0
    B[r, :] = 0
    A[r, 2 * ny + ny - 1] = 1.0
    A[r, iv] = -d * D[-1]
    A[r, ie] = -G
    # kinematic: eta_t = -ik eta + v(1)
    A[ie, ie] = -ik
    A[ie, 2 * ny - 1] = 1.0
    B[ie, ie] = 1.0
    return A, B


def _raw_spectrum(k, params, ny):
    A, B = os_operators(k, params, ny)
    w = scipy.linalg.eig(A, B, right=False)
    w = w[np.isfinite(w)]
    return w[np.abs(w) < 1e8]


def os_spectrum(problem: OSProblem, tol: float = 1e-6):
    """Eigenvalues that agree between ny and 3ny/2 nodes, sorted by real part (descending)."""
    ny = problem.ny
    w1 = _raw_spectrum(problem.k, problem.params, ny)
    w2 = _raw_spectrum(problem.k, problem.params, (3 * ny) // 2)
    keep = []
    for lam in w1:
        if w2.size and np.min(np.abs(w2 - lam)) < tol * max(1.0, abs(lam)):
            keep.append(lam)
    if not keep:
        raise ResolutionError("no eigenvalue converged under vertical refinement")
    keep = np.array(keep)
    return keep[np.argsort(-keep.real, kind="stable")]


def os_leading(k, params, ny=32):
    return os_spectrum(OSProblem(k, params, ny))[0]


def os_neutral_reynolds(k, params: ScalingParams, lo: float, hi: float, ny=32, rtol=1e-6):
    """Bisect R on [lo, hi] for Re(lambda_max) = 0 at fixed (k, alpha, delta, W)."""
    f = lambda R: os_leading(k, params.replace(reynolds=R), ny).real
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise ValueError("neutral Reynolds number not bracketed")
    return brentq(f, lo, hi, rtol=rtol)
