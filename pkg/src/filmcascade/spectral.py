"""Fourier (x) / Chebyshev (y) pseudo-spectral machinery on the strip T x (0, 1).

Conventions
-----------
* The horizontal period is 1; fields are sampled at ``x_i = i / nx``.
* Fourier coefficients are normalised by ``nx`` so that ``f(x) = sum_n fhat_n e^{2 pi i n x}``.
* ``D_x = -i d/dx`` acts on ``e^{2 pi i n x}`` with eigenvalue ``2 pi n``.
* Vertical nodes are Chebyshev-Gauss-Lobatto points mapped to [0, 1] and
  ordered bottom to top: ``y[0] = 0`` is the wall, ``y[-1] = 1`` the surface.
* Bulk arrays have shape ``(nx, ny)`` with x along axis 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import chebyshev as C

from .errors import UnsupportedError

__all__ = [
    "Grid",
    "make_grid",
    "cheb",
    "MultiplierSpec",
    "identity",
    "abs_dx",
    "delta_weight",
    "sobolev_symbol",
    "dx_symbol",
    "apply_multiplier",
    "differentiate",
    "dealias",
    "dealias_mask",
    "surface_norm",
    "homogeneous_norm",
    "bulk_norm",
    "l2_bulk",
    "bulk_inner",
    "surface_inner",
    "antiderivative_y",
    "to_coeffs",
    "from_coeffs",
    "wavenumbers",
]

MAX_ORDER = 4


def cheb(N):
    """Chebyshev differentiation matrix on x_j = cos(pi j / N), j = 0..N."""
    if N == 0:
        return np.zeros((1, 1)), np.array([1.0])
    x = np.cos(np.pi * np.arange(N + 1) / N)
    c = np.ones(N + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(N + 1)
    X = np.tile(x, (N + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    return D, x


@dataclass(frozen=True, eq=False)
class Grid:
    """Tensor grid with cached differentiation, quadrature and integration operators."""

    nx: int
    ny: int
    x: np.ndarray
    y: np.ndarray
    n: np.ndarray          # integer wavenumbers in numpy fft order
    Dy: np.ndarray         # first-derivative collocation matrix in y
    weights: np.ndarray    # Clenshaw-Curtis weights on [0, 1]
    Iy: np.ndarray         # matrix of f -> -int_y^1 f dz

    def Dy_power(self, k: int) -> np.ndarray:
        return _dy_power(self.ny, k)

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def X(self):
        return np.broadcast_to(self.x[:, None], self.shape)

    @property
    def Y(self):
        return np.broadcast_to(self.y[None, :], self.shape)

    @property
    def kx(self) -> np.ndarray:
        """Angular wavenumbers 2 pi n."""
        return 2.0 * np.pi * self.n


@lru_cache(maxsize=None)
def make_grid(nx: int, ny: int) -> Grid:
    """Build (and cache) the grid with ``nx`` Fourier nodes and ``ny`` Chebyshev nodes."""
    if nx < 2 or ny < 3:
        raise ValueError("need nx >= 2 and ny >= 3")
    N = ny - 1
    D, t = cheb(N)
    y = (1.0 - t) / 2.0          # ascending from 0 to 1
    Dy = -2.0 * D
    # Interpolation through Chebyshev polynomials in s = 2y - 1.
    s = 2.0 * y - 1.0
    V = C.chebvander(s, N)
    Vinv = np.linalg.inv(V)
    Iy = np.empty((ny, ny))
    for j in range(ny):
        coef = Vinv[:, j]
        integ = C.chebint(coef, lbnd=1.0) / 2.0
        Iy[:, j] = C.chebval(s, integ)
    weights = -Iy[0, :]
    x = np.arange(nx) / nx
    n = np.rint(np.fft.fftfreq(nx) * nx).astype(int)
    for arr in (x, y, n, Dy, weights, Iy):
        arr.setflags(write=False)
    return Grid(nx=nx, ny=ny, x=x, y=y, n=n, Dy=Dy, weights=weights, Iy=Iy)


@lru_cache(maxsize=None)
def _dy_power(ny, k):
    g = make_grid(2, ny)
    M = np.linalg.matrix_power(g.Dy, k)
    M.setflags(write=False)
    return M


def wavenumbers(nx: int) -> np.ndarray:
    return np.rint(np.fft.fftfreq(nx) * nx).astype(int)


def to_coeffs(f, axis=0):
    """Normalised Fourier coefficients along ``axis`` (numpy fft ordering)."""
    f = np.asarray(f)
    return np.fft.fft(f, axis=axis) / f.shape[axis]


def from_coeffs(fhat, axis=0, real=True):
    f = np.fft.ifft(fhat, axis=axis) * fhat.shape[axis]
    return f.real if real else f


# --------------------------------------------------------------------------- multipliers

@dataclass(frozen=True)
class MultiplierSpec:
    """A Fourier multiplier P(D_x) given by its symbol on integer frequencies n.

    ``symbol`` receives an integer array ``n`` and returns P evaluated at the
    mode ``e^{2 pi i n x}``; the symbol is responsible for the 2 pi factor.
    """

    symbol: Callable[[np.ndarray], np.ndarray]
    order: float = 0.0
    delta: Optional[float] = None
    name: str = ""

    def __call__(self, n):
        return np.asarray(self.symbol(np.asarray(n)), dtype=complex)

    def __mul__(self, other: "MultiplierSpec") -> "MultiplierSpec":
        return MultiplierSpec(lambda n: self(n) * other(n), self.order + other.order,
                              self.delta if self.delta is not None else other.delta,
                              f"{self.name}*{other.name}")

    def __pow__(self, p):
        return MultiplierSpec(lambda n: self(n) ** p, self.order * p, self.delta, f"({self.name})^{p}")


def identity() -> MultiplierSpec:
    return MultiplierSpec(lambda n: np.ones(np.shape(n)), 0.0, None, "1")


def abs_dx(s: float = 1.0) -> MultiplierSpec:
    """|D_x|^s with symbol |2 pi n|^s (zero at n = 0 for s > 0)."""
    def sym(n):
        a = np.abs(2.0 * np.pi * n).astype(float)
        if s == 0:
            return np.ones_like(a)
        return a ** s
    return MultiplierSpec(sym, s, None, f"|D|^{s}")


def delta_weight(a: float, delta: float) -> MultiplierSpec:
    """(1 + delta |D_x|)^a."""
    return MultiplierSpec(lambda n: (1.0 + delta * np.abs(2.0 * np.pi * n)) ** a, a, delta,
                          f"(1+{delta}|D|)^{a}")


def sobolev_symbol(s: float) -> MultiplierSpec:
    """(1 + |D_x|^2)^{s/2}, the symbol used by the norm |.|_s."""
    return MultiplierSpec(lambda n: (1.0 + (2.0 * np.pi * n) ** 2) ** (s / 2.0), s, None, f"<D>^{s}")


def one_plus_abs(m: float) -> MultiplierSpec:
    """(1 + |D_x|)^m."""
    return MultiplierSpec(lambda n: (1.0 + np.abs(2.0 * np.pi * n)) ** m, m, None, f"(1+|D|)^{m}")


def dx_symbol(order: int = 1) -> MultiplierSpec:
    """d^k/dx^k, symbol (2 pi i n)^k."""
    return MultiplierSpec(lambda n: (2j * np.pi * n) ** order, order, None, f"dx^{order}")


def _symbol_on_grid(spec: MultiplierSpec, nx: int):
    n = wavenumbers(nx)
    P = np.array(spec(n), dtype=complex)
    if nx % 2 == 0:
        # The Nyquist mode represents cos(pi nx x) for real data; average the
        # symbol over +-nx/2 so that odd symbols annihilate it.
        h = nx // 2
        P[h] = 0.5 * (spec(np.array([h]))[0] + spec(np.array([-h]))[0])
    return P


def apply_multiplier(spec: MultiplierSpec, f, axis: int = 0):
    """Apply P(D_x) coefficient-wise along ``axis`` (x)."""
    f = np.asarray(f)
    nx = f.shape[axis]
    P = _symbol_on_grid(spec, nx)
    shape = [1] * f.ndim
    shape[axis] = nx
    out = np.fft.ifft(np.fft.fft(f, axis=axis) * P.reshape(shape), axis=axis)
    if np.isrealobj(f):
        n = wavenumbers(nx)
        Pm = _symbol_on_grid(spec, nx)[(-n) % nx]
        if np.allclose(Pm, np.conj(P), rtol=1e-13, atol=1e-300):
            return out.real
    return out


def differentiate(f, axis="x", order: int = 1, grid: Optional[Grid] = None):
    """Spectral derivative in x (exact for band-limited data) or collocation derivative in y."""
    if order > MAX_ORDER or order < 0:
        raise UnsupportedError(f"derivative order {order} not supported (max {MAX_ORDER})")
    f = np.asarray(f)
    if order == 0:
        return f.copy()
    if axis in ("x", 0):
        return apply_multiplier(dx_symbol(order), f, axis=0)
    if axis in ("y", 1):
        M = _dy_power(f.shape[-1], order)
        return f @ M.T
    raise ValueError(f"unknown axis {axis!r}")


def dealias_mask(nx: int) -> np.ndarray:
    n = wavenumbers(nx)
    return np.abs(n) <= nx // 3


def dealias(f, axis: int = 0):
    """2/3 rule: zero every Fourier mode with |n| > nx/3."""
    f = np.asarray(f)
    nx = f.shape[axis]
    shape = [1] * f.ndim
    shape[axis] = nx
    mask = dealias_mask(nx).reshape(shape)
    out = np.fft.ifft(np.fft.fft(f, axis=axis) * mask, axis=axis)
    return out.real if np.isrealobj(f) else out


# --------------------------------------------------------------------------- norms

def surface_norm(phi, s: float = 0.0, weight=None):
    """|phi|_s with symbol (1 + (2 pi n)^2)^{s/2}; ``weight=(a, delta)`` inserts (1+delta|D_x|)^a."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    phat = to_coeffs(np.asarray(phi), axis=0)
    n = wavenumbers(phat.shape[0])
    sym = (1.0 + (2.0 * np.pi * n) ** 2) ** (s / 2.0)
    if weight is not None:
        a, delta = weight
        sym = sym * (1.0 + delta * np.abs(2.0 * np.pi * n)) ** a
    return float(np.sqrt(np.sum(np.abs(sym * phat) ** 2)))


def homogeneous_norm(phi, s: float, weight=None):
    """| |D_x|^s phi |_0 (vanishes on constants for s > 0)."""
    phat = to_coeffs(np.asarray(phi), axis=0)
    n = wavenumbers(phat.shape[0])
    sym = np.abs(2.0 * np.pi * n) ** s if s != 0 else np.ones(n.shape)
    if weight is not None:
        a, delta = weight
        sym = sym * (1.0 + delta * np.abs(2.0 * np.pi * n)) ** a
    return float(np.sqrt(np.sum(np.abs(sym * phat) ** 2)))


def surface_inner(a, b):
    """L^2(T) inner product (real part), computed on the grid."""
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.real(np.mean(a * np.conj(b))))


def _weights_for(ny):
    return make_grid(2, ny).weights


def l2_bulk(f):
    """||f||_0 on the strip, Parseval in x and Clenshaw-Curtis in y."""
    f = np.asarray(f)
    w = _weights_for(f.shape[1])
    return float(np.sqrt(np.sum(np.mean(np.abs(f) ** 2, axis=0) * w)))


def bulk_inner(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    w = _weights_for(a.shape[-1])
    return float(np.real(np.sum(np.mean(a * np.conj(b), axis=0) * w)))


def bulk_norm(f, s: int = 0):
    """||f||_s = (sum_{i+j<=s} ||dx^i dy^j f||_0^2)^{1/2}."""
    if s > MAX_ORDER or s < 0 or int(s) != s:
        raise UnsupportedError("bulk_norm supports integer 0 <= s <= 4")
    f = np.asarray(f)
    total = 0.0
    for j in range(s + 1):
        fy = differentiate(f, "y", j) if j else f
        for i in range(s + 1 - j):
            g = differentiate(fy, "x", i) if i else fy
            total += l2_bulk(g) ** 2
    return float(np.sqrt(total))


def antiderivative_y(f):
    """dy^{-1} f = -int_y^1 f(x, z) dz, vanishing at the surface."""
    f = np.asarray(f)
    Iy = make_grid(2, f.shape[-1]).Iy
    return f @ Iy.T
