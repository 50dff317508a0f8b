"""Long-wave model hierarchy: Burgers, KdV-Burgers, Kawahara and Benney.

All right-hand sides are assembled in conservation form, d/dx of a flux, so
the zero Fourier mode of eta is untouched by the time stepper.  The stiff
linear part is integrated exactly by fourth-order exponential time
differencing (ETDRK4, contour-integral coefficients).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import BlowUpError, FilmRuptureError, ParameterError
from .params import ScalingParams

__all__ = [
    "ModelKind",
    "ModelCoefficients",
    "ModelState",
    "ModelSolver",
    "benney_coefficients",
    "linear_symbol",
    "model_rhs",
    "step_model",
    "integrate_model",
]


class ModelKind(enum.Enum):
    BURGERS = "burgers"
    KDVB = "kdvb"
    KAWAHARA = "kawahara"
    BENNEY = "benney"

    @classmethod
    def parse(cls, name) -> "ModelKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "").replace("_", "")
        aliases = {"burgers": cls.BURGERS, "kdvb": cls.KDVB, "kdvburgers": cls.KDVB,
                   "kawahara": cls.KAWAHARA, "kdvks": cls.KAWAHARA, "benney": cls.BENNEY}
        if key not in aliases:
            raise ParameterError(f"unknown model kind {name!r}")
        return aliases[key]


def _inv_tan(alpha):
    if abs(alpha - math.pi / 2) < 1e-15:
        return 0.0
    return math.cos(alpha) / math.sin(alpha)


@dataclass(frozen=True)
class ModelCoefficients:
    B1: float
    D1: float
    G1: float


def benney_coefficients(alpha: float, R: float, W: float) -> ModelCoefficients:
    """B(1), D(1), G(1) of the long-wave expansion.

    At alpha = pi/2 every 1/tan(alpha) term is exactly zero.
    """
    if not (0 < alpha <= math.pi / 2 + 1e-15):
        raise ParameterError("alpha must lie in (0, pi/2]")
    if R < 0 or W < 0:
        raise ParameterError("R and W must be nonnegative")
    ct = _inv_tan(alpha)
    B1 = (8.0 / 15.0) * (1.25 * ct - R)
    D1 = -2.0 - (22.0 / 63.0) * R ** 2 + (40.0 / 63.0) * R * ct
    G1 = (-(2.0 / 3.0) * W / math.sin(alpha)
          - (157.0 / 56.0) * R
          - (8.0 / 45.0) * R * ct ** 2
          + (138904.0 / 155925.0) * R ** 2 * ct
          - (1213952.0 / 2027025.0) * R ** 3)
    return ModelCoefficients(B1, D1, G1)


def linear_symbol(kind, params: ScalingParams, n, hbar: float = 1.0) -> np.ndarray:
    """Symbol of the linear part acting on e^{2 pi i n x}, with k = 2 pi n.

    Burgers/KdVB/Kawahara: -2ik - dB1 k^2 - i d^2 D1 k^3 + d^3 G1 k^4, truncated per kind
    (the symbol of d^2 D1 eta_xxx is d^2 D1 (ik)^3).
    Benney, linearised about the flat film of thickness ``hbar`` (hbar = 1 is eta = 0):
    -2i hbar^2 k - d (2 hbar^3/(3 tan a) - 8R hbar^6/15) k^2 - (2 d Wt hbar^3 / (3 sin a)) k^4.
    """
    kind = ModelKind.parse(kind)
    k = 2.0 * np.pi * np.asarray(n, dtype=float)
    d = params.delta
    if kind is ModelKind.BENNEY:
        ct = _inv_tan(params.alpha)
        wt = params.weber_tilde
        h3 = hbar ** 3
        return (-2j * hbar ** 2 * k
                - d * (2.0 * ct * h3 / 3.0 - 8.0 * params.reynolds * h3 * h3 / 15.0) * k ** 2
                - d * 2.0 * wt * h3 / (3.0 * math.sin(params.alpha)) * k ** 4)
    c = benney_coefficients(params.alpha, params.reynolds, params.weber)
    lam = -2j * k - d * c.B1 * k ** 2
    if kind in (ModelKind.KDVB, ModelKind.KAWAHARA):
        lam = lam - 1j * d ** 2 * c.D1 * k ** 3
    if kind is ModelKind.KAWAHARA:
        lam = lam + d ** 3 * c.G1 * k ** 4
    return lam


@dataclass
class ModelState:
    eta: np.ndarray
    t: float
    params: ScalingParams
    kind: ModelKind
    linearized: bool = False

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=float)
        self.kind = ModelKind.parse(self.kind)


def _pad(fhat, m):
    """Zero-pad rfft coefficients (normalised by n) to a grid of m points."""
    out = np.zeros(m // 2 + 1, dtype=complex)
    nk = min(fhat.size, out.size)
    out[:nk] = fhat[:nk]
    return out


class ModelSolver:
    """Spectral discretisation of one model on an ``nx``-point periodic grid."""

    def __init__(self, kind, params: ScalingParams, nx: int, linearized: bool = False,
                 mean: float = 0.0):
        self.kind = ModelKind.parse(kind)
        # Benney's stiff linear part is taken about the (conserved) mean thickness.
        self.hbar = 1.0 if linearized else 1.0 + float(mean)
        self.params = params
        self.nx = int(nx)
        self.linearized = bool(linearized)
        self.n = np.arange(self.nx // 2 + 1)
        self.ik = 2j * np.pi * self.n
        if self.nx % 2 == 0:
            # Nyquist mode of real data: keep only the even part of each symbol.
            self.ik[-1] = 0.0
        L = linear_symbol(self.kind, params, self.n, self.hbar)
        if self.nx % 2 == 0:
            L[-1] = L[-1].real
        self.L = L
        self.mask = (self.n <= self.nx // 3).astype(float)
        self.coeffs = benney_coefficients(params.alpha, params.reynolds, params.weber)
        self._etd_cache = {}

    # ------------------------------------------------------------------ transforms
    def fwd(self, f):
        return np.fft.rfft(f) / self.nx

    def inv(self, fhat):
        return np.fft.irfft(fhat * self.nx, n=self.nx)

    # ------------------------------------------------------------------ right-hand sides
    def nonlinear_hat(self, ehat):
        """Nonlinear part N(eta) in coefficient space (zero mean mode by construction)."""
        if self.linearized:
            return np.zeros_like(ehat)
        p = self.params
        if self.kind is ModelKind.BENNEY:
            flux_hat = self._benney_flux_hat(ehat)
            nl = self.ik * flux_hat - self.L * ehat
        else:
            if p.epsilon == 0:
                return np.zeros_like(ehat)
            eta = self.inv(ehat * self.mask)
            # -4 eps eta eta_x = -2 eps d/dx(eta^2)
            nl = -2.0 * p.epsilon * self.ik * self.fwd(eta * eta)
        nl = nl * self.mask
        nl[0] = 0.0
        return nl

    def _benney_flux_hat(self, ehat):
        p = self.params
        m = 3 * self.nx // 2
        m += m % 2
        npad = np.arange(m // 2 + 1)
        ikp = 2j * np.pi * npad
        ep = _pad(ehat, m)
        inv = lambda fh: np.fft.irfft(fh * m, n=m)
        h = 1.0 + inv(ep)
        if np.any(h <= 0) or not np.all(np.isfinite(h)):
            raise FilmRuptureError("film thickness 1 + eta is not positive")
        ex = inv(ikp * ep)
        exxx = inv(ikp ** 3 * ep)
        h3 = h ** 3
        ct = _inv_tan(p.alpha)
        flux = (-(2.0 / 3.0) * h3 + p.delta * ((2.0 * ct / 3.0) * h3 * ex
                                               - (8.0 * p.reynolds / 15.0) * h3 * h3 * ex
                                               - (2.0 * p.weber_tilde / (3.0 * math.sin(p.alpha))) * h3 * exxx))
        fh = np.fft.rfft(flux) / m
        out = fh[: self.nx // 2 + 1].copy()
        if self.nx % 2 == 0:
            out[-1] = out[-1].real
        return out

    def rhs_hat(self, ehat):
        return self.L * ehat + self.nonlinear_hat(ehat)

    def rhs(self, eta):
        eta = np.asarray(eta, dtype=float)
        if self.kind is ModelKind.BENNEY and np.any(1.0 + eta <= 0):
            raise FilmRuptureError("film thickness 1 + eta is not positive")
        return self.inv(self.rhs_hat(self.fwd(eta)))

    # ------------------------------------------------------------------ ETDRK4
    def _etd(self, h):
        key = float(h)
        if key in self._etd_cache:
            return self._etd_cache[key]
        # full circle: the symbols are complex, so the half-circle/real-part shortcut is invalid
        M = 64
        r = np.exp(2j * np.pi * (np.arange(1, M + 1) - 0.5) / M)
        LR = h * self.L[:, None] + r[None, :]
        E = np.exp(h * self.L)
        E2 = np.exp(h * self.L / 2)
        Q = h * np.mean((np.exp(LR / 2) - 1) / LR, axis=1)
        f1 = h * np.mean((-4 - LR + np.exp(LR) * (4 - 3 * LR + LR ** 2)) / LR ** 3, axis=1)
        f2 = h * np.mean((2 + LR + np.exp(LR) * (-2 + LR)) / LR ** 3, axis=1)
        f3 = h * np.mean((-4 - 3 * LR - LR ** 2 + np.exp(LR) * (4 - LR)) / LR ** 3, axis=1)
        # Real symbols produce real coefficients; the contour mean has tiny imaginary noise.
        real = np.isreal(self.L)
        for arr in (Q, f1, f2, f3):
            arr[real] = arr[real].real
        out = (E, E2, Q, f1, f2, f3)
        self._etd_cache[key] = out
        return out

    def step_hat(self, ehat, h):
        E, E2, Q, f1, f2, f3 = self._etd(h)
        N = self.nonlinear_hat
        Nv = N(ehat)
        a = E2 * ehat + Q * Nv
        Na = N(a)
        b = E2 * ehat + Q * Na
        Nb = N(b)
        c = E2 * a + Q * (2 * Nb - Nv)
        Nc = N(c)
        out = E * ehat + Nv * f1 + 2 * (Na + Nb) * f2 + Nc * f3
        out[0] = ehat[0]
        return out

    def step(self, state: ModelState, dt: float) -> ModelState:
        if dt <= 0:
            raise ParameterError("dt must be positive")
        ehat = self.step_hat(self.fwd(state.eta), dt)
        eta = self.inv(ehat)
        if not np.all(np.isfinite(eta)):
            raise BlowUpError(f"non-finite surface at t={state.t + dt:g}", time=state.t + dt)
        return replace(state, eta=eta, t=state.t + dt)

    def integrate(self, state: ModelState, t_end: float, dt: Optional[float] = None,
                  tol: float = 1e-9, adaptive: bool = True,
                  callback: Optional[Callable[[ModelState], None]] = None,
                  max_steps: int = 10 ** 7) -> ModelState:
        """Advance to ``t_end``.

        With ``adaptive`` the step is controlled by step doubling: a full step is
        compared with two half steps and the step is accepted when the
        difference (a local error estimate) is below ``tol``.  Step sizes are
        restricted to ``dt0 * 2^j`` so ETDRK4 coefficients are reused.
        """
        if dt is None:
            dt = min(1e-2, t_end - state.t) if t_end > state.t else 1e-2
        ehat = self.fwd(state.eta)
        t = state.t
        h = dt
        steps = 0
        while t < t_end - 1e-14 * max(1.0, abs(t_end)):
            hstep = min(h, t_end - t)
            if adaptive:
                try:
                    full = self.step_hat(ehat, hstep)
                    half = self.step_hat(self.step_hat(ehat, hstep / 2), hstep / 2)
                except FilmRuptureError:
                    # A trial stage left the admissible set; retry with a smaller step.
                    if hstep <= 1e-12:
                        raise
                    h = hstep / 2
                    continue
                scale = max(1.0, float(np.max(np.abs(half))))
                err = float(np.max(np.abs(full - half))) / scale
                if not np.isfinite(err):
                    raise BlowUpError(f"non-finite surface near t={t:g}", time=t)
                if err > tol and hstep > 1e-12:
                    h = hstep / 2
                    continue
                ehat = half
                t += hstep
                if err < tol / 64 and hstep == h:
                    h = 2 * h
            else:
                ehat = self.step_hat(ehat, hstep)
                t += hstep
            steps += 1
            if not np.all(np.isfinite(ehat)):
                raise BlowUpError(f"non-finite surface at t={t:g}", time=t)
            if callback is not None:
                callback(replace(state, eta=self.inv(ehat), t=t))
            if steps > max_steps:
                raise BlowUpError("step budget exhausted", time=t)
        return replace(state, eta=self.inv(ehat), t=t)


_SOLVERS = {}


def _solver_for(state: ModelState) -> ModelSolver:
    mean = round(float(np.mean(state.eta)), 12) if state.kind is ModelKind.BENNEY else 0.0
    key = (state.kind, state.params, state.eta.size, state.linearized, mean)
    if key not in _SOLVERS:
        if len(_SOLVERS) > 64:
            _SOLVERS.clear()
        _SOLVERS[key] = ModelSolver(state.kind, state.params, state.eta.size, state.linearized, mean)
    return _SOLVERS[key]


def model_rhs(state: ModelState) -> np.ndarray:
    """eta_t on the grid for the model carried by ``state``."""
    return _solver_for(state).rhs(state.eta)


def step_model(state: ModelState, dt: float) -> ModelState:
    """One ETDRK4 step of size ``dt``."""
    return _solver_for(state).step(state, dt)


def integrate_model(state: ModelState, t_end: float, **kw) -> ModelState:
    return _solver_for(state).integrate(state, t_end, **kw)
