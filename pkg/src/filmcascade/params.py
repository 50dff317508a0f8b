"""Physical and nondimensional parameters, and the Nusselt flat-film base flow."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "PhysicalParams",
    "ScalingParams",
    "NusseltProfile",
    "nondimensionalize",
    "nusselt",
    "nusselt_dimensional",
]


def _require_positive(**values):
    for name, val in values.items():
        if not (np.isfinite(val) and val > 0):
            raise ParameterError(f"{name} must be strictly positive, got {val!r}")


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional description of the film (SI units)."""

    rho: float
    g: float
    alpha: float
    mu: float
    sigma: float
    h0: float
    l0: float
    a0: float

    def __post_init__(self):
        _require_positive(rho=self.rho, g=self.g, alpha=self.alpha, mu=self.mu,
                          sigma=self.sigma, h0=self.h0, l0=self.l0, a0=self.a0)
        if self.alpha > math.pi / 2 + 1e-15:
            raise ParameterError(f"alpha must lie in (0, pi/2], got {self.alpha}")


@dataclass(frozen=True)
class ScalingParams:
    """Nondimensional parameter bundle.

    ``delta`` is the aspect ratio h0/l0, ``epsilon`` the amplitude ratio a0/h0,
    ``reynolds`` and ``weber`` use the surface-speed convention.  The reference
    scales ``U0, V0, t0, P0`` are only known when the bundle was produced from
    :class:`PhysicalParams`.
    """

    delta: float
    epsilon: float
    reynolds: float
    weber: float
    alpha: float
    U0: Optional[float] = field(default=None, compare=False)
    V0: Optional[float] = field(default=None, compare=False)
    t0: Optional[float] = field(default=None, compare=False)
    P0: Optional[float] = field(default=None, compare=False)

    def __post_init__(self):
        _require_positive(delta=self.delta, reynolds=self.reynolds, weber=self.weber,
                          alpha=self.alpha)
        if self.delta > 1:
            raise ParameterError(f"delta must satisfy 0 < delta <= 1, got {self.delta}")
        if not (0 <= self.epsilon <= 1):
            raise ParameterError(f"epsilon must satisfy 0 <= epsilon <= 1, got {self.epsilon}")
        if self.alpha > math.pi / 2 + 1e-15:
            raise ParameterError(f"alpha must lie in (0, pi/2], got {self.alpha}")

    @property
    def weber_tilde(self) -> float:
        """delta**2 * W, the surface-tension weight that survives the thin-film limit."""
        return self.delta ** 2 * self.weber

    @property
    def tan_alpha(self) -> float:
        return math.tan(self.alpha)

    @property
    def sin_alpha(self) -> float:
        return math.sin(self.alpha)

    @property
    def inv_tan_alpha(self) -> float:
        """1/tan(alpha), evaluated as cos/sin so that alpha = pi/2 gives exactly 0."""
        if abs(self.alpha - math.pi / 2) < 1e-15:
            return 0.0
        return math.cos(self.alpha) / math.sin(self.alpha)

    def replace(self, **changes) -> "ScalingParams":
        return replace(self, **changes)

    def require_inclined(self):
        """The Navier-Stokes solver needs 0 < alpha < pi/2 (1/tan(alpha) enters the BCs)."""
        if not (0 < self.alpha < math.pi / 2):
            raise ParameterError("the Navier-Stokes solver requires 0 < alpha < pi/2")

    def weber_window_violation(self, w1: float, w2: float) -> Optional[str]:
        """Return a message when W lies outside [W1, W2/delta**2], else None."""
        upper = w2 / self.delta ** 2
        if self.weber < w1:
            return f"W={self.weber:g} below W1={w1:g}"
        if self.weber > upper:
            return f"W={self.weber:g} above W2/delta^2={upper:g}"
        return None


def nondimensionalize(phys: PhysicalParams) -> ScalingParams:
    """Map physical data to the nondimensional bundle.

    U0 = rho g h0^2 sin(alpha) / (2 mu), V0 = delta U0, t0 = l0/U0,
    P0 = rho g h0 sin(alpha), R = rho U0 h0 / mu, W = sigma / (rho g h0^2).
    """
    if not isinstance(phys, PhysicalParams):
        raise ParameterError("expected PhysicalParams")
    sin_a = math.sin(phys.alpha)
    U0 = phys.rho * phys.g * phys.h0 ** 2 * sin_a / (2.0 * phys.mu)
    delta = phys.h0 / phys.l0
    epsilon = phys.a0 / phys.h0
    if delta > 1 or epsilon > 1:
        raise ParameterError(f"thin-film scalings need delta, epsilon <= 1 (got {delta:g}, {epsilon:g})")
    return ScalingParams(
        delta=delta,
        epsilon=epsilon,
        reynolds=phys.rho * U0 * phys.h0 / phys.mu,
        weber=phys.sigma / (phys.rho * phys.g * phys.h0 ** 2),
        alpha=phys.alpha,
        U0=U0,
        V0=delta * U0,
        t0=phys.l0 / U0,
        P0=phys.rho * phys.g * phys.h0 * sin_a,
    )


def nusselt(y):
    """Nusselt profile (u_bar, du_bar/dy) = (2y - y^2, 2 - 2y) on 0 <= y <= 1."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 0) or np.any(y_arr > 1) or not np.all(np.isfinite(y_arr)):
        raise DomainError("the Nusselt profile is defined for 0 <= y <= 1")
    ubar = 2.0 * y_arr - y_arr ** 2
    dubar = 2.0 - 2.0 * y_arr
    if np.ndim(y) == 0:
        return float(ubar), float(dubar)
    return ubar, dubar


def nusselt_dimensional(phys: PhysicalParams, y_dim):
    """Dimensional laminar velocity (rho g sin(alpha) / 2 mu)(2 h0 y - y^2)."""
    y_dim = np.asarray(y_dim, dtype=float)
    return phys.rho * phys.g * math.sin(phys.alpha) / (2.0 * phys.mu) * (2.0 * phys.h0 * y_dim - y_dim ** 2)


@dataclass(frozen=True)
class NusseltProfile:
    """Nusselt flow sampled on a vertical grid."""

    y: np.ndarray
    ubar: np.ndarray
    dubar: np.ndarray

    @classmethod
    def on(cls, y) -> "NusseltProfile":
        ubar, dubar = nusselt(np.asarray(y, dtype=float))
        return cls(np.asarray(y, dtype=float), np.asarray(ubar), np.asarray(dubar))


def warn_if_outside_weber_window(params: ScalingParams, w1: float, w2: float):
    msg = params.weber_window_violation(w1, w2)
    if msg is not None:
        warnings.warn(f"Weber number outside the uniform-estimate window: {msg}", stacklevel=2)
    return msg
