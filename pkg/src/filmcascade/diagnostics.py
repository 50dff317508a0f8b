"""Energy, dissipation and nonlinear functionals as numerical monitors, and the
Korn and trace inequality audits.

Norm conventions follow :mod:`filmcascade.spectral`: |f|_0 is the L^2 norm on
the unit torus, |f|_m uses the symbol (1 + (2 pi n)^2)^{m/2}, ||f|| is the L^2
norm on the strip and |D_x| has symbol |2 pi n|.  The velocity enters through
u^delta = (u, delta v).

Time derivatives are taken from the equations, never from the trajectory:
(eta_t, u_t, v_t) come from :func:`filmcascade.nssolver.state_rates`, and every
other time derivative (p_t, h_{i,t}, (b3 eta)_t, f_t, ...) is the derivative of
the corresponding state function along those rates, evaluated by a central
difference in the state variables.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, fields, replace
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .errors import ContractError, GeometryError, ParameterError
from .nssolver import NSState, kinematic_rate, solve_state_pressure, state_rates
from .params import ScalingParams
from .spectral import (
    abs_dx,
    antiderivative_y,
    apply_multiplier,
    bulk_inner,
    delta_weight,
    differentiate,
    homogeneous_norm,
    l2_bulk,
    make_grid,
    one_plus_abs,
    surface_inner,
    surface_norm,
)
from .transform import assemble_boundary_terms, assemble_bulk_terms, build_transform, matvec

__all__ = [
    "EnergyWeights",
    "EnergyReport",
    "Snapshot",
    "snapshot",
    "zero_snapshot",
    "energy_report",
    "E0",
    "F0",
    "N0",
    "korn_ratio",
    "korn_audit",
    "korn_fields",
    "trace_ratio",
    "trace_audit",
    "trace_constant",
    "trace_fields",
    "energy_audit",
    "AuditSummary",
]

KORN_CONSTANT = 3.0


@dataclass(frozen=True)
class EnergyWeights:
    beta1: float = 1.0
    beta2: float = 1.0
    beta3: float = 1.0
    K: float = KORN_CONSTANT

    def __post_init__(self):
        if min(self.beta1, self.beta2, self.beta3, self.K) <= 0:
            raise ParameterError("energy weights must be strictly positive")

    @classmethod
    def from_constraints(cls, C1: float, R0: float, alpha: float, K: float = KORN_CONSTANT):
        """Weights built from a constant C1 and a Reynolds bound R0 by the recipe
        beta2 = 16 K C1, beta3 = 16 K C1 R0^2 (1 + tan^2 a),
        beta1 = 16 K (C1 (1 + tan^2 a + R0^2) + 12 K beta3)."""
        t2 = math.tan(alpha) ** 2
        b2 = 16.0 * K * C1
        b3 = 16.0 * K * C1 * R0 ** 2 * (1.0 + t2)
        b1 = 16.0 * K * (C1 * (1.0 + t2 + R0 ** 2) + 12.0 * K * b3)
        return cls(b1, b2, b3, K)


# --------------------------------------------------------------------------- snapshot

SURFACE_KEYS = ("eta", "eta_t", "h1", "h2", "h3", "b3eta", "h1_t", "h2_t", "h3_t", "b3eta_t")
BULK_KEYS = ("u", "v", "p", "u_t", "v_t", "p_t", "f1", "f2", "F1x", "F1y", "F2x", "F2y")


@dataclass
class Snapshot:
    """Everything the functionals need at one instant.

    Surface arrays have shape (nx,), bulk arrays (nx, ny).  ``A5`` is the
    (2, 2, nx, ny) coefficient matrix and ``G`` maps k to the commutator
    vectors G_k (2, nx, ny).
    """

    params: ScalingParams
    t: float
    eta: np.ndarray
    u: np.ndarray
    v: np.ndarray
    p: np.ndarray
    eta_t: np.ndarray
    u_t: np.ndarray
    v_t: np.ndarray
    p_t: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    h3: np.ndarray
    b3eta: np.ndarray
    h1_t: np.ndarray
    h2_t: np.ndarray
    h3_t: np.ndarray
    b3eta_t: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    F1x: np.ndarray
    F1y: np.ndarray
    F2x: np.ndarray
    F2y: np.ndarray
    A5: np.ndarray
    G: Dict[int, np.ndarray] = field(default_factory=dict)

    def scaled(self, s: float) -> "Snapshot":
        """Every field multiplied by s (coefficients A5 left unchanged)."""
        ch = {k: s * getattr(self, k) for k in SURFACE_KEYS + BULK_KEYS}
        ch["G"] = {k: s * g for k, g in self.G.items()}
        return replace(self, **ch)


def zero_snapshot(params: ScalingParams, nx: int, ny: int, **fields_) -> Snapshot:
    """A snapshot with all fields zero except those given."""
    zs = np.zeros(nx)
    zb = np.zeros((nx, ny))
    data = {k: zs.copy() for k in SURFACE_KEYS}
    data.update({k: zb.copy() for k in BULK_KEYS})
    for k, v in fields_.items():
        if k not in data and k not in ("G", "A5"):
            raise ContractError(f"unknown snapshot field {k!r}")
        data[k] = v
    A5 = data.pop("A5", np.zeros((2, 2, nx, ny)))
    G = data.pop("G", {})
    return Snapshot(params=params, t=0.0, A5=A5, G=G, **data)


def _state_functions(state: NSState):
    """Quantities that are functions of (eta, u, v) alone, the pressure included."""
    eta_t = kinematic_rate(state)
    asm = build_transform(state.eta, state.params, state.ny, eta_t=eta_t)
    bt = assemble_boundary_terms(asm, state.u, state.v, state.eta)
    p = solve_state_pressure(state, asm, bt)
    return eta_t, asm, bt, p


def snapshot(state: NSState, tau: Optional[float] = None, kmax: int = 2) -> Snapshot:
    """Evaluate fields, rates and nonlinear terms of ``state``.

    ``tau`` is the step of the central difference along the rates; by default
    it is 1e-4 divided by the largest rate magnitude (bounded to [1e-7, 1e-3]).
    """
    prm = state.params
    rates = state_rates(state)
    base = state.copy(p=rates.p)
    if tau is None:
        scale = max(np.max(np.abs(rates.eta_t)), np.max(np.abs(rates.u_t)),
                    np.max(np.abs(rates.v_t)), 1e-30)
        tau = float(np.clip(1e-4 / scale, 1e-7, 1e-3)) if scale > 1e-30 else 1e-4

    def shifted(sign):
        s = state.copy(eta=state.eta + sign * tau * rates.eta_t,
                       u=state.u + sign * tau * rates.u_t,
                       v=state.v + sign * tau * rates.v_t)
        eta_t, asm, bt, p = _state_functions(s)
        bulk = assemble_bulk_terms(asm, s.u, s.v, p)
        return eta_t, asm, bt, p, bulk

    eta_t0, asm0, bt0, p0 = _state_functions(base)
    plus = shifted(+1.0)
    minus = shifted(-1.0)
    ddt = lambda a, b: (a - b) / (2.0 * tau)
    p_t = ddt(plus[3], minus[3])
    bt_p, bt_m = plus[2], minus[2]
    time_data = {"tau": tau, "plus": plus[4], "minus": minus[4],
                 "u_t": rates.u_t, "v_t": rates.v_t, "p_t": p_t}
    bulk = assemble_bulk_terms(asm0, state.u, state.v, p0, time_data=time_data, kmax=kmax)
    return Snapshot(
        params=prm, t=state.t, eta=state.eta.copy(), u=state.u.copy(), v=state.v.copy(), p=p0,
        eta_t=rates.eta_t, u_t=rates.u_t, v_t=rates.v_t, p_t=p_t,
        h1=bt0.h1, h2=bt0.h2, h3=bt0.h3, b3eta=bt0.b3 * state.eta,
        h1_t=ddt(bt_p.h1, bt_m.h1), h2_t=ddt(bt_p.h2, bt_m.h2), h3_t=ddt(bt_p.h3, bt_m.h3),
        b3eta_t=ddt(bt_p.b3 * (state.eta + tau * rates.eta_t),
                    bt_m.b3 * (state.eta - tau * rates.eta_t)),
        f1=bulk.f1, f2=bulk.f2, F1x=bulk.F1[0], F1y=bulk.F1[1], F2x=bulk.F2[0], F2y=bulk.F2[1],
        A5=asm0.A5, G=dict(bulk.G),
    )


# --------------------------------------------------------------------------- primitives

def _dx(f, k=1):
    return differentiate(f, "x", k) if k else f


def _dy(f, k=1):
    return differentiate(f, "y", k) if k else f


def _s2(f):
    """|f|_0^2 on the torus."""
    return surface_norm(f, 0.0) ** 2


def _b2(f):
    """||f||^2 on the strip."""
    return l2_bulk(f) ** 2


def _grad_delta2(w, d):
    """||grad_delta w||^2 for a scalar bulk field."""
    return d ** 2 * _b2(_dx(w)) + _b2(_dy(w))


def _ud2(u, v, d):
    """||u^delta||^2."""
    return _b2(u) + d ** 2 * _b2(v)


def _grad_ud2(u, v, d):
    """||grad_delta u^delta||^2."""
    return _grad_delta2(u, d) + d ** 2 * _grad_delta2(v, d)


def _dx_snapshot(z: Snapshot, k: int) -> Snapshot:
    if k == 0:
        return z
    ch = {key: _dx(getattr(z, key), k) for key in SURFACE_KEYS + BULK_KEYS}
    return replace(z, **ch)


def _geometry(prm: ScalingParams):
    return prm.inv_tan_alpha, math.sin(prm.alpha), prm.delta ** 2 * prm.weber


# --------------------------------------------------------------------------- E0, F0, N0

def E0(z: Snapshot, weights: EnergyWeights = EnergyWeights(), parts: bool = False):
    prm = z.params
    d, R = prm.delta, prm.reynolds
    cot, sin, dW = _geometry(prm)
    eta_x = _dx(z.eta)
    eta_xx = _dx(z.eta, 2)
    base = d ** 2 * _b2(z.v) + (2.0 / R) * (cot * _s2(z.eta) + dW / sin * _s2(eta_x))
    b1 = (d ** 2 * _ud2(_dx(z.u), _dx(z.v), d)
          + (2.0 / R) * (cot * d ** 2 * _s2(eta_x) + dW / sin * d ** 2 * _s2(eta_xx)))
    b2 = (d ** 4 * _ud2(_dx(z.u, 2), _dx(z.v, 2), d)
          + (2.0 / R) * (cot * d ** 4 * _s2(eta_xx) + dW / sin * d ** 4 * _s2(_dx(z.eta, 3))))
    wt = np.array([z.u_t, d * z.v_t])
    IA5wt = wt - matvec(z.A5, wt)
    b3 = (d ** 2 * (bulk_inner(IA5wt[0], wt[0]) + bulk_inner(IA5wt[1], wt[1]))
          + (2.0 / R) * (cot * d ** 2 * _s2(z.eta_t) + dW / sin * d ** 2 * _s2(_dx(z.eta_t))))
    total = base + weights.beta1 * b1 + weights.beta2 * b2 + weights.beta3 * b3
    if parts:
        return total, {"base": base, "beta1": b1, "beta2": b2, "beta3": b3}
    return total


def F0(z: Snapshot, weights: EnergyWeights = EnergyWeights(), parts: bool = False):
    prm = z.params
    d, R = prm.delta, prm.reynolds
    cot, sin, dW = _geometry(prm)
    K = weights.K
    ux, vx = _dx(z.u), _dx(z.v)
    base = (1.0 / (2.0 * R)) * (d * _ud2(ux, vx, d) + 0.5 * d * _b2(antiderivative_y(_dx(z.p))))
    surf = (1.0 / (6.0 * R)) * (0.5 * cot ** 2 * d * _s2(_dx(z.eta))
                                + 2.0 * dW * cot / sin * d * _s2(_dx(z.eta, 2))
                                + dW ** 2 / sin ** 2 * d * _s2(_dx(z.eta, 3)))
    visc = (1.0 / (8.0 * K * R)) * (weights.beta1 * d * _grad_ud2(ux, vx, d)
                                    + weights.beta2 * d ** 3 * _grad_ud2(_dx(z.u, 2), _dx(z.v, 2), d)
                                    + weights.beta3 * d * _grad_ud2(z.u_t, z.v_t, d))
    total = base + surf + visc
    if parts:
        return total, {"base": base, "surface": surf, "viscous": visc}
    return total


def N0(z: Snapshot):
    prm = z.params
    d = prm.delta
    dW = prm.delta ** 2 * prm.weber
    half = lambda f: homogeneous_norm(f, 0.5) ** 2                          # noqa: E731
    gam = lambda a, b: abs(surface_inner(a, b))                              # noqa: E731
    om = lambda a, b: abs(bulk_inner(a[0], b[0]) + bulk_inner(a[1], b[1]))   # noqa: E731
    h1, h2, h3, be = z.h1, z.h2, z.h3, z.b3eta
    h1x, h2x, h3x = _dx(h1), _dx(h2), _dx(h3)
    total = (_s2(h1) / d + _s2(h2) / d + d * _s2(h1x) + d * _s2(h2x)
             + d * _s2(h3) + d ** 3 * _s2(z.h3_t) + d ** 3 * _s2(h3x) + d ** 5 * _s2(_dx(h3, 2))
             + d ** 2 * half(h1x) + d ** 2 * half(h2x)
             + d * gam(z.h1_t, z.u_t[:, -1]) + d * gam(z.h2_t, d * z.v_t[:, -1])
             + d * _s2(_dx(be)) + d ** 3 * _s2(_dx(be, 2)) + d * _s2(z.b3eta_t)
             + gam(z.eta, _dx(be)))
    total += dW * (gam(_dx(z.eta, 2), d * h3 + d * _dx(be)) / d
                   + d ** 3 * gam(_dx(z.eta, 4), d * _dx(h3, 2))
                   + d * gam(_dx(z.eta_t, 2), d * z.h3_t))
    total += _b2(z.f1) / d + _b2(z.f2) / d + d * _b2(_dx(z.f1))
    w_x = np.array([_dx(z.u), d * _dx(z.v)])
    w_xx = np.array([_dx(z.u, 2), d * _dx(z.v, 2)])
    w_t = np.array([z.u_t, d * z.v_t])
    F1 = np.array([z.F1x, z.F1y])
    total += (d * om(_dx(F1), w_x) + d ** 3 * om(_dx(F1, 2), w_xx)
              + d * om(np.array([z.F2x, z.F2y]), w_t))
    return total


# --------------------------------------------------------------------------- report

@dataclass
class EnergyReport:
    t: float
    m: int
    E0: float
    F0: float
    N0: float
    Em: float
    Fm: float
    Nm: float
    Et: float       # modified energy
    Ft: float       # modified dissipation
    Dm: float
    audit_ratio: float = float("nan")
    E0_parts: Dict[str, float] = field(default_factory=dict)

    def as_dict(self):
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "E0_parts"}
        return out


def _one_plus(m, f):
    return apply_multiplier(one_plus_abs(m), f) if m else f


def modified_energy(z: Snapshot, Em: float, m: int) -> float:
    return Em + _b2(_one_plus(m, z.u)) + _b2(_one_plus(m, _dy(z.u)))


def modified_dissipation(z: Snapshot, Fm: float, m: int) -> float:
    prm = z.params
    d = prm.delta
    dW = d ** 2 * prm.weber
    val = Fm
    val += d * surface_norm(z.eta_t, m, weight=(2.5, d)) ** 2
    val += dW ** 2 * d ** 2 * surface_norm(apply_multiplier(abs_dx(3.5), z.eta), m) ** 2
    # (1 + |D_x|)^m (1 + delta |D_x|) applied to grad_delta p
    mult = lambda f: apply_multiplier(one_plus_abs(m) * delta_weight(1.0, d), f)  # noqa: E731
    val += (d ** 2 * _b2(mult(_dx(z.p))) + _b2(mult(_dy(z.p)))) / d
    mm = max(m - 1, 0)
    val += d * (d ** 2 * _b2(_one_plus(mm, _dx(z.p_t))) + _b2(_one_plus(mm, _dy(z.p_t))))
    return val


def regularity_energy(z: Snapshot, m: int) -> float:
    """D_m: no time derivatives."""
    prm = z.params
    d = prm.delta
    dW = d ** 2 * prm.weber
    comps = (z.u, d * z.v)
    val = surface_norm(z.eta, m, weight=(2.0, d)) ** 2
    for c in comps:
        val += _b2(_one_plus(m, c))
        # D_delta c = {delta c_x, c_y}
        val += d ** 2 * _b2(_one_plus(m, _dx(c))) + _b2(_one_plus(m, _dy(c)))
        # D_delta^2 c = {delta^2 c_xx, delta c_xy, c_yy}
        val += (d ** 4 * _b2(_one_plus(m, _dx(c, 2))) + d ** 2 * _b2(_one_plus(m, _dx(_dy(c))))
                + _b2(_one_plus(m, _dy(c, 2))))
    val += dW ** 2 * surface_norm(_dx(z.eta), m + 1, weight=(1.0, d)) ** 2
    val += dW * d ** 2 * _b2(_one_plus(m, _dx(_dy(z.v))))
    return val


def energy_report(z, m: int = 2, weights: EnergyWeights = EnergyWeights(),
                  audit_ratio: float = float("nan")) -> EnergyReport:
    """All functionals at one instant.  ``z`` must be a :class:`Snapshot`."""
    if isinstance(z, NSState):
        raise ContractError("time derivatives are not cached on a bare NSState; build a snapshot first")
    if not isinstance(z, Snapshot):
        raise ContractError("energy_report expects a Snapshot")
    if not (0 <= m <= 4):
        raise ParameterError("m must lie in 0..4")
    e0, parts = E0(z, weights, parts=True)
    f0 = F0(z, weights)
    n0 = N0(z)
    Em = Fm = Nm = 0.0
    for k in range(m + 1):
        zk = _dx_snapshot(z, k)
        Em += E0(zk, weights)
        Fm += F0(zk, weights)
        Nm += N0(zk)
    d = z.params.delta
    for k in range(1, m + 1):
        wt_k = np.array([_dx(z.u_t, k), d * _dx(z.v_t, k)])
        Gk = z.G.get(k)
        if Gk is not None:
            Nm += d * abs(bulk_inner(Gk[0], wt_k[0]) + bulk_inner(Gk[1], wt_k[1]))
        Nm += abs(surface_inner(_dx(z.eta, k), _dx(z.h3, k)))
    return EnergyReport(
        t=z.t, m=m, E0=e0, F0=f0, N0=n0, Em=Em, Fm=Fm, Nm=Nm,
        Et=modified_energy(z, Em, m), Ft=modified_dissipation(z, Fm, m),
        Dm=regularity_energy(z, m), audit_ratio=audit_ratio, E0_parts=parts,
    )


# --------------------------------------------------------------------------- Korn audit

def korn_ratio(u, v, delta: float) -> float:
    """LHS/RHS of the Korn inequality for a field on the strip (0/0 -> 0)."""
    d = delta
    ux, uy, vx, vy = _dx(u), _dy(u), _dx(v), _dy(v)
    lhs = d ** 2 * _b2(ux) + _b2(uy) + d ** 4 * _b2(vx) + d ** 2 * _b2(vy)
    rhs = 2.0 * d ** 2 * _b2(ux) + _b2(uy + d ** 2 * vx) + 2.0 * d ** 2 * _b2(vy)
    if rhs == 0.0:
        return 0.0
    return lhs / rhs


def korn_fields(psi_hat, nx: int, ny: int):
    """(u, v) = (psi_y, -psi_x) for psi = y^2 * q(x, y), where ``psi_hat`` holds
    q's coefficients: array (modes, degree) of complex amplitudes of
    e^{2 pi i n x} T_j(2y - 1) for n = 0..modes-1."""
    g = make_grid(nx, ny)
    psi = np.zeros((nx, ny))
    s = 2.0 * g.y - 1.0
    T = np.polynomial.chebyshev.chebvander(s, psi_hat.shape[1] - 1)
    for n in range(psi_hat.shape[0]):
        prof = T @ psi_hat[n]
        psi += np.real(np.exp(2j * np.pi * n * g.x)[:, None] * prof[None, :])
    psi *= g.y[None, :] ** 2
    u = _dy(psi)
    v = -_dx(psi)
    _check_admissible(u, v)
    return u, v


def _check_admissible(u, v, tol=1e-9):
    scale = max(1.0, float(np.max(np.abs(u))), float(np.max(np.abs(v))))
    if l2_bulk(_dx(u) + _dy(v)) > tol * scale:
        raise ParameterError("Korn test field is not divergence free")
    if max(np.max(np.abs(u[:, 0])), np.max(np.abs(v[:, 0]))) > tol * scale:
        raise ParameterError("Korn test field violates no-slip at y = 0")


def korn_audit(deltas: Sequence[float], trials: int = 100, nx: int = 32, ny: int = 24,
               modes: int = 6, degree: int = 6, seed: int = 0) -> Dict[float, float]:
    """Worst LHS/RHS over random admissible fields, per delta (same fields for each delta)."""
    rng = np.random.default_rng(seed)
    fields_ = []
    for _ in range(trials):
        c = rng.standard_normal((modes, degree)) + 1j * rng.standard_normal((modes, degree))
        c[0] = c[0].real
        c /= (1.0 + np.arange(modes))[:, None] ** 2
        fields_.append(korn_fields(c, nx, ny))
    out = {}
    for d in deltas:
        out[float(d)] = max(korn_ratio(u, v, d) for u, v in fields_)
    return out


# --------------------------------------------------------------------------- trace audit

def trace_ratio(f, delta: float) -> float:
    """(|f|_0^2 + delta ||D_x|^{1/2} f|_0^2) / (||f||^2 + delta^2 ||f_x||^2 + ||f_y||^2)."""
    f = np.asarray(f, dtype=float)
    top = f[:, -1]
    num = _s2(top) + delta * homogeneous_norm(top, 0.5) ** 2
    den = _b2(f) + delta ** 2 * _b2(_dx(f)) + _b2(_dy(f))
    if den == 0.0:
        return 0.0
    return num / den


def trace_fields(trials: int, nx: int = 32, ny: int = 24, modes: int = 8, degree: int = 8,
                 seed: int = 0):
    """Random smooth band-limited fields: trigonometric in x times Chebyshev series
    in y, with amplitudes decaying like (1 + n)^-3 (1 + j)^-3."""
    rng = np.random.default_rng(seed)
    g = make_grid(nx, ny)
    s = 2.0 * g.y - 1.0
    T = np.polynomial.chebyshev.chebvander(s, degree - 1)
    decay = ((1.0 + np.arange(modes))[:, None] * (1.0 + np.arange(degree))[None, :]) ** 3
    out = []
    for _ in range(trials):
        c = rng.standard_normal((modes, degree)) + 1j * rng.standard_normal((modes, degree))
        c[0] = c[0].real
        c = c / decay
        f = np.zeros((nx, ny))
        for n in range(modes):
            f += np.real(np.exp(2j * np.pi * n * g.x)[:, None] * (T @ c[n])[None, :])
        out.append(f)
    return out


def trace_constant(delta: float, modes: int = 8, ny: int = 24) -> float:
    """Best constant of the trace inequality on the discrete space (band n < modes).

    For each mode the ratio is a rank-one Rayleigh quotient, so the supremum is
    (1 + delta k) e^T B^{-1} e with B the discrete denominator form and e the
    surface evaluation vector.
    """
    g = make_grid(2, ny)
    W = np.diag(g.weights)
    D = g.Dy
    e = np.zeros(ny)
    e[-1] = 1.0
    best = 0.0
    for n in range(modes):
        k = 2.0 * np.pi * n
        B = (1.0 + (delta * k) ** 2) * W + D.T @ W @ D
        # |f|_0^2 of Re(e^{ikx} P) is |P(1)|^2/2 for n > 0, and so is every bulk term
        best = max(best, (1.0 + delta * k) * float(e @ np.linalg.solve(B, e)))
    return best


def trace_audit(deltas: Sequence[float], trials: int = 100, seed: int = 0, **kw) -> Dict[float, float]:
    """Worst trace ratio per delta over the same random fields."""
    fs = trace_fields(trials, seed=seed, **kw)
    return {float(d): max(trace_ratio(f, d) for f in fs) for d in deltas}


# --------------------------------------------------------------------------- energy audit

@dataclass
class AuditSummary:
    t: np.ndarray
    lhs: np.ndarray            # dE/dt + F
    N: np.ndarray
    implied_C: np.ndarray
    max_C: float
    fraction_nonpositive: float
    fraction_bounded: float
    passed: bool


def energy_audit(times: Sequence[float], E: Sequence[float], F: Sequence[float],
                 N: Sequence[float]) -> AuditSummary:
    """Audit of dE/dt + F <= C N along a uniformly sampled series."""
    t = np.asarray(times, dtype=float)
    E = np.asarray(E, dtype=float)
    F = np.asarray(F, dtype=float)
    N = np.asarray(N, dtype=float)
    if t.size < 3:
        raise ParameterError("the energy audit needs at least three reports")
    h = np.diff(t)
    if np.max(np.abs(h - h[0])) > 1e-9 * max(1.0, abs(h[0])):
        raise ParameterError("reports must be uniformly spaced in time")
    dE = np.gradient(E, h[0], edge_order=2)
    lhs = dE + F
    with np.errstate(divide="ignore", invalid="ignore"):
        C = np.where(N > 0, lhs / N, np.where(lhs > 0, np.inf, 0.0))
    pos = F > 0
    if np.any(pos):
        tdiss = np.min(E[pos] / F[pos])
        if h[0] > tdiss:
            warnings.warn(f"report cadence {h[0]:g} exceeds the dissipation time {tdiss:g}",
                          RuntimeWarning, stacklevel=2)
    maxC = float(np.max(C)) if C.size else 0.0
    maxC = max(maxC, 0.0)
    bounded = float(np.mean(lhs <= maxC * N + 1e-300)) if np.isfinite(maxC) else 0.0
    return AuditSummary(t=t, lhs=lhs, N=N, implied_C=C, max_C=maxC,
                        fraction_nonpositive=float(np.mean(lhs <= 0)),
                        fraction_bounded=bounded, passed=bool(np.isfinite(maxC)))
