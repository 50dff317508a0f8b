import math

import numpy as np
import pytest

from filmcascade.errors import ParameterError
from filmcascade.nssolver import (NSSolver, NSState, check_compatibility, compatible_initial_state,
                                  divergence_residual, run_ns, state_rates)
from filmcascade.params import ScalingParams
from filmcascade.stability import os_leading

PRM = ScalingParams(0.1, 0.1, 0.5, 0.4, math.pi / 6)


def surface(nx, amp=1.0, n=1):
    return amp * np.cos(2 * np.pi * n * np.arange(nx) / nx)


def test_zero_state_is_a_fixed_point():
    s = NSState.zero(PRM, 16, 16)
    solver = NSSolver(PRM, 16, 16, 0.01)
    for _ in range(1000):
        s = solver.step(s)
    assert max(np.max(np.abs(f)) for f in (s.eta, s.u, s.v, s.p)) < 1e-12


@pytest.mark.parametrize("method", ["stokes", "quadratic"])
def test_compatible_initial_state(method):
    eta0 = surface(16, 0.8) + 0.3 * np.sin(4 * np.pi * np.arange(16) / 16)
    s = compatible_initial_state(eta0, PRM.replace(epsilon=0.3), 20, method=method)
    rep = check_compatibility(s)
    assert rep["passed"], rep
    assert rep["divergence"] < 1e-10


def test_incompatible_state_is_reported():
    s = compatible_initial_state(surface(16), PRM, 20)
    bad = s.copy(u=s.u + 0.1)
    rep = check_compatibility(bad)
    assert not rep["passed"] and rep["no_slip"] > 0.05
    with pytest.raises(ParameterError):
        compatible_initial_state(surface(16), PRM, 20, method="cubic")


def test_mass_and_divergence_preserved():
    nx, ny = 16, 20
    s = compatible_initial_state(surface(nx, 0.5) + 0.2, PRM, ny)
    m0 = s.eta.mean()
    solver = NSSolver(PRM, nx, ny, 0.005)
    for _ in range(1000):
        s = solver.step(s)
    assert abs(s.eta.mean() - m0) < 1e-10
    assert divergence_residual(s) < 1e-9
    assert check_compatibility(s, tol=1e-7)["passed"]


def test_linear_rate_matches_orr_sommerfeld():
    prm = ScalingParams(0.1, 0.0, 0.8, 1.0, math.pi / 4)
    nx, ny, dt = 16, 24, 0.005
    s = compatible_initial_state(surface(nx), prm, ny)
    lam = os_leading(2 * np.pi, prm, 32)
    solver = NSSolver(prm, nx, ny, dt)
    amps = []
    for i in range(1, int(round(3 / dt)) + 1):
        s = solver.step(s)
        if i in (int(round(2 / dt)), int(round(3 / dt))):
            amps.append(np.fft.rfft(s.eta)[1])
    rate = np.log(abs(amps[1] / amps[0]))
    assert rate == pytest.approx(lam.real, rel=0.01)


@pytest.fixture(scope="module")
def order_setup():
    nx, ny = 16, 16
    s0 = compatible_initial_state(surface(nx, 0.5), PRM, ny)
    solver = NSSolver(PRM, nx, ny, 0.00025)
    s = s0
    for _ in range(400):
        s = solver.step(s)
    return s0, s.eta


@pytest.mark.parametrize("scheme, order", [("sbdf2", 2), ("cnab2", 2), ("euler", 1)])
def test_observed_time_order(order_setup, scheme, order):
    s0, ref = order_setup
    errs = []
    for dt in (0.004, 0.002):
        solver = NSSolver(PRM, s0.nx, s0.ny, dt, scheme=scheme)
        s = s0
        for _ in range(int(round(0.1 / dt))):
            s = solver.step(s)
        errs.append(np.max(np.abs(s.eta - ref)))
    assert math.log2(errs[0] / errs[1]) == pytest.approx(order, abs=0.2)


def test_step_consistent_with_rates():
    nx, ny = 16, 16
    s0 = compatible_initial_state(surface(nx, 0.5), PRM, ny)
    r = state_rates(s0)
    dt = 1e-4
    s1 = NSSolver(PRM, nx, ny, dt, scheme="euler").step(s0)
    assert np.max(np.abs((s1.eta - s0.eta) / dt - r.eta_t)) < 1e-2 * np.max(np.abs(r.eta_t))


def test_viscous_shift_keeps_small_steps_stable():
    prm = ScalingParams(0.2, 0.2, 0.5, 0.4, math.pi / 6)
    nx, ny = 16, 20
    s = compatible_initial_state(surface(nx), prm, ny)
    solver = NSSolver(prm, nx, ny, 0.000625)
    for _ in range(200):
        s = solver.step(s)
    assert solver.visc_shift > 0
    assert np.all(np.isfinite(s.u)) and np.max(np.abs(s.eta)) < 1.0


def test_zero_horizon_trajectory():
    s = compatible_initial_state(surface(16, 0.1), PRM, 16)
    traj = run_ns(s, 0.0, 0.01)
    assert traj.times == [0.0] and traj.states[0] is s
