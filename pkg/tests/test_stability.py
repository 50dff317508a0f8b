import math

import numpy as np
import pytest

from filmcascade.errors import ParameterError
from filmcascade.models import benney_coefficients, linear_symbol
from filmcascade.params import ScalingParams
from filmcascade.stability import (OSProblem, critical_reynolds, critical_reynolds_root, dispersion,
                                   neutral_wavenumber, os_leading, os_spectrum)


def test_critical_reynolds_closed_form():
    assert critical_reynolds(math.pi / 4) == pytest.approx(1.25, abs=1e-14)
    for a in (0.1, 0.5, 1.2):
        assert critical_reynolds_root(a) == pytest.approx(1.25 / math.tan(a), rel=1e-13)
    with pytest.raises(ParameterError):
        critical_reynolds(math.pi / 2)


@pytest.mark.parametrize("kind", ["burgers", "kdvb", "kawahara", "benney"])
def test_dispersion_agrees_with_model_symbol(kind):
    p = ScalingParams(0.07, 0.0, 0.8, 1.3, 0.6)
    n = np.arange(1, 6)
    np.testing.assert_allclose(dispersion(kind, 2 * np.pi * n, p), linear_symbol(kind, p, n), rtol=1e-13)


def test_kawahara_sign_change_at_neutral_wavenumber():
    p = ScalingParams(0.05, 0.0, 2.0, 1.0, math.pi / 4)
    kn = neutral_wavenumber(p)
    assert dispersion("kawahara", 0.99 * kn, p).real > 0
    assert dispersion("kawahara", 1.01 * kn, p).real < 0
    c = benney_coefficients(p.alpha, p.reynolds, p.weber)
    assert kn == pytest.approx(math.sqrt(c.B1 / (p.delta ** 2 * c.G1)))
    assert math.isnan(neutral_wavenumber(p.replace(reynolds=0.5)))


def test_orr_sommerfeld_long_wave_limit():
    # at small delta k the leading eigenvalue approaches the long-wave symbol
    p = ScalingParams(0.05, 0.0, 1.1, 1.0, math.pi / 4)
    k = 0.5
    lam = os_leading(k, p)
    assert abs(lam.imag + 2 * k) < 2e-3
    assert lam.real == pytest.approx(dispersion("kawahara", k, p).real, rel=0.05)
    assert lam.real == pytest.approx(dispersion("benney", k, p).real, rel=0.05)


def test_orr_sommerfeld_spectrum_sorted_and_refined():
    p = ScalingParams(0.1, 0.0, 0.8, 1.0, math.pi / 4)
    w = os_spectrum(OSProblem(2 * np.pi, p, 32))
    assert np.all(np.diff(w.real) <= 0)
    w48 = os_spectrum(OSProblem(2 * np.pi, p, 48))
    assert abs(w[0] - w48[0]) < 1e-6 * abs(w[0])


def test_os_problem_validation():
    p = ScalingParams(0.1, 0.0, 0.8, 1.0, math.pi / 4)
    with pytest.raises(ParameterError):
        OSProblem(0.0, p)
    with pytest.raises(ParameterError):
        OSProblem(1.0, p, ny=4)
