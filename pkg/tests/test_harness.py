import math

import numpy as np
import pytest

from filmcascade.config import ExperimentConfig
from filmcascade.errors import ParameterError
from filmcascade.harness import (Table, compare_models, compare_ns_model, emit_report, fit_slope,
                                 initial_surface, read_csv_table, sweep_delta)


def small_cfg(**kw):
    base = dict(kind="compare", deltas=(0.2, 0.1, 0.05, 0.025), nx=16, ny=12, t_end=0.1,
                cadence=0.05, dt=0.01)
    base.update(kw)
    return ExperimentConfig(**base)


def test_slope_fit_exact_power_law():
    d = np.array([0.2, 0.1, 0.05, 0.025])
    fit = fit_slope(d, 3.0 * d ** 2)
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.ci_low <= 2.0 <= fit.ci_high
    with pytest.raises(ParameterError):
        fit_slope([0.1], [1.0])


def test_slope_fit_drops_coarse_outlier():
    d = np.array([0.4, 0.2, 0.1, 0.05, 0.025, 0.0125])
    e = d ** 2 * (1 + 0.01 * np.array([0, 1, -1, 1, -1, 1]))
    e[0] *= 50.0
    fit = fit_slope(d, e)
    assert fit.dropped == (0.4,)
    assert fit.slope == pytest.approx(2.0, abs=0.05)
    assert fit_slope(d[1:], e[1:]).dropped == ()
    clean = fit_slope(d, d ** 2 * (1 + 0.01 * np.array([0, 1, -1, 1, -1, 1])))
    assert clean.dropped == ()


def test_initial_surface_recipe():
    cfg = small_cfg(modes=((1, 0.1, 0.0), (2, 0.05, math.pi / 2)), nx=32)
    x = np.arange(32) / 32
    np.testing.assert_allclose(initial_surface(cfg),
                               0.1 * np.cos(2 * np.pi * x) - 0.05 * np.sin(4 * np.pi * x), atol=1e-15)
    a = initial_surface(cfg.with_(random_modes=3, random_amplitude=0.1, seed=4))
    b = initial_surface(cfg.with_(random_modes=3, random_amplitude=0.1, seed=4))
    assert np.array_equal(a, b)
    with pytest.raises(ParameterError):
        initial_surface(cfg.with_(modes=((20, 0.1, 0.0),)))


def test_same_model_comparison_is_zero():
    res = compare_models(small_cfg(model_a="kdvb", model_b="kdvb"))
    assert all(e == 0.0 for e in res.err_l2 + res.err_inf)
    assert all(g.passed for g in res.gates)


def test_zero_data_ns_comparison():
    res = compare_ns_model(small_cfg(modes=(), deltas=(0.2, 0.1, 0.05), model="burgers"), refine=False)
    assert res.err_l2 == [0.0, 0.0, 0.0]
    assert all(g.passed for g in res.gates)


def test_zero_data_sweep():
    res = sweep_delta(small_cfg(kind="sweep-delta", modes=(), deltas=(0.2, 0.1)))
    assert [r["sup_modified_E2"] for r in res.rows] == [0.0, 0.0]
    assert all(g.passed for g in res.gates)


def test_sweep_is_order_independent():
    cfg = small_cfg(kind="sweep-delta", deltas=(0.2, 0.1), t_end=0.05, cadence=0.025, dt=0.005)
    full = sweep_delta(cfg)
    single = sweep_delta(cfg.with_(deltas=(0.1,)))
    a, b = full.rows[1], single.rows[0]
    assert a.keys() == b.keys()
    for k in a:
        same = a[k] == b[k] or (isinstance(a[k], float) and math.isnan(a[k]) and math.isnan(b[k]))
        assert same, k


def test_report_formats(tmp_path):
    t = Table("demo", ["delta", "err", "label"], [[0.2, 1.0 / 3.0, "a"], [0.1, 1e-17, "b"]],
              {"note": "x"}, plot_x="delta", plot_y=("err",), loglog=True)
    for fmt in ("csv", "json", "svg"):
        p1 = emit_report(t, fmt, tmp_path / "one")
        p2 = emit_report(t, fmt, tmp_path / "two")
        assert p1.read_bytes() == p2.read_bytes()
    header, rows = read_csv_table(tmp_path / "one" / "demo.csv")
    assert header == t.columns and rows == t.rows
    assert b"<svg" in (tmp_path / "one" / "demo.svg").read_bytes()
    with pytest.raises(ParameterError):
        emit_report(Table("empty", ["a"], []), "csv", tmp_path)
    with pytest.raises(ParameterError):
        emit_report(t, "pdf", tmp_path)


def test_unwritable_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    t = Table("demo", ["a"], [[1.0]])
    with pytest.raises(OSError):
        emit_report(t, "csv", blocker / "sub")
