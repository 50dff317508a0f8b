"""Experiment orchestration: delta sweeps, model comparisons and report files.

Every experiment is a pure function of its configuration (and seed).  Per-delta
runs share no state and may be distributed over worker processes; reports are
written serially and byte-for-byte deterministically.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .config import ExperimentConfig, Gates
from .diagnostics import EnergyWeights, energy_report, snapshot
from .errors import FilmError, ParameterError
from .models import ModelKind, ModelSolver, ModelState
from .nssolver import NSSolver, NSState, compatible_initial_state

__all__ = [
    "Table", "GateResult", "SlopeFit", "ComparisonResult", "SweepResult",
    "initial_surface", "fit_slope", "sweep_delta", "compare_models", "compare_ns_model",
    "model_trajectory", "ns_trajectory", "emit_report", "read_csv_table",
]


# --------------------------------------------------------------------------- tables and gates

@dataclass
class Table:
    """A named numeric table with optional plot instructions."""

    name: str
    columns: List[str]
    rows: List[list]
    meta: Dict[str, object] = field(default_factory=dict)
    plot_x: Optional[str] = None
    plot_y: Tuple[str, ...] = ()
    loglog: bool = False
    xlabel: str = ""
    ylabel: str = ""

    def column(self, name):
        j = self.columns.index(name)
        return [r[j] for r in self.rows]


@dataclass
class GateResult:
    name: str
    passed: bool
    value: float
    threshold: str
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.value:.6g} ({self.threshold}){' ' + self.detail if self.detail else ''}"


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    ci_low: float
    ci_high: float
    deltas: Tuple[float, ...]
    dropped: Tuple[float, ...] = ()


def fit_slope(deltas: Sequence[float], errors: Sequence[float], level: float = 0.95,
              outlier_sigma: float = 3.0) -> SlopeFit:
    """Least-squares slope of log(error) against log(delta).

    The largest delta is dropped when its deviation from the fit through the
    remaining points exceeds ``outlier_sigma`` standard deviations of that
    fit, provided four points remain.
    """
    d = np.asarray(deltas, dtype=float)
    e = np.asarray(errors, dtype=float)
    if d.size < 2 or np.any(d <= 0) or np.any(~np.isfinite(e)) or np.any(e <= 0):
        raise ParameterError("slope fits need at least two positive finite points")
    dropped = ()

    def fit(x, y):
        A = np.vstack([x, np.ones_like(x)]).T
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        res = y - A @ coef
        return coef, res

    x, y = np.log(d), np.log(e)
    coef, res = fit(x, y)
    if d.size >= 5:
        # externally studentised: judge the coarsest point against a fit of the others
        i = int(np.argmax(d))
        keep = np.arange(d.size) != i
        c_rest, r_rest = fit(x[keep], y[keep])
        sigma = math.sqrt(np.sum(r_rest ** 2) / (keep.sum() - 2))
        pred = y[i] - (c_rest[0] * x[i] + c_rest[1])
        if abs(pred) > outlier_sigma * max(sigma, 1e-300):
            dropped = (float(d[i]),)
            d, x, y = d[keep], x[keep], y[keep]
            coef, res = c_rest, r_rest
    n = d.size
    if n > 2:
        s2 = np.sum(res ** 2) / (n - 2)
        se = math.sqrt(s2 / np.sum((x - x.mean()) ** 2))
        half = stats.t.ppf(0.5 + level / 2, n - 2) * se
    else:
        half = float("nan")
    return SlopeFit(float(coef[0]), float(coef[1]), float(coef[0] - half), float(coef[0] + half),
                    tuple(float(v) for v in d), dropped)


# --------------------------------------------------------------------------- initial data

def initial_surface(cfg: ExperimentConfig, nx: Optional[int] = None) -> np.ndarray:
    """eta0 from the configured mode list plus optional seeded random modes.

    The amplitudes are the same at every delta (the surface is given in the
    variables of the models).
    """
    nx = cfg.nx if nx is None else nx
    x = np.arange(nx) / nx
    eta = np.zeros(nx)
    for n, a, ph in cfg.modes:
        if n >= nx // 2:
            raise ParameterError(f"mode {n} is not resolved with nx = {nx}")
        eta += a * np.cos(2.0 * np.pi * n * x + ph)
    if cfg.random_modes > 0:
        rng = np.random.default_rng(cfg.seed)
        for n in range(1, cfg.random_modes + 1):
            a, b = rng.standard_normal(2) * cfg.random_amplitude / n ** 2
            eta += a * np.cos(2.0 * np.pi * n * x) + b * np.sin(2.0 * np.pi * n * x)
    return eta


def _times(cfg: ExperimentConfig, delta: float):
    s = cfg.time_scale(delta)
    T = cfg.t_end * s
    cad = cfg.cadence * s
    nrec = int(round(T / cad))
    if abs(nrec * cad - T) > 1e-9 * max(1.0, T):
        raise ParameterError("t_end must be a multiple of the cadence")
    return T, cad, nrec


def _steps_per_record(cad: float, dt: float) -> int:
    k = int(round(cad / dt))
    if k < 1 or abs(k * dt - cad) > 1e-9 * cad:
        raise ParameterError(f"cadence {cad:g} is not a multiple of dt {dt:g}")
    return k


# --------------------------------------------------------------------------- trajectories

def model_trajectory(kind, params, eta0, cadence: float, nrec: int, tol: float = 1e-11) -> np.ndarray:
    """Surface of a reduced model at t = j * cadence, j = 0..nrec (rows)."""
    kind = ModelKind.parse(kind)
    solver = ModelSolver(kind, params, len(eta0))
    state = ModelState(np.asarray(eta0, dtype=float), 0.0, params, kind)
    out = [state.eta.copy()]
    for j in range(1, nrec + 1):
        state = solver.integrate(state, j * cadence, tol=tol)
        out.append(state.eta.copy())
    return np.array(out)


def ns_trajectory(params, eta0, ny: int, dt: float, cadence: float, nrec: int,
                  scheme: str = "sbdf2", initializer: str = "stokes",
                  on_record: Optional[Callable[[NSState], None]] = None) -> np.ndarray:
    """Navier-Stokes surface at t = j * cadence from the compatible initial state."""
    state = compatible_initial_state(eta0, params, ny, method=initializer)
    solver = NSSolver(params, len(eta0), ny, dt, scheme=scheme)
    k = _steps_per_record(cadence, dt)
    out = [state.eta.copy()]
    if on_record is not None:
        on_record(state)
    for j in range(1, nrec + 1):
        for _ in range(k):
            state = solver.step(state)
        state = state.copy(t=j * cadence)
        out.append(state.eta.copy())
        if on_record is not None:
            on_record(state)
    return np.array(out)


# --------------------------------------------------------------------------- delta sweep

@dataclass
class SweepResult:
    rows: List[dict]
    gates: List[GateResult]
    series: Dict[float, dict] = field(default_factory=dict)

    def table(self, name="sweep_delta") -> Table:
        cols = ["delta", "epsilon", "sup_modified_E2", "E2_initial", "E2_final", "decay_slope",
                "decay_rate_over_delta", "nonincreasing", "flagged"]
        rows = [[r[c] for c in cols] for r in self.rows]
        meta = {g.name: {"passed": g.passed, "value": g.value, "threshold": g.threshold}
                for g in self.gates}
        return Table(name, cols, rows, meta, plot_x="delta", plot_y=("sup_modified_E2",),
                     loglog=True, xlabel="delta", ylabel="sup_t modified E2")


def _weights(cfg):
    return EnergyWeights(cfg.beta1, cfg.beta2, cfg.beta3)


def _sweep_one(cfg: ExperimentConfig, delta: float) -> Tuple[dict, dict]:
    prm = cfg.params_for(delta)
    T, cad, nrec = _times(cfg, delta)
    eta0 = initial_surface(cfg)
    w = _weights(cfg)
    ts, E, Et = [], [], []

    def rec(state):
        if not np.any(state.eta) and not np.any(state.u):
            ts.append(state.t)
            E.append(0.0)
            Et.append(0.0)
            return
        r = energy_report(snapshot(state), m=cfg.m, weights=w)
        ts.append(state.t)
        E.append(r.Em)
        Et.append(r.Et)

    row = {"delta": float(delta), "epsilon": prm.epsilon, "flagged": ""}
    try:
        ns_trajectory(prm, eta0, cfg.ny, cfg.dt, cad, nrec, cfg.scheme, cfg.initializer, on_record=rec)
    except FilmError as exc:
        row["flagged"] = f"{type(exc).__name__}: {exc}"
    ts_a, E_a = np.array(ts), np.array(E)
    row["sup_modified_E2"] = float(max(Et)) if Et else float("nan")
    row["E2_initial"] = float(E_a[0]) if E_a.size else float("nan")
    row["E2_final"] = float(E_a[-1]) if E_a.size else float("nan")
    slope, nonincr = float("nan"), False
    sel = ts_a >= cfg.transient * T - 1e-12
    if not row["flagged"] and np.sum(sel) >= 3 and np.all(E_a[sel] > 0):
        slope = float(np.polyfit(ts_a[sel], np.log(E_a[sel]), 1)[0])
        nonincr = bool(np.all(np.diff(E_a[sel]) <= 1e-12 * E_a[sel][:-1]))
    row["decay_slope"] = slope
    row["decay_rate_over_delta"] = -slope / delta if np.isfinite(slope) else float("nan")
    row["nonincreasing"] = nonincr
    return row, {"t": ts, "E2": E, "modified_E2": Et}


def _map(cfg: ExperimentConfig, fn, items):
    if cfg.workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            return list(ex.map(fn, [cfg] * len(items), items))
    return [fn(cfg, it) for it in items]


def sweep_delta(cfg: ExperimentConfig) -> SweepResult:
    """Navier-Stokes runs over the delta list from the same surface data.

    Records sup_t of the modified energy (uniformity) and, when epsilon <= delta,
    the exponential decay rate of E2 fitted after the transient.
    """
    results = _map(cfg, _sweep_one, list(cfg.deltas))
    rows = [r for r, _ in results]
    series = {r["delta"]: s for r, s in results}
    gates = []
    sup = np.array([r["sup_modified_E2"] for r in rows])
    flagged = [r["delta"] for r in rows if r["flagged"]]
    if np.all(sup == 0):
        ratio = 1.0
    else:
        ratio = float(np.max(sup) / np.min(sup)) if np.all(sup > 0) else float("inf")
    gates.append(GateResult("uniformity", ratio < cfg.gates.uniformity_factor and not flagged, ratio,
                            f"max/min sup modified E2 < {cfg.gates.uniformity_factor:g}",
                            f"flagged: {flagged}" if flagged else ""))
    decay_rows = [r for r in rows if r["epsilon"] <= r["delta"] * (1 + 1e-12)]
    if decay_rows and not np.all(sup == 0):
        rates = np.array([r["decay_rate_over_delta"] for r in decay_rows])
        ok = bool(np.all(np.isfinite(rates)) and np.all(rates > 0))
        dratio = float(np.max(rates) / np.min(rates)) if ok else float("inf")
        mono = all(r["nonincreasing"] for r in decay_rows)
        gates.append(GateResult("decay_rate_scaling", ok and dratio < cfg.gates.decay_factor, dratio,
                                f"max/min of -slope/delta < {cfg.gates.decay_factor:g}"))
        gates.append(GateResult("decay_nonincreasing", mono, float(mono),
                                "E2 non-increasing after the transient"))
    return SweepResult(rows, gates, series)


# --------------------------------------------------------------------------- comparisons

@dataclass
class ComparisonResult:
    label: str
    deltas: List[float]
    err_l2: List[float]
    err_inf: List[float]
    flags: List[str]
    fit: Optional[SlopeFit]
    gates: List[GateResult] = field(default_factory=list)
    extra: Dict[str, object] = field(default_factory=dict)

    def table(self, name=None) -> Table:
        cols = ["delta", "sup_err_l2", "sup_err_inf", "flagged"]
        rows = [[d, a, b, f] for d, a, b, f in zip(self.deltas, self.err_l2, self.err_inf, self.flags)]
        meta = {"label": self.label}
        if self.fit is not None:
            meta["fit"] = asdict(self.fit)
        meta.update({g.name: {"passed": g.passed, "value": g.value, "threshold": g.threshold}
                     for g in self.gates})
        meta.update(self.extra)
        return Table(name or self.label.replace(" ", "_"), cols, rows, meta, plot_x="delta",
                     plot_y=("sup_err_l2", "sup_err_inf"), loglog=True, xlabel="delta",
                     ylabel="sup_t error")


def _trajectory(kind: str, cfg: ExperimentConfig, delta: float, dt: Optional[float] = None):
    prm = cfg.params_for(delta)
    T, cad, nrec = _times(cfg, delta)
    eta0 = initial_surface(cfg)
    if kind == "ns":
        return ns_trajectory(prm, eta0, cfg.ny, cfg.dt if dt is None else dt, cad, nrec,
                             cfg.scheme, cfg.initializer)
    return model_trajectory(kind, prm, eta0, cad, nrec, tol=cfg.model_tol)


def _compare_one(cfg: ExperimentConfig, delta: float, dt: Optional[float] = None):
    try:
        a = _trajectory(cfg.model_a, cfg, delta, dt)
        b = a if cfg.model_b == cfg.model_a and dt is None else _trajectory(cfg.model_b, cfg, delta, dt)
    except FilmError as exc:
        return float("nan"), float("nan"), f"{type(exc).__name__}: {exc}"
    diff = a - b
    l2 = float(np.max(np.sqrt(np.mean(diff ** 2, axis=1))))
    linf = float(np.max(np.abs(diff)))
    return l2, linf, ""


def _compare_all(cfg, dt=None):
    if dt is None:
        return _map(cfg, _compare_one, list(cfg.deltas))
    return [_compare_one(cfg, d, dt) for d in cfg.deltas]


def _comparison(cfg: ExperimentConfig, label: str, dt=None) -> ComparisonResult:
    res = _compare_all(cfg, dt)
    l2 = [r[0] for r in res]
    linf = [r[1] for r in res]
    flags = [r[2] for r in res]
    fit = None
    good = [(d, e) for d, e, f in zip(cfg.deltas, l2, flags) if not f and e > 0]
    if len(good) >= 2:
        fit = fit_slope([g[0] for g in good], [g[1] for g in good])
    return ComparisonResult(label, [float(d) for d in cfg.deltas], l2, linf, flags, fit)


def compare_models(cfg: ExperimentConfig, slope_min: Optional[float] = None,
                   slope_max: Optional[float] = None) -> ComparisonResult:
    """sup over the record times of |eta_A - eta_B| per delta and the fitted slope.

    The slope gate is [slope_min, slope_max] (defaults from the config gates;
    pass ``slope_max=inf`` for a one-sided gate).
    """
    out = _comparison(cfg, f"{cfg.model_a} vs {cfg.model_b}")
    lo = cfg.gates.slope_min if slope_min is None else slope_min
    hi = cfg.gates.slope_max if slope_max is None else slope_max
    if all(e == 0 for e in out.err_l2):
        out.gates.append(GateResult("slope", True, 0.0, "identical trajectories"))
        return out
    if out.fit is None or len(out.fit.deltas) < 4:
        out.gates.append(GateResult("slope", False, float("nan"), "needs >= 4 delta points"))
        return out
    s = out.fit.slope
    out.gates.append(GateResult("slope", lo <= s <= hi, s, f"in [{lo:g}, {hi:g}]",
                                f"95% CI [{out.fit.ci_low:.3f}, {out.fit.ci_high:.3f}]"))
    return out


def compare_ns_model(cfg: ExperimentConfig, refine: bool = True) -> ComparisonResult:
    """Navier-Stokes against a reduced model (``cfg.model``) from the same surface.

    Gates: error monotone decreasing as delta decreases, and (with ``refine``)
    a rerun with dt/2 changing every error by less than the dt tolerance.
    """
    ncfg = cfg.with_(model_a="ns", model_b=cfg.model)
    out = _comparison(ncfg, f"ns vs {cfg.model}")
    errs = np.array(out.err_l2)
    if np.all(errs == 0):
        out.gates.append(GateResult("monotone_in_delta", True, 0.0, "zero error"))
        return out
    mono = bool(np.all(np.isfinite(errs)) and np.all(np.diff(errs) < 0))
    out.gates.append(GateResult("monotone_in_delta", mono, float(np.sum(np.diff(errs) < 0)),
                                f"{len(errs) - 1} decreasing steps required"))
    if refine:
        half = _comparison(ncfg, "ns vs model (dt/2)", dt=cfg.dt / 2)
        rel = np.abs(np.array(half.err_l2) - errs) / np.abs(np.array(half.err_l2))
        change = float(np.max(rel)) if np.all(np.isfinite(rel)) else float("inf")
        out.extra["err_l2_half_dt"] = list(half.err_l2)
        out.gates.append(GateResult("dt_refinement", change < cfg.gates.dt_tolerance, change,
                                    f"relative change < {cfg.gates.dt_tolerance:g}"))
    return out


# --------------------------------------------------------------------------- report emission

def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else repr(f)
    return v


def read_csv_table(path) -> Tuple[List[str], List[list]]:
    """Parse a CSV written by :func:`emit_report` (numbers back to float)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    out = []
    for r in body:
        conv = []
        for x in r:
            try:
                conv.append(float(x))
            except ValueError:
                conv.append(x)
        out.append(conv)
    return header, out


def _svg(table: Table) -> bytes:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "filmcascade", "svg.fonttype": "none",
                                "path.simplify": False}):
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        x = np.asarray(table.column(table.plot_x), dtype=float)
        for name in table.plot_y:
            y = np.asarray(table.column(name), dtype=float)
            if table.loglog:
                ok = (x > 0) & (y > 0) & np.isfinite(y)
                ax.loglog(x[ok], y[ok], "o-", label=name)
            else:
                ax.plot(x, y, "o-", label=name)
        ax.set_xlabel(table.xlabel or table.plot_x)
        ax.set_ylabel(table.ylabel)
        ax.set_title(table.name)
        ax.legend()
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        buf = io.BytesIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def emit_report(table: Table, fmt: str, out_dir) -> Path:
    """Write ``table`` as csv, json or svg into ``out_dir``; returns the path."""
    if not table.rows:
        raise ParameterError("cannot emit an empty table")
    if fmt not in ("csv", "json", "svg"):
        raise ParameterError(f"unknown report format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{table.name}.{fmt}"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(table.columns)
        for r in table.rows:
            w.writerow([_fmt(v) for v in r])
        path.write_text(buf.getvalue(), encoding="utf-8")
    elif fmt == "json":
        payload = {"name": table.name, "columns": table.columns,
                   "rows": _jsonable(table.rows), "meta": _jsonable(table.meta)}
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    else:
        if table.plot_x is None or not table.plot_y:
            raise ParameterError(f"table {table.name!r} has no plot specification")
        path.write_bytes(_svg(table))
    return path
