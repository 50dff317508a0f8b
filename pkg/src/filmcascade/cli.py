"""Command line entry point.

Exit codes: 0 when every gate of the experiment passes, 1 on a gate failure,
2 on a runtime or configuration error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from .config import ExperimentConfig, load_config
from .errors import FilmError
from .harness import GateResult, Table, emit_report

__all__ = ["main", "build_parser"]


def _k_range(text):
    try:
        a, b, n = text.split(":")
        return float(a), float(b), int(n)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("k-range must read a:b:n") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="filmcascade", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="INI experiment file")
        p.add_argument("--out", default=None, help="output directory (overrides [output] dir)")
        p.add_argument("--seed", type=int, default=None, help="random seed (overrides [experiment] seed)")
        return p

    p = common(sub.add_parser("simulate", help="run a reduced model"))
    p.add_argument("--model", choices=["burgers", "kdvb", "kawahara", "benney"], default=None)
    p = common(sub.add_parser("simulate-ns", help="run the Navier-Stokes solver"))
    p.add_argument("--audit-energy", action="store_true")
    p.add_argument("--snapshots", type=int, default=None, help="number of TFLM snapshots (0 = every record)")
    p = common(sub.add_parser("stability", help="dispersion relations and Orr-Sommerfeld spectra"),
               config_required=False)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--weber", type=float, default=None)
    p.add_argument("--reynolds", type=float, default=None)
    p.add_argument("--k-range", type=_k_range, default=None)
    p.add_argument("--os", action="store_true")
    common(sub.add_parser("sweep-delta", help="uniformity and decay sweep over delta"))
    common(sub.add_parser("compare", help="model-vs-model or NS-vs-model comparison"))
    common(sub.add_parser("extension-audit", help="extension operator ratio audit"), config_required=False)
    common(sub.add_parser("korn-audit", help="Korn inequality audit"), config_required=False)
    common(sub.add_parser("trace-audit", help="trace inequality audit"), config_required=False)
    p = common(sub.add_parser("energy-audit", help="energy inequality audit of a snapshot directory"),
               config_required=False)
    p.add_argument("--traj", default=None, help="directory of TFLM snapshots")
    p.add_argument("--m", type=int, default=None)
    return ap


def _config(args, kind) -> ExperimentConfig:
    over = {"out_dir": args.out, "seed": args.seed}
    if args.config:
        cfg = load_config(args.config, over)
        return cfg.with_(kind=kind)
    return ExperimentConfig(kind=kind, **{k: v for k, v in over.items() if v is not None})


def _emit(cfg: ExperimentConfig, tables: List[Table]):
    for t in tables:
        for fmt in cfg.formats:
            if fmt == "svg" and (t.plot_x is None or not t.plot_y):
                continue
            emit_report(t, fmt, cfg.out_dir)


def _finish(gates: List[GateResult]) -> int:
    for g in gates:
        print(g.line())
    return 0 if all(g.passed for g in gates) else 1


# --------------------------------------------------------------------------- commands

def cmd_simulate(args) -> int:
    from .harness import initial_surface
    from .models import ModelKind, ModelSolver, ModelState
    from .spectral import surface_norm
    from .tflm import FieldSnapshot, write_tflm

    cfg = _config(args, "simulate")
    kind = ModelKind.parse(args.model or cfg.model)
    prm = cfg.params_for(cfg.deltas[0])
    T, cad = cfg.t_end * cfg.time_scale(cfg.deltas[0]), cfg.cadence * cfg.time_scale(cfg.deltas[0])
    nrec = int(round(T / cad))
    eta0 = initial_surface(cfg)
    solver = ModelSolver(kind, prm, cfg.nx)
    state = ModelState(eta0, 0.0, prm, kind)
    out = Path(cfg.out_dir)
    snapdir = out / "snapshots"
    snapdir.mkdir(parents=True, exist_ok=True)
    rows = []
    for j in range(nrec + 1):
        if j:
            state = solver.integrate(state, j * cad, tol=cfg.model_tol)
        rows.append([state.t, float(np.mean(state.eta)), surface_norm(state.eta), float(np.max(state.eta))])
        write_tflm(snapdir / f"snap_{j:05d}.tflm", FieldSnapshot(state.t, prm, state.eta))
    table = Table(f"simulate_{kind.name.lower()}", ["t", "mean", "L2", "max"], rows,
                  {"model": kind.name.lower()}, plot_x="t", plot_y=("L2", "max"), xlabel="t")
    _emit(cfg, [table])
    drift = abs(rows[-1][1] - rows[0][1])
    return _finish([GateResult("mass_drift", drift < 1e-10, drift, "< 1e-10")])


def _ns_csv_row(state, cfg, weights):
    from .diagnostics import energy_report, snapshot
    from .nssolver import divergence_residual

    r = energy_report(snapshot(state), m=cfg.m, weights=weights)
    return [state.t, r.E0, r.F0, r.Em, r.Fm, r.Nm, divergence_residual(state),
            float(np.mean(state.eta)), float(np.max(state.eta))], r


def cmd_simulate_ns(args) -> int:
    from .diagnostics import EnergyWeights, energy_audit
    from .harness import initial_surface
    from .nssolver import NSSolver, check_compatibility, compatible_initial_state, solve_state_pressure
    from .tflm import FieldSnapshot, write_tflm

    cfg = _config(args, "simulate-ns")
    delta = cfg.deltas[0]
    prm = cfg.params_for(delta)
    s = cfg.time_scale(delta)
    T, cad = cfg.t_end * s, cfg.cadence * s
    nrec = int(round(T / cad))
    per = int(round(cad / cfg.dt))
    if per < 1 or abs(per * cfg.dt - cad) > 1e-9 * cad:
        raise FilmError("cadence must be a multiple of dt")
    nsnap = cfg.snapshots if args.snapshots is None else args.snapshots
    every = 1 if nsnap <= 0 else max(1, nrec // nsnap)
    w = EnergyWeights(cfg.beta1, cfg.beta2, cfg.beta3)
    state = compatible_initial_state(initial_surface(cfg), prm, cfg.ny, method=cfg.initializer)
    comp = check_compatibility(state)
    solver = NSSolver(prm, cfg.nx, cfg.ny, cfg.dt, scheme=cfg.scheme)
    out = Path(cfg.out_dir)
    snapdir = out / "snapshots"
    snapdir.mkdir(parents=True, exist_ok=True)
    rows, reports = [], []
    gates = [GateResult("compatibility", bool(comp["passed"]),
                        max(comp["divergence"], comp["tangential"], comp["no_slip"]), "< 1e-8")]
    try:
        for j in range(nrec + 1):
            if j:
                for _ in range(per):
                    state = solver.step(state)
                state = state.copy(t=j * cad)
            row, rep = _ns_csv_row(state, cfg, w)
            rows.append(row)
            reports.append(rep)
            if j % every == 0:
                p = solve_state_pressure(state)
                write_tflm(snapdir / f"snap_{j:05d}.tflm",
                           FieldSnapshot(state.t, prm, state.eta, state.u, state.v, p))
    except FilmError as exc:
        print(f"run stopped at t={state.t:g}: {exc}")
        gates.append(GateResult("completed", False, state.t, f"reach t={T:g}"))
    cols = ["t", "E0", "F0", "E2", "F2", "N2", "div_residual", "mass", "max_eta"]
    tables = [Table("simulate_ns", cols, rows, {"delta": delta, "epsilon": prm.epsilon},
                    plot_x="t", plot_y=("E2",), xlabel="t")]
    div = max(r[6] for r in rows)
    gates.append(GateResult("divergence", div < 1e-9, div, "< 1e-9"))
    drift = abs(rows[-1][7] - rows[0][7])
    gates.append(GateResult("mass_drift", drift < 1e-10, drift, "< 1e-10"))
    if args.audit_energy and len(reports) >= 3:
        aud = energy_audit([r.t for r in reports], [r.Em for r in reports], [r.Fm for r in reports],
                           [r.Nm for r in reports])
        tables.append(Table("energy_audit", ["t", "dEdt_plus_F", "N", "implied_C"],
                            [[a, b, c, d] for a, b, c, d in zip(aud.t, aud.lhs, aud.N, aud.implied_C)],
                            {"max_C": aud.max_C, "fraction_nonpositive": aud.fraction_nonpositive,
                             "fraction_bounded": aud.fraction_bounded},
                            plot_x="t", plot_y=("dEdt_plus_F", "N"), xlabel="t"))
        gates.append(GateResult("energy_audit", aud.passed, aud.max_C, "finite implied C"))
    _emit(cfg, tables)
    return _finish(gates)


def cmd_stability(args) -> int:
    from .stability import critical_reynolds, dispersion, os_leading

    cfg = _config(args, "stability")
    alpha = cfg.alpha if args.alpha is None else args.alpha
    delta = cfg.deltas[0] if args.delta is None else args.delta
    W = cfg.weber if args.weber is None else args.weber
    R = cfg.reynolds if args.reynolds is None else args.reynolds
    kmin, kmax, kn = args.k_range or (cfg.k_min, cfg.k_max, cfg.k_count)
    prm = cfg.params_for(delta).replace(alpha=alpha, weber=W, reynolds=R, delta=delta)
    ks = np.linspace(kmin, kmax, kn)
    rows = []
    series = {}
    for kind in ("burgers", "kdvb", "kawahara", "benney"):
        lam = dispersion(kind, ks, prm)
        series[kind] = lam.real
        rows += [[k, l.real, l.imag, kind, R] for k, l in zip(ks, lam)]
    if args.os or cfg.os:
        lam = np.array([os_leading(k, prm) for k in ks])
        series["os"] = lam.real
        rows += [[k, l.real, l.imag, "os", R] for k, l in zip(ks, lam)]
    meta = {"alpha": alpha, "delta": delta, "weber": W, "reynolds": R}
    if 0 < alpha < math.pi / 2:
        meta["critical_reynolds"] = critical_reynolds(alpha)
    table = Table("stability", ["k", "re_lambda", "im_lambda", "model", "R"], rows, meta)
    wide = Table("neutral_curve", ["k"] + list(series), [[k] + [series[s][i] for s in series]
                                                          for i, k in enumerate(ks)],
                 meta, plot_x="k", plot_y=tuple(series), xlabel="k", ylabel="Re lambda")
    _emit(cfg, [table, wide])
    return _finish([])


def cmd_sweep(args) -> int:
    from .harness import sweep_delta

    cfg = _config(args, "sweep-delta")
    res = sweep_delta(cfg)
    _emit(cfg, [res.table()])
    return _finish(res.gates)


def cmd_compare(args) -> int:
    from .harness import compare_models, compare_ns_model

    cfg = _config(args, "compare")
    if cfg.model_a == "ns":
        res = compare_ns_model(cfg.with_(model=cfg.model_b))
    else:
        res = compare_models(cfg)
    _emit(cfg, [res.table()])
    return _finish(res.gates)


def cmd_extension(args) -> int:
    from .transform import extension_audit

    cfg = _config(args, "extension-audit")
    deltas = [2.0 ** -j for j in range(9)]
    rows, worst, drift = [], 0.0, 0.0
    for i in range(cfg.i_max + 1):
        for j in range(cfg.i_max + 1 - i):
            a = extension_audit(deltas, i, j, trials=min(cfg.trials, 50), nx=64, seed=cfg.seed)
            b = extension_audit(deltas, i, j, trials=min(cfg.trials, 50), nx=128, seed=cfg.seed)
            for d in deltas:
                r1, r2 = a[d]
                q1, q2 = b[d]
                rows.append([i, j, d, r1, r2])
                for x, y in ((r1, q1), (r2, q2)):
                    if np.isfinite(x):
                        worst = max(worst, x)
                        drift = max(drift, abs(x - y) / max(abs(x), 1e-300))
    table = Table("extension_audit", ["i", "j", "delta", "ratio_full", "ratio_half"], rows)
    _emit(cfg, [table])
    g = cfg.gates
    return _finish([GateResult("extension_bound", worst <= g.extension_bound, worst, f"<= {g.extension_bound:g}"),
                    GateResult("extension_nx_doubling", drift < g.extension_stability, drift,
                               f"< {g.extension_stability:g}")])


def cmd_korn(args) -> int:
    from .diagnostics import korn_audit

    cfg = _config(args, "korn-audit")
    res = korn_audit([1.0, 0.25, 1.0 / 16], trials=cfg.trials, seed=cfg.seed)
    rows = [[d, r] for d, r in sorted(res.items(), reverse=True)]
    worst = max(res.values())
    _emit(cfg, [Table("korn_audit", ["delta", "max_ratio"], rows, plot_x="delta", plot_y=("max_ratio",),
                      loglog=True)])
    return _finish([GateResult("korn_bound", worst <= cfg.gates.korn_bound, worst,
                               f"<= {cfg.gates.korn_bound:g}")])


def cmd_trace(args) -> int:
    from .diagnostics import trace_audit

    cfg = _config(args, "trace-audit")
    res = trace_audit([1.0, 0.25, 1.0 / 16], trials=cfg.trials, seed=cfg.seed)
    vals = np.array(list(res.values()))
    spread = float((vals.max() - vals.min()) / vals.min())
    rows = [[d, r] for d, r in sorted(res.items(), reverse=True)]
    _emit(cfg, [Table("trace_audit", ["delta", "max_ratio"], rows, plot_x="delta", plot_y=("max_ratio",),
                      loglog=True)])
    return _finish([GateResult("trace_spread", spread < cfg.gates.trace_spread, spread,
                               f"< {cfg.gates.trace_spread:g}")])


def cmd_energy_audit(args) -> int:
    from .diagnostics import EnergyWeights, energy_audit, energy_report, snapshot
    from .nssolver import NSState
    from .tflm import read_tflm

    cfg = _config(args, "energy-audit")
    traj = Path(args.traj or cfg.traj or Path(cfg.out_dir) / "snapshots")
    m = cfg.m if args.m is None else args.m
    files = sorted(traj.glob("*.tflm"))
    if len(files) < 3:
        raise FilmError(f"need at least three TFLM snapshots in {traj}")
    w = EnergyWeights(cfg.beta1, cfg.beta2, cfg.beta3)
    reps = []
    for f in files:
        fs = read_tflm(f)
        if fs.ny == 0:
            raise FilmError(f"{f} holds no bulk fields")
        st = NSState(fs.eta, fs.u, fs.v, fs.p, fs.t, fs.params)
        reps.append(energy_report(snapshot(st), m=m, weights=w))
    reps.sort(key=lambda r: r.t)
    aud = energy_audit([r.t for r in reps], [r.Em for r in reps], [r.Fm for r in reps], [r.Nm for r in reps])
    table = Table("energy_audit", ["t", "dEdt_plus_F", "N", "implied_C"],
                  [[a, b, c, d] for a, b, c, d in zip(aud.t, aud.lhs, aud.N, aud.implied_C)],
                  {"m": m, "max_C": aud.max_C, "fraction_nonpositive": aud.fraction_nonpositive,
                   "fraction_bounded": aud.fraction_bounded},
                  plot_x="t", plot_y=("dEdt_plus_F", "N"), xlabel="t")
    _emit(cfg, [table])
    return _finish([GateResult("energy_audit", aud.passed, aud.max_C, "finite implied C")])


COMMANDS = {
    "simulate": cmd_simulate, "simulate-ns": cmd_simulate_ns, "stability": cmd_stability,
    "sweep-delta": cmd_sweep, "compare": cmd_compare, "extension-audit": cmd_extension,
    "korn-audit": cmd_korn, "trace-audit": cmd_trace, "energy-audit": cmd_energy_audit,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (FilmError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
