"""Experiment configuration read from sectioned key-value (INI) files.

Every section and key is declared in ``SCHEMA``; anything else is rejected.
Lists are comma separated.  The initial surface is a list of
``n:amplitude[:phase]`` terms, eta0 = sum a cos(2 pi n x + phase).
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, Optional, Tuple

from .errors import ConfigError, ParameterError
from .params import PhysicalParams, ScalingParams, nondimensionalize

__all__ = ["ExperimentConfig", "Gates", "load_config", "parse_config", "EXPERIMENT_KINDS"]

EXPERIMENT_KINDS = ("simulate", "simulate-ns", "stability", "sweep-delta", "compare", "compare-ns",
                    "extension-audit", "korn-audit", "trace-audit", "energy-audit")


def _floats(text):
    return tuple(float(_angle(s)) for s in text.split(",") if s.strip())


def _angle(text):
    """Floats, with 'pi' allowed (e.g. 'pi/6')."""
    t = text.strip().replace(" ", "")
    try:
        return float(t)
    except ValueError:
        pass
    if not set(t) <= set("0123456789.e+-*/pi()"):
        raise ConfigError(f"cannot parse number {text!r}")
    try:
        return float(eval(t, {"__builtins__": {}}, {"pi": math.pi}))  # restricted character set
    except Exception as exc:
        raise ConfigError(f"cannot parse number {text!r}") from exc


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"cannot parse boolean {text!r}")


def _modes(text):
    out = []
    for term in text.split(","):
        term = term.strip()
        if not term:
            continue
        parts = term.split(":")
        if len(parts) not in (2, 3):
            raise ConfigError(f"mode {term!r} must read n:amplitude[:phase]")
        n = int(parts[0])
        if n < 1:
            raise ConfigError("mode numbers must be >= 1 (mean-zero data)")
        amp = float(parts[1])
        phase = _angle(parts[2]) if len(parts) == 3 else 0.0
        out.append((n, amp, phase))
    return tuple(out)


def _epsilon(text):
    t = text.strip().lower()
    if t == "delta":
        return "delta"
    return float(t)


def _str(text):
    return text.strip()


# section -> key -> (parser, attribute name)
SCHEMA: Dict[str, Dict[str, tuple]] = {
    "experiment": {"kind": (_str, "kind"), "name": (_str, "name"), "seed": (int, "seed"),
                   "workers": (int, "workers")},
    "params": {"delta": (_floats, "deltas"), "epsilon": (_epsilon, "epsilon"),
               "reynolds": (float, "reynolds"), "weber": (float, "weber"),
               "alpha": (_angle, "alpha")},
    "physical": {k: (_angle, "phys_" + k) for k in ("rho", "g", "alpha", "mu", "sigma", "h0", "l0", "a0")},
    "resolution": {"nx": (int, "nx"), "ny": (int, "ny"), "dt": (float, "dt"),
                   "scheme": (_str, "scheme")},
    "run": {"t_end": (float, "t_end"), "cadence": (float, "cadence"),
            "horizon": (_str, "horizon"), "transient": (float, "transient"),
            "snapshots": (int, "snapshots")},
    "initial": {"modes": (_modes, "modes"), "random_modes": (int, "random_modes"),
                "random_amplitude": (float, "random_amplitude"),
                "initializer": (_str, "initializer")},
    "models": {"model": (_str, "model"), "model_a": (_str, "model_a"), "model_b": (_str, "model_b"),
               "tol": (float, "model_tol")},
    "energy": {"m": (int, "m"), "beta1": (float, "beta1"), "beta2": (float, "beta2"),
               "beta3": (float, "beta3")},
    "stability": {"k_min": (float, "k_min"), "k_max": (float, "k_max"), "k_count": (int, "k_count"),
                  "os": (_bool, "os")},
    "audit": {"trials": (int, "trials"), "i_max": (int, "i_max"), "traj": (_str, "traj")},
    "gates": {"uniformity_factor": (float, "uniformity_factor"),
              "decay_factor": (float, "decay_factor"),
              "slope_min": (float, "slope_min"), "slope_max": (float, "slope_max"),
              "dt_tolerance": (float, "dt_tolerance"), "korn_bound": (float, "korn_bound"),
              "trace_spread": (float, "trace_spread"), "extension_bound": (float, "extension_bound"),
              "extension_stability": (float, "extension_stability")},
    "output": {"dir": (_str, "out_dir"), "formats": (lambda s: tuple(x.strip() for x in s.split(",")),
                                                      "formats")},
}


@dataclass(frozen=True)
class Gates:
    """Acceptance thresholds; none of them is prescribed by the theory."""

    uniformity_factor: float = 2.0
    decay_factor: float = 2.0
    slope_min: float = 1.5
    slope_max: float = 2.5
    dt_tolerance: float = 0.05
    korn_bound: float = 3.0 + 1e-6
    trace_spread: float = 0.2
    extension_bound: float = 10.0
    extension_stability: float = 0.01


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "sweep-delta"
    name: str = "experiment"
    seed: int = 0
    workers: int = 1
    deltas: Tuple[float, ...] = (0.2, 0.1, 0.05, 0.025)
    epsilon: object = "delta"          # 'delta' or a fixed float
    reynolds: float = 0.5
    weber: float = 0.4
    alpha: float = math.pi / 6
    physical: Optional[PhysicalParams] = None
    nx: int = 32
    ny: int = 24
    dt: float = 0.005
    scheme: str = "sbdf2"
    t_end: float = 1.0
    cadence: float = 0.05
    horizon: str = "fixed"             # 'fixed' or 'inverse_epsilon' (times divided by epsilon)
    transient: float = 0.25            # fraction of the horizon excluded from decay fits
    snapshots: int = 0
    modes: Tuple[Tuple[int, float, float], ...] = ((1, 0.1, 0.0),)
    random_modes: int = 0
    random_amplitude: float = 0.0
    initializer: str = "stokes"
    model: str = "kawahara"
    model_a: str = "kawahara"
    model_b: str = "kdvb"
    model_tol: float = 1e-11
    m: int = 2
    beta1: float = 0.1
    beta2: float = 0.1
    beta3: float = 0.1
    k_min: float = 0.1
    k_max: float = 20.0
    k_count: int = 50
    os: bool = False
    trials: int = 100
    i_max: int = 4
    traj: str = ""
    gates: Gates = field(default_factory=Gates)
    out_dir: str = "out"
    formats: Tuple[str, ...] = ("csv", "json", "svg")

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if not self.deltas:
            raise ConfigError("the delta list is empty")
        if any(b >= a for a, b in zip(self.deltas, self.deltas[1:])):
            raise ConfigError("the delta list must be strictly decreasing")
        if self.horizon not in ("fixed", "inverse_epsilon"):
            raise ConfigError(f"horizon must be 'fixed' or 'inverse_epsilon', got {self.horizon!r}")
        if self.scheme not in ("sbdf2", "cnab2", "euler"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.initializer not in ("stokes", "quadratic"):
            raise ConfigError(f"unknown initializer {self.initializer!r}")
        if self.nx < 8 or self.ny < 8 or self.dt <= 0 or self.t_end < 0 or self.cadence <= 0:
            raise ConfigError("resolution, dt, t_end and cadence must be positive")
        if not (0.0 <= self.transient < 1.0):
            raise ConfigError("transient must lie in [0, 1)")
        bad = set(self.formats) - {"csv", "json", "svg"}
        if bad:
            raise ConfigError(f"unknown output formats {sorted(bad)}")

    # ------------------------------------------------------------------ derived
    def epsilon_for(self, delta: float) -> float:
        return float(delta) if self.epsilon == "delta" else float(self.epsilon)

    def params_for(self, delta: float) -> ScalingParams:
        if self.physical is not None:
            base = nondimensionalize(self.physical)
            return base.replace(delta=float(delta), epsilon=self.epsilon_for(delta))
        try:
            return ScalingParams(float(delta), self.epsilon_for(delta), self.reynolds, self.weber, self.alpha)
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    def time_scale(self, delta: float) -> float:
        """Factor applied to t_end and cadence at this delta."""
        if self.horizon == "inverse_epsilon":
            eps = self.epsilon_for(delta)
            if eps <= 0:
                raise ConfigError("horizon = inverse_epsilon needs epsilon > 0")
            return 1.0 / eps
        return 1.0

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)


def parse_config(text: str, overrides: Optional[dict] = None) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc
    values = {}
    gate_values = {}
    phys = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            parser, attr = SCHEMA[section][key]
            try:
                val = parser(raw)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from exc
            if section == "gates":
                gate_values[attr] = val
            elif section == "physical":
                phys[attr[len("phys_"):]] = val
            else:
                values[attr] = val
    if phys:
        if "params" in cp.sections() and any(k != "delta" and k != "epsilon" for k in cp["params"]):
            raise ConfigError("give either [params] or [physical], not both")
        missing = {f.name for f in fields(PhysicalParams)} - set(phys)
        if missing:
            raise ConfigError(f"[physical] is missing {sorted(missing)}")
        try:
            pp = PhysicalParams(**phys)
            base = nondimensionalize(pp)
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc
        values["physical"] = pp
        values.setdefault("deltas", (base.delta,))
        values.setdefault("epsilon", base.epsilon)
        values["reynolds"], values["weber"], values["alpha"] = base.reynolds, base.weber, base.alpha
    if gate_values:
        values["gates"] = Gates(**gate_values)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, overrides: Optional[dict] = None) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    return parse_config(text, overrides)
