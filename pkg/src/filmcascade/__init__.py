"""Thin-film flow down an incline: the long-wave model hierarchy, a flattened
free-surface Navier-Stokes solver, energy diagnostics and experiment harness."""

from .params import PhysicalParams, ScalingParams, nondimensionalize, nusselt
from .models import ModelKind, ModelState, ModelSolver, benney_coefficients, model_rhs, step_model
from .stability import critical_reynolds, dispersion, os_spectrum, OSProblem
from .nssolver import (NSState, NSSolver, check_compatibility, compatible_initial_state, run_ns,
                       step_ns)
from .diagnostics import EnergyWeights, energy_report, snapshot
from .config import ExperimentConfig, load_config

__version__ = "0.1.0"
