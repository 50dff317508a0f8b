"""Exception hierarchy shared by the solvers and the CLI."""


class FilmError(Exception):
    """Base class for every error raised by filmcascade."""


class ParameterError(FilmError, ValueError):
    """A physical or nondimensional parameter is outside its admissible range."""


class DomainError(FilmError, ValueError):
    """An argument lies outside the domain of a function (e.g. y outside [0, 1])."""


class UnsupportedError(FilmError, ValueError):
    """Requested operation order or mode is not supported."""


class FilmRuptureError(FilmError):
    """The film thickness 1 + eta reached zero in a Benney run."""


class BlowUpError(FilmError):
    """Non-finite values appeared during time integration."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class GeometryError(FilmError):
    """The flattening map degenerated (Jacobian J <= 0 or a guarded denominator vanished)."""


class PressureSolverError(FilmError):
    """The pressure fixed-point iteration failed to contract."""


class ResolutionError(FilmError):
    """Eigenvalues did not converge under vertical refinement."""


class ContractError(FilmError, ValueError):
    """A required input (e.g. a cached time derivative) was not supplied."""


class ConfigError(FilmError, ValueError):
    """Malformed configuration file."""
