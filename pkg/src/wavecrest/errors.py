"""Typed failures raised by the solvers and operators.

Every error that can terminate a run maps to a CLI exit code through
``EXIT_CODES``.
"""


class WavecrestError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(WavecrestError):
    exit_code = 1


class InvalidField(WavecrestError, ValueError):
    """A grid function contains NaN/Inf or has the wrong shape."""

    exit_code = 2


class MeanNotZero(WavecrestError, ValueError):
    exit_code = 2


class NumericalBlowup(WavecrestError):
    exit_code = 2


class SurfaceContactError(WavecrestError):
    """Chord-arc constant fell below the floor: the interface is about to touch itself."""

    exit_code = 3


class SolverConvergenceError(WavecrestError):
    exit_code = 4


class TaylorDegeneracyError(WavecrestError):
    exit_code = 5


class NotHolomorphic(WavecrestError, ValueError):
    exit_code = 1


class DegenerateMap(WavecrestError, ValueError):
    exit_code = 1


class MonotonicityError(WavecrestError):
    exit_code = 2


class InterpolationError(WavecrestError):
    exit_code = 2
