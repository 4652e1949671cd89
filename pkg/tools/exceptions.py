# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Project-local exception hierarchy shared by all packages.

None of these classes come from the external simulation-tools submodule.
"""

from typing import Optional


class SimulatorError(Exception):
    """Base class for all errors raised by the simulator."""


class FixedPointOverflowError(SimulatorError, ValueError):
    """A value does not fit the fixed-point representation or a product wrapped around the ring."""


class ShapeMismatchError(SimulatorError, ValueError):
    """Operand shapes are not compatible for the requested operation."""


class DirectiveError(SimulatorError, ValueError):
    """An attack directive addresses a site that does not exist or cannot be attacked."""


class ProvenanceError(SimulatorError, ValueError):
    """Input modification was requested for a value that was not produced by a multiplication."""


class NonFiniteValueError(SimulatorError, ArithmeticError):
    """A computation produced an infinite or NaN value."""


class UnsupportedIntentError(SimulatorError):
    """The requested attack intent cannot be realized for the given model or activation."""


class DatasetError(SimulatorError, ValueError):
    """A dataset file or split request is malformed."""


class PreconditionError(SimulatorError, ValueError):
    """An operation was called with inputs violating its preconditions."""


class ConfigError(SimulatorError):
    """Base class for configuration errors."""


class ConfigValueError(ConfigError, ValueError):
    """A configuration key is unknown or has an invalid value."""


class TrialError(SimulatorError):
    """Wraps an error raised while running one trial of an experiment."""
    def __init__(self, trial: int, phase: str, cause: Optional[BaseException] = None):
        self.trial = trial
        self.phase = phase
        self.cause = cause
        super().__init__(f"trial {trial} failed during {phase}: {type(cause).__name__}: {cause}")

    def __reduce__(self):
        return (TrialError, (self.trial, self.phase, self.cause))
