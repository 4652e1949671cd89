# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Choice of activation protocols and their iteration counts."""

import math
from dataclasses import dataclass

from abb.backends import Backend, FixedPointBackend
from abb.fixed_point import FixedPointParams
from tools.exceptions import ConfigValueError

PIECEWISE = "piecewise"
DIRECT_LIMIT = "direct-limit"
DIRECT_BITDECOMP = "direct-bitdecomp"
ACTIVATION_VARIANTS = (PIECEWISE, DIRECT_LIMIT, DIRECT_BITDECOMP)

NEWTON = "newton"
GOLDSCHMIDT = "goldschmidt"
RECIPROCAL_METHODS = (NEWTON, GOLDSCHMIDT)

DEFAULT_EXP_SQUARINGS = 8
DEFAULT_RECIPROCAL_ITERATIONS = 10

# largest exponent argument evaluated on the real backend
REAL_EXP_CAP = 700.0


@dataclass(frozen=True)
class ActivationSettings:
    variant: str = PIECEWISE
    reciprocal: str = NEWTON
    reciprocal_iterations: int = DEFAULT_RECIPROCAL_ITERATIONS
    exp_squarings: int = DEFAULT_EXP_SQUARINGS

    def __post_init__(self):
        if self.variant not in ACTIVATION_VARIANTS:
            raise ConfigValueError(f"Unknown activation variant '{self.variant}', expected one of {ACTIVATION_VARIANTS}")
        if self.reciprocal not in RECIPROCAL_METHODS:
            raise ConfigValueError(f"Unknown reciprocal method '{self.reciprocal}', expected one of {RECIPROCAL_METHODS}")
        if self.reciprocal_iterations < 1:
            raise ConfigValueError(f"Reciprocal iterations must be positive, got {self.reciprocal_iterations}")
        if self.exp_squarings < 1:
            raise ConfigValueError(f"Exponentiation squarings must be positive, got {self.exp_squarings}")

    @property
    def is_direct(self) -> bool:
        return self.variant != PIECEWISE


def _fixed_params(backend: Backend) -> FixedPointParams:
    if isinstance(backend, FixedPointBackend):
        return backend.params
    return FixedPointParams()


def bitdecomp_threshold(backend: Backend) -> float:
    """Inputs below -(k - f - 1) make the bit-decomposition exponentiation output zero."""
    params = _fixed_params(backend)
    return -float(params.total_value_bits - params.frac_bits - 1)


def bitdecomp_cap(backend: Backend) -> float:
    """Largest input whose exponential is still representable by the backend."""
    if isinstance(backend, FixedPointBackend):
        params = backend.params
        return (params.total_value_bits - params.frac_bits - 2) * math.log(2.0)
    return REAL_EXP_CAP
