# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Chance that random multiplication checking misses every injected error."""

import math
from dataclasses import dataclass

from tools.exceptions import PreconditionError


@dataclass(frozen=True)
class MitigationParams:
    """check_fraction is the fraction alpha of multiplications checked, error_count the p errors placed."""
    check_fraction: float
    error_count: int

    def __post_init__(self):
        if not 0.0 < self.check_fraction < 1.0:
            raise PreconditionError(f"Check fraction must lie in (0, 1), got {self.check_fraction}")
        if self.error_count < 0:
            raise PreconditionError(f"Error count must be non-negative, got {self.error_count}")


def undetected_probability(params: MitigationParams) -> float:
    """(1 - alpha)^p, computed in log space."""
    return math.exp(params.error_count * math.log1p(-params.check_fraction))


def detection_probability(params: MitigationParams) -> float:
    return -math.expm1(params.error_count * math.log1p(-params.check_fraction))
