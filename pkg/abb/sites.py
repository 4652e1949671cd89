# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Addressing of attack sites and the directives that land on them."""

import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Tuple

ANY_STEP = -1

INPUT_PROVENANCE = "input"
PUBLIC_PROVENANCE = "public"
LINEAR_PROVENANCE = "linear"
FUNCTIONAL_PROVENANCE = "functional"


class SiteKind(str, Enum):
    MULTIPLICATION = "multiplication"
    COMPARISON = "comparison"


@dataclass(frozen=True, order=True)
class SiteId:
    """One scalar output of one attackable operation in one training step."""
    step: int
    label: str
    coord: int

    def __str__(self) -> str:
        return f"step={self.step} site={self.label}[{self.coord}]"


@dataclass(frozen=True)
class ErrorDirective:
    """Additive error epsilon for one multiplication output."""
    site: SiteId
    epsilon: float

    def __post_init__(self):
        if not math.isfinite(self.epsilon):
            raise ValueError(f"Additive error for {self.site} must be finite, got {self.epsilon}")


@dataclass(frozen=True)
class FlipDirective:
    """Flip of one comparison output bit."""
    site: SiteId
    flip: bool = True


@dataclass
class DirectiveAudit:
    """Bookkeeping of the sites a black box has executed and the directives it consumed."""
    sites: Dict[str, Tuple[SiteKind, Tuple[int, ...]]] = field(default_factory=dict)
    consumed_errors: Dict[str, int] = field(default_factory=lambda: defaultdict(int))
    consumed_flips: Dict[str, int] = field(default_factory=lambda: defaultdict(int))

    def register(self, label: str, kind: SiteKind, shape: Tuple[int, ...]) -> None:
        self.sites[label] = (kind, tuple(shape))

    def kind_of(self, label: str):
        entry = self.sites.get(label)
        return None if entry is None else entry[0]

    @property
    def error_count(self) -> int:
        return sum(self.consumed_errors.values())

    @property
    def flip_count(self) -> int:
        return sum(self.consumed_flips.values())

    @property
    def total(self) -> int:
        return self.error_count + self.flip_count
