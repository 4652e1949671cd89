# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Activation-level attacks: input modification, comparison flips and output offsets."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Dict, FrozenSet, Optional

import numpy as np

from tools.exceptions import DirectiveError

RELU = "relu"
DRELU = "drelu"
SIGMOID_PIECEWISE = "sigmoid_piecewise"
SIGMOID_DIRECT = "sigmoid_direct"
SOFTMAX_DIRECT = "softmax_direct"

_DIRECT_FIELDS = frozenset(("input_shift", "output_offset", "exp_z_flip", "exp_step13_epsilon"))

ALLOWED_FIELDS: Dict[str, FrozenSet[str]] = {
    RELU: frozenset(("input_shift", "flip_b1")),
    DRELU: frozenset(("input_shift", "flip_b1")),
    SIGMOID_PIECEWISE: frozenset(("input_shift", "flip_b1", "flip_b2")),
    SIGMOID_DIRECT: _DIRECT_FIELDS,
    SOFTMAX_DIRECT: _DIRECT_FIELDS,
}

_BOOLEAN_FIELDS = ("flip_b1", "flip_b2", "exp_z_flip")


def _as_array(value, dtype) -> Optional[np.ndarray]:
    if value is None:
        return None
    array = np.array(value, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class ActivationAttack:
    """Public per-coordinate attack values for one activation call.

    Every field broadcasts against the activation input. A field left as None does nothing.
    input_shift is the additive error the adversary places on the multiplication feeding the
    activation. flip_b1 flips the first comparison (the only one for ReLU), flip_b2 the second
    comparison of the piecewise sigmoid. output_offset lands on the final multiplication of a
    direct sigmoid or softmax. exp_z_flip and exp_step13_epsilon attack the bit-decomposition
    exponentiation.
    """
    input_shift: Optional[np.ndarray] = None
    flip_b1: Optional[np.ndarray] = None
    flip_b2: Optional[np.ndarray] = None
    output_offset: Optional[np.ndarray] = None
    exp_z_flip: Optional[np.ndarray] = None
    exp_step13_epsilon: Optional[np.ndarray] = None

    def __post_init__(self):
        for field in fields(self):
            value = getattr(self, field.name)
            dtype = bool if field.name in _BOOLEAN_FIELDS else np.float64
            value = _as_array(value, dtype)
            if value is not None and dtype is np.float64 and not np.all(np.isfinite(value)):
                raise DirectiveError(f"Activation attack field {field.name} must be finite")
            object.__setattr__(self, field.name, value)

    def used_fields(self) -> FrozenSet[str]:
        return frozenset(
            field.name for field in fields(self)
            if getattr(self, field.name) is not None and np.any(getattr(self, field.name)))

    def is_empty(self) -> bool:
        return not self.used_fields()

    def validate_for(self, operation: str) -> ActivationAttack:
        """Rejects fields that have no meaning for the given activation protocol."""
        unsupported = self.used_fields() - ALLOWED_FIELDS[operation]
        if unsupported:
            raise DirectiveError(f"{operation} cannot be attacked with {', '.join(sorted(unsupported))}")
        return self

    def without_input_shift(self) -> ActivationAttack:
        return replace(self, input_shift=None)

    def merge(self, other: Optional[ActivationAttack]) -> ActivationAttack:
        """Adds the real-valued fields and ORs the flips."""
        if other is None:
            return self
        merged = {}
        for field in fields(self):
            mine = getattr(self, field.name)
            theirs = getattr(other, field.name)
            if mine is None or theirs is None:
                merged[field.name] = theirs if mine is None else mine
            elif field.name in _BOOLEAN_FIELDS:
                merged[field.name] = np.logical_or(mine, theirs)
            else:
                merged[field.name] = mine + theirs
        return ActivationAttack(**merged)

    def describe(self) -> str:
        parts = []
        for name in sorted(self.used_fields()):
            value = getattr(self, name)
            parts.append(f"{name}[{int(np.count_nonzero(value))} of {value.size}]")
        return ", ".join(parts) if parts else "none"


def resolve(attack: Optional[ActivationAttack], operation: str) -> ActivationAttack:
    """Returns a validated attack, the empty attack standing in for None."""
    if attack is None:
        return ActivationAttack()
    return attack.validate_for(operation)
