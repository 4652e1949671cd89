# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Helpers shared by the attack script builders."""

import functools
import itertools
from collections import defaultdict
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from abb.secret_tensor import SecretTensor
from abb.sites import ANY_STEP
from models.script_context import ScriptContext
from tools.exceptions import PreconditionError

Position = Tuple[int, int]
Builder = TypeVar("Builder", bound=Callable)

# large enough to push any in-range value across a comparison threshold
ZEROING_MAGNITUDE = 1.0e4


def public_only(builder: Builder) -> Builder:
    """Rejects secret tensors among the arguments of a script builder."""
    @functools.wraps(builder)
    def wrapper(*args, **kwargs):
        for value in itertools.chain(args, kwargs.values()):
            if isinstance(value, SecretTensor):
                raise TypeError(f"{builder.__name__} builds scripts from public information only")
        return builder(*args, **kwargs)
    return wrapper  # type: ignore[return-value]


def slots_by_step(context: ScriptContext, positions: Optional[Iterable[Position]]) -> Dict[int, List[int]]:
    """Groups (step, slot) positions by step; None stands for every slot of every step."""
    if positions is None:
        return {ANY_STEP: list(range(context.batch_size))}
    grouped: Dict[int, List[int]] = defaultdict(list)
    for step, slot in positions:
        if not 0 <= step < context.total_steps:
            raise PreconditionError(f"Step {step} is outside the {context.total_steps} training steps")
        if not 0 <= slot < context.batch_size:
            raise PreconditionError(f"Slot {slot} is outside the batch of {context.batch_size}")
        grouped[int(step)].append(int(slot))
    return dict(grouped)


def example_positions(context: ScriptContext, examples: Sequence[int]) -> List[Position]:
    """Every (step, slot) at which the given training examples are processed."""
    return [position for example in examples for position in context.positions(int(example))]


def row_block(shape: Tuple[int, ...], slots: Iterable[int], row_value) -> np.ndarray:
    """Zeros of the given shape with the given batch rows set to row_value."""
    block = np.zeros(shape, dtype=np.float64)
    for slot in slots:
        block[slot] = row_value
    return block


def row_mask(shape: Tuple[int, ...], slots: Iterable[int]) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    for slot in slots:
        mask[slot] = True
    return mask
