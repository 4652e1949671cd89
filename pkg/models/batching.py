# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Deterministic batch schedules."""

import numpy as np

from models.train_config import SEQUENTIAL
from tools.exceptions import PreconditionError


def steps_per_epoch(n_examples: int, batch_size: int) -> int:
    """Only full batches are used, so every step has the same public shapes."""
    steps = n_examples // batch_size
    if steps < 1:
        raise PreconditionError(f"{n_examples} examples do not fill one batch of {batch_size}")
    return steps


def make_batches(n_examples: int, batch_size: int, epochs: int, seed: int, order: str) -> np.ndarray:
    """Example indices of every slot of every step, shaped (epochs, steps per epoch, batch size)."""
    steps = steps_per_epoch(n_examples, batch_size)
    used = steps * batch_size
    if order == SEQUENTIAL:
        epoch_orders = [np.arange(used) for _ in range(epochs)]
    else:
        rng = np.random.default_rng([seed, 1])
        epoch_orders = [rng.permutation(n_examples)[:used] for _ in range(epochs)]
    return np.stack(epoch_orders).reshape(epochs, steps, batch_size)
