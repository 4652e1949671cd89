# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Extraction of a training example from weights overwritten by a reconstruction attack."""

import math

import numpy as np

from models.model_params import ModelKind, ModelParams
from tools.exceptions import PreconditionError
from tools.tools import FullLogger

LOGGER = FullLogger(__name__)

DEFAULT_NEURON_BUDGET = 10


def min_max_normalize(vector: np.ndarray) -> np.ndarray:
    vector = np.asarray(vector, dtype=np.float64)
    spread = float(vector.max() - vector.min()) if vector.size else 0.0
    if spread <= 0.0:
        raise PreconditionError("A constant vector has no dynamic range to normalize")
    return (vector - vector.min()) / spread


def total_variation(vector: np.ndarray) -> float:
    """Mean absolute difference of neighbours, on the square grid when the length is a square."""
    side = math.isqrt(vector.size)
    if side * side == vector.size and side > 1:
        image = vector.reshape(side, side)
        return float(np.abs(np.diff(image, axis=0)).mean() + np.abs(np.diff(image, axis=1)).mean())
    return float(np.abs(np.diff(vector)).mean())


def _oriented(row: np.ndarray) -> np.ndarray:
    normalized = min_max_normalize(row)
    # images are mostly background, so their median lies in the lower half
    if np.median(normalized) > 0.5:
        normalized = 1.0 - normalized
    return normalized


def extract_reconstruction(params: ModelParams, target_class: int = 0,
                           neuron_budget: int = DEFAULT_NEURON_BUDGET) -> np.ndarray:
    """Recovers the scaled example, min-max normalized to [0, 1].

    Logistic regression: the negated weights leading to the target class, since a positive scaling
    drives that row toward -x. SVM: the weight vector, whose sign follows the secret label.
    Neural network: the most coherent of the first neuron_budget first-layer rows, coherence being
    low total variation.
    """
    if params.kind == ModelKind.LR_MULTICLASS:
        return min_max_normalize(-params["w"][:, target_class])
    if params.kind == ModelKind.LR_BINARY:
        weights = params["w"]
        return min_max_normalize(-weights if target_class == 1 else weights)
    if params.kind == ModelKind.SVM:
        return _oriented(params["w"])

    rows = params["w0"][:max(1, min(neuron_budget, params.hidden_units))]
    candidates = []
    for index, row in enumerate(rows):
        try:
            candidates.append((total_variation(_oriented(row)), index))
        except PreconditionError:
            continue
    if not candidates:
        raise PreconditionError("Every candidate neuron has constant weights")
    _, best = min(candidates)
    LOGGER.debug(f"Reconstruction taken from neuron {best} of {len(rows)} candidates")
    return _oriented(rows[best])


def normalized_mae(reconstruction: np.ndarray, original: np.ndarray) -> float:
    """Mean absolute error after min-max normalizing both vectors."""
    reconstruction = np.asarray(reconstruction, dtype=np.float64)
    original = np.asarray(original, dtype=np.float64)
    if reconstruction.shape != original.shape:
        raise PreconditionError(f"Cannot compare vectors of shapes {reconstruction.shape} and {original.shape}")
    return float(np.mean(np.abs(min_max_normalize(reconstruction) - min_max_normalize(original))))
