# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Seeded synthetic stand-ins for the image, tabular and census benchmarks."""

import numpy as np

from data.dataset import Dataset
from data.loaders import min_max_scale
from tools.exceptions import PreconditionError

IMAGE_SIDE = 28
IMAGE_BORDER = 3
BLOBS_PER_CLASS = 3
CENSUS_STATES = 5


def _balanced_labels(rng: np.random.Generator, n: int, n_classes: int) -> np.ndarray:
    return rng.permutation(np.arange(n) % n_classes)


def synth_classification(n: int, d: int, n_classes: int, class_separation: float = 1.0, seed: int = 0) -> Dataset:
    """Gaussian class clusters of unit variance whose centres lie class_separation from the origin."""
    if n_classes < 2:
        raise PreconditionError(f"Classification needs at least two classes, got {n_classes}")
    if n < 1 or d < 1:
        raise PreconditionError(f"Need at least one row and one feature, got n={n}, d={d}")
    rng = np.random.default_rng(seed)
    centres = rng.standard_normal((n_classes, d))
    centres *= class_separation / np.linalg.norm(centres, axis=1, keepdims=True)
    labels = _balanced_labels(rng, n, n_classes)
    features = centres[labels] + rng.standard_normal((n, d))
    return Dataset(min_max_scale(features), labels, n_classes)


def _blob_prototypes(rng: np.random.Generator, n_classes: int) -> np.ndarray:
    grid = np.arange(IMAGE_SIDE, dtype=np.float64)
    rows, columns = np.meshgrid(grid, grid, indexing="ij")
    prototypes = np.zeros((n_classes, IMAGE_SIDE, IMAGE_SIDE))
    low, high = IMAGE_BORDER + 3, IMAGE_SIDE - IMAGE_BORDER - 3
    for prototype in prototypes:
        for _ in range(BLOBS_PER_CLASS):
            centre = rng.uniform(low, high, size=2)
            width = rng.uniform(2.0, 4.0)
            prototype += np.exp(-((rows - centre[0]) ** 2 + (columns - centre[1]) ** 2) / (2 * width ** 2))
        prototype /= prototype.max()
    return prototypes


def synth_images(n: int, n_classes: int = 10, noise: float = 0.15, seed: int = 0) -> Dataset:
    """28x28 grey images: a smooth per-class blob pattern plus noise, with an always-dark border."""
    if n_classes < 2:
        raise PreconditionError(f"Classification needs at least two classes, got {n_classes}")
    rng = np.random.default_rng(seed)
    prototypes = _blob_prototypes(rng, n_classes)
    labels = _balanced_labels(rng, n, n_classes)
    brightness = rng.uniform(0.7, 1.0, size=(n, 1, 1))
    images = prototypes[labels] * brightness + noise * rng.standard_normal((n, IMAGE_SIDE, IMAGE_SIDE))
    images = np.clip(images, 0.0, 1.0)
    images[:, :IMAGE_BORDER, :] = 0.0
    images[:, -IMAGE_BORDER:, :] = 0.0
    images[:, :, :IMAGE_BORDER] = 0.0
    images[:, :, -IMAGE_BORDER:] = 0.0
    return Dataset(images.reshape(n, -1), labels, n_classes)


def synth_census(per_state_n: int, d: int = 20, states: int = CENSUS_STATES, state_shift: float = 1.0,
                 seed: int = 0) -> Dataset:
    """Binary income-like task over several states with shifted class-conditional means.

    Every state draws its own offset of the feature distribution and its own rotation of the
    decision direction, so the states are not identically distributed.
    """
    if states < 1 or per_state_n < 1:
        raise PreconditionError("Need at least one state with at least one row")
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(d)
    direction /= np.linalg.norm(direction)
    features, labels, groups = [], [], []
    for state in range(states):
        offset = state_shift * rng.standard_normal(d) / np.sqrt(d)
        state_direction = direction + 0.5 * state_shift * rng.standard_normal(d) / np.sqrt(d)
        state_direction /= np.linalg.norm(state_direction)
        state_labels = (rng.uniform(size=per_state_n) < rng.uniform(0.3, 0.7)).astype(np.int64)
        means = offset + np.outer(2 * state_labels - 1, state_direction)
        features.append(means + rng.standard_normal((per_state_n, d)))
        labels.append(state_labels)
        groups.extend([f"state{state}"] * per_state_n)
    return Dataset(min_max_scale(np.concatenate(features)), np.concatenate(labels), 2, groups=np.array(groups))
