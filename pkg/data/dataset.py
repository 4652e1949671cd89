# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Immutable datasets and the index sets that split them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from tools.exceptions import DatasetError


def _read_only(array: np.ndarray) -> np.ndarray:
    array = np.array(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Dataset:
    """Features scaled to [0, 1] with integer labels in [0, n_classes).

    groups optionally names the group (for example the state) every row belongs to.
    """
    features: np.ndarray
    labels: np.ndarray
    n_classes: int = 0
    feature_names: Tuple[str, ...] = ()
    groups: Optional[np.ndarray] = None

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels)
        if features.ndim != 2:
            raise DatasetError(f"Features must be a matrix, got shape {features.shape}")
        if labels.shape != (features.shape[0],):
            raise DatasetError(f"{features.shape[0]} rows need as many labels, got shape {labels.shape}")
        if not np.all(np.isfinite(features)):
            row = int(np.argwhere(~np.isfinite(features))[0][0])
            raise DatasetError(f"Row {row} contains a non-finite feature value")
        if labels.size and not np.all(np.equal(np.mod(labels, 1), 0)):
            raise DatasetError("Labels must be integers")
        labels = labels.astype(np.int64)
        n_classes = self.n_classes or (int(labels.max()) + 1 if labels.size else 0)
        if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
            raise DatasetError(f"Labels must lie in [0, {n_classes})")
        if self.feature_names and len(self.feature_names) != features.shape[1]:
            raise DatasetError(f"{len(self.feature_names)} feature names for {features.shape[1]} features")
        object.__setattr__(self, "features", _read_only(features))
        object.__setattr__(self, "labels", _read_only(labels))
        object.__setattr__(self, "n_classes", int(n_classes))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if self.groups is not None:
            groups = np.asarray(self.groups).astype(str)
            if groups.shape != labels.shape:
                raise DatasetError("Every row needs a group when groups are given")
            object.__setattr__(self, "groups", _read_only(groups))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, indices: Sequence[int]) -> Dataset:
        """Rows at the given indices, in the given order."""
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size and (indices.min() < 0 or indices.max() >= self.n):
            raise DatasetError(f"Row index out of range for a dataset of {self.n} rows")
        groups = None if self.groups is None else self.groups[indices]
        return Dataset(self.features[indices], self.labels[indices], self.n_classes, self.feature_names, groups)


@dataclass(frozen=True)
class SplitSpec:
    clean_n: int
    adversary_n: int
    test_n: int
    seed: int = 0

    def __post_init__(self):
        for name in ("clean_n", "adversary_n", "test_n"):
            if getattr(self, name) < 0:
                raise DatasetError(f"{name} must be non-negative, got {getattr(self, name)}")

    @property
    def total(self) -> int:
        return self.clean_n + self.adversary_n + self.test_n


def _check_disjoint(index_sets: Dict[str, np.ndarray]) -> None:
    seen: Dict[int, str] = {}
    for name, indices in index_sets.items():
        if len(np.unique(indices)) != len(indices):
            raise DatasetError(f"Index set '{name}' contains duplicates")
        for index in indices.tolist():
            if index in seen:
                raise DatasetError(f"Row {index} is in both '{seen[index]}' and '{name}'")
            seen[index] = name


@dataclass(frozen=True)
class DataSplit:
    """Disjoint row indices of the protected training set, the adversary's data and the test set."""
    clean: np.ndarray
    adversary: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        for name in ("clean", "adversary", "test"):
            object.__setattr__(self, name, _read_only(np.asarray(getattr(self, name), dtype=np.int64)))
        _check_disjoint(self.index_sets())

    def index_sets(self) -> Dict[str, np.ndarray]:
        return {"clean": self.clean, "adversary": self.adversary, "test": self.test}


@dataclass(frozen=True)
class PartySplit:
    """Row indices owned by each party, in party order."""
    parties: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        parties = {name: _read_only(np.asarray(indices, dtype=np.int64)) for name, indices in self.parties.items()}
        _check_disjoint(parties)
        object.__setattr__(self, "parties", parties)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(self.parties)

    def index_sets(self) -> Dict[str, np.ndarray]:
        return dict(self.parties)

    def training_order(self) -> np.ndarray:
        """Dataset rows of the training stream: every party's rows contiguously, in party order."""
        if not self.parties:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(list(self.parties.values()))

    def stream_positions(self, party: str) -> np.ndarray:
        """Positions in the training stream of the rows owned by the party."""
        start = 0
        for name, indices in self.parties.items():
            if name == party:
                return np.arange(start, start + len(indices), dtype=np.int64)
            start += len(indices)
        raise DatasetError(f"Unknown party '{party}'")
