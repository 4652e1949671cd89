# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Model kinds and their plaintext parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Tuple

import numpy as np

from tools.exceptions import ConfigValueError, ShapeMismatchError


class ModelKind(str, Enum):
    LR_BINARY = "lr-binary"
    LR_MULTICLASS = "lr-multiclass"
    SVM = "svm"
    NN = "nn-2layer"

    @property
    def is_binary(self) -> bool:
        return self in (ModelKind.LR_BINARY, ModelKind.SVM)

    @classmethod
    def parse(cls, value: str) -> ModelKind:
        try:
            return cls(value)
        except ValueError as error:
            raise ConfigValueError(
                f"Unknown model kind '{value}', expected one of {[kind.value for kind in cls]}") from error


PARAMETER_NAMES: Dict[ModelKind, Tuple[str, ...]] = {
    ModelKind.LR_BINARY: ("w", "b"),
    ModelKind.LR_MULTICLASS: ("w", "b"),
    ModelKind.SVM: ("w", "b"),
    ModelKind.NN: ("w0", "b0", "w1", "b1"),
}

WEIGHT_NAMES: Dict[ModelKind, Tuple[str, ...]] = {
    ModelKind.LR_BINARY: ("w",),
    ModelKind.LR_MULTICLASS: ("w",),
    ModelKind.SVM: ("w",),
    ModelKind.NN: ("w0", "w1"),
}


def expected_shapes(kind: ModelKind, n_features: int, n_classes: int,
                    hidden_units: int = 0) -> Dict[str, Tuple[int, ...]]:
    if kind in (ModelKind.LR_BINARY, ModelKind.SVM):
        return {"w": (n_features,), "b": ()}
    if kind == ModelKind.LR_MULTICLASS:
        return {"w": (n_features, n_classes), "b": (n_classes,)}
    # a single output unit means a sigmoid head
    return {"w0": (hidden_units, n_features), "b0": (hidden_units,),
            "w1": (n_classes, hidden_units), "b1": (n_classes,)}


@dataclass
class ModelParams:
    """Opened (plaintext) parameters of one model.

    n_classes is the number of output units: 1 for the sigmoid-headed binary models and for a
    neural network with a sigmoid head, K for softmax heads.
    """
    kind: ModelKind
    arrays: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.kind = ModelKind(self.kind)
        names = PARAMETER_NAMES[self.kind]
        if set(self.arrays) != set(names):
            raise ShapeMismatchError(f"{self.kind.value} needs parameters {names}, got {sorted(self.arrays)}")
        self.arrays = {name: np.array(self.arrays[name], dtype=np.float64) for name in names}
        expected = expected_shapes(self.kind, self.n_features, self.n_classes, self.hidden_units)
        for name, shape in expected.items():
            if self.arrays[name].shape != shape:
                raise ShapeMismatchError(
                    f"Parameter {name} of {self.kind.value} has shape {self.arrays[name].shape}, expected {shape}")
        if self.kind == ModelKind.LR_MULTICLASS and self.n_classes < 2:
            raise ShapeMismatchError("Multiclass logistic regression needs at least two classes")
        if self.kind == ModelKind.NN and self.hidden_units < 1:
            raise ShapeMismatchError("The neural network needs at least one hidden unit")

    @property
    def n_features(self) -> int:
        if self.kind == ModelKind.NN:
            return self.arrays["w0"].shape[1]
        return self.arrays["w"].shape[0]

    @property
    def n_classes(self) -> int:
        """Number of output units."""
        if self.kind == ModelKind.NN:
            return self.arrays["w1"].shape[0]
        if self.kind == ModelKind.LR_MULTICLASS:
            return self.arrays["w"].shape[1]
        return 1

    @property
    def n_labels(self) -> int:
        """Number of distinct class labels the model predicts."""
        return max(2, self.n_classes)

    @property
    def hidden_units(self) -> int:
        return self.arrays["w0"].shape[0] if self.kind == ModelKind.NN else 0

    @property
    def names(self) -> Tuple[str, ...]:
        return PARAMETER_NAMES[self.kind]

    @property
    def weight_names(self) -> Tuple[str, ...]:
        return WEIGHT_NAMES[self.kind]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    def copy(self) -> ModelParams:
        return ModelParams(self.kind, {name: array.copy() for name, array in self.arrays.items()})

    def shifted(self, deltas: Dict[str, np.ndarray]) -> ModelParams:
        """Returns a copy with the given arrays added to the parameters."""
        arrays = {name: array + deltas.get(name, 0.0) for name, array in self.arrays.items()}
        return ModelParams(self.kind, arrays)

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(array)) for array in self.arrays.values())

    def max_abs_difference(self, other: ModelParams) -> float:
        if self.kind != other.kind:
            raise ShapeMismatchError(f"Cannot compare a {self.kind.value} model with a {other.kind.value} model")
        return max(float(np.max(np.abs(self.arrays[name] - other.arrays[name]), initial=0.0)) for name in self.names)

    @classmethod
    def initialize(cls, kind: ModelKind, n_features: int, n_classes: int, hidden_units: int = 0,
                   seed: int = 0) -> ModelParams:
        """Zeros for the linear models; uniform in +-1/sqrt(fan_in) per layer for the neural network."""
        kind = ModelKind(kind)
        if n_features < 1:
            raise ShapeMismatchError(f"Models need at least one feature, got {n_features}")
        if kind.is_binary:
            n_classes = 1
        shapes = expected_shapes(kind, n_features, n_classes, hidden_units)
        if kind != ModelKind.NN:
            return cls(kind, {name: np.zeros(shape) for name, shape in shapes.items()})

        rng = np.random.default_rng(seed)
        arrays = {}
        for name, fan_in in (("w0", n_features), ("b0", n_features), ("w1", hidden_units), ("b1", hidden_units)):
            bound = 1.0 / math.sqrt(fan_in)
            arrays[name] = rng.uniform(-bound, bound, size=shapes[name])
        return cls(kind, arrays)
