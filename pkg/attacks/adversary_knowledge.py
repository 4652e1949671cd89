# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Everything the adversary knows in plaintext: its own data and the attack goal."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from tools.exceptions import PreconditionError


@dataclass
class AdversaryKnowledge:
    """Adversary-owned data and attack parameters.

    own_features / own_labels never overlap the protected training set. goal_features and
    goal_labels are the examples of a targeted attack with the classes they should be given.
    poison_indices and target_party_indices are positions in the training stream and are only
    usable when the data order is public.
    """
    own_features: np.ndarray
    own_labels: np.ndarray
    target_class: int = 0
    trigger_feature: int = 0
    trigger_value: float = 1.0
    data_mean: Optional[np.ndarray] = None
    scaling_strength: float = 0.0
    mean_scaling: Optional[float] = None
    goal_features: Optional[np.ndarray] = None
    goal_labels: Optional[np.ndarray] = None
    poison_indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    poison_labels: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    target_party_indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        self.own_features = np.asarray(self.own_features, dtype=np.float64)
        self.own_labels = np.asarray(self.own_labels, dtype=np.int64)
        if self.own_features.ndim != 2 or len(self.own_features) != len(self.own_labels):
            raise PreconditionError(
                f"Adversary data has {self.own_features.shape} features for {len(self.own_labels)} labels")
        if not 0 <= self.trigger_feature < self.n_features:
            raise PreconditionError(f"Trigger feature {self.trigger_feature} is outside {self.n_features} features")
        if self.data_mean is None:
            self.data_mean = self.own_features.mean(axis=0) if len(self.own_features) else np.zeros(self.n_features)
        self.data_mean = np.asarray(self.data_mean, dtype=np.float64)
        if self.data_mean.shape != (self.n_features,):
            raise PreconditionError(f"Data mean must have shape ({self.n_features},)")
        if not np.isfinite(self.scaling_strength):
            raise PreconditionError("Scaling strength must be finite")
        self.poison_indices = np.asarray(self.poison_indices, dtype=np.int64)
        self.poison_labels = np.asarray(self.poison_labels, dtype=np.int64)
        self.target_party_indices = np.asarray(self.target_party_indices, dtype=np.int64)
        if len(self.poison_indices) != len(self.poison_labels):
            raise PreconditionError("Every poison example needs a poison label")

    @property
    def n_features(self) -> int:
        return self.own_features.shape[1]

    @property
    def trigger(self) -> np.ndarray:
        """Feature-space trigger vector: the trigger value on the trigger feature, zero elsewhere."""
        trigger = np.zeros(self.n_features)
        trigger[self.trigger_feature] = self.trigger_value
        return trigger

    def resolved_mean_scaling(self) -> float:
        """c of the neuron shift delta - c * mu; by default half the inverse squared norm of mu."""
        if self.mean_scaling is not None:
            return float(self.mean_scaling)
        norm = float(self.data_mean @ self.data_mean)
        return 0.5 / norm if norm > 0.0 else 0.0
