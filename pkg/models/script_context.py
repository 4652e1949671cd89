# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Public metadata of a training run, the only view of the run an attack script builder gets."""

from dataclasses import dataclass
from typing import Dict, List, Tuple

from activations.activation_settings import ActivationSettings
from models.batching import steps_per_epoch
from models.gradients import (
    NN_LAYER0, SVM_HINGE, SVM_MARGIN, WEIGHT_GRADIENT_SITES, output_activation_label, per_example_gradient_shape)
from models.model_params import ModelKind, ModelParams
from models.train_config import TrainConfig
from tools.exceptions import PreconditionError


@dataclass(frozen=True)
class ScriptContext:
    """Shapes, step counts and hyperparameters of a run; never any secret value."""
    kind: ModelKind
    n_features: int
    n_classes: int
    hidden_units: int
    n_examples: int
    batch_size: int
    epochs: int
    learning_rate: float
    order_aware: bool
    activation: ActivationSettings

    @classmethod
    def for_run(cls, params: ModelParams, config: TrainConfig, n_examples: int) -> "ScriptContext":
        """Reads only the shapes of the parameters."""
        return cls(kind=params.kind, n_features=params.n_features, n_classes=params.n_classes,
                   hidden_units=params.hidden_units, n_examples=n_examples, batch_size=config.batch_size,
                   epochs=config.epochs, learning_rate=config.learning_rate, order_aware=config.order_aware,
                   activation=config.activation)

    @property
    def steps_per_epoch(self) -> int:
        return steps_per_epoch(self.n_examples, self.batch_size)

    @property
    def total_steps(self) -> int:
        return self.epochs * self.steps_per_epoch

    @property
    def last_step(self) -> int:
        return self.total_steps - 1

    @property
    def step_size(self) -> float:
        return self.learning_rate / self.batch_size

    @property
    def weight_gradient_sites(self) -> Dict[str, str]:
        return dict(WEIGHT_GRADIENT_SITES[self.kind])

    def weight_gradient_shape(self, name: str) -> Tuple[int, ...]:
        return per_example_gradient_shape(
            self.kind, name, self.batch_size, self.n_features, self.n_classes, self.hidden_units)

    @property
    def output_activation(self) -> str:
        return output_activation_label(self.kind, self.n_classes)

    @property
    def output_shape(self) -> Tuple[int, ...]:
        """Shape of the output activation of one step."""
        if self.kind in (ModelKind.NN, ModelKind.LR_MULTICLASS):
            return (self.batch_size, self.n_classes)
        return (self.batch_size,)

    @property
    def margin_site(self) -> str:
        return SVM_MARGIN

    @property
    def hinge_site(self) -> str:
        return SVM_HINGE

    @property
    def hidden_input_site(self) -> Tuple[str, Tuple[int, int]]:
        return NN_LAYER0, (self.batch_size, self.hidden_units)

    def positions(self, example_index: int) -> List[Tuple[int, int]]:
        """(step, slot) of every occurrence of a training example; needs a public data order."""
        if not self.order_aware:
            raise PreconditionError("Example positions are only known with the sequential order policy")
        if not 0 <= example_index < self.n_examples:
            raise PreconditionError(f"Example {example_index} is outside the {self.n_examples} training examples")
        batch, slot = divmod(example_index, self.batch_size)
        if batch >= self.steps_per_epoch:
            return []
        return [(epoch * self.steps_per_epoch + batch, slot) for epoch in range(self.epochs)]
