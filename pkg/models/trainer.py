# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Secure SGD training inside the arithmetic black box."""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from abb.black_box import ArithmeticBlackBox, DirectiveSource
from abb.secret_tensor import SecretTensor
from abb.sites import DirectiveAudit
from models.batching import make_batches
from models.gradient_bundle import GradientBundle
from models.gradients import encode_targets, model_gradient
from models.model_params import ModelParams
from models.train_config import TrainConfig
from tools.exceptions import FixedPointOverflowError, NonFiniteValueError, ShapeMismatchError
from tools.tools import FullLogger

LOGGER = FullLogger(__name__)


@dataclass
class TrainingResult:
    """Opened model of a run plus what the black box recorded about it."""
    params: ModelParams
    steps: int
    audit: DirectiveAudit

    @property
    def directive_count(self) -> int:
        return self.audit.total


class SecureTrainer:
    """Runs SGD epoch by epoch with every gradient computed by black-box operations.

    The parameter update w <- w - lr/B * sum(grad) is a linear combination and carries no error.
    """

    def __init__(self, initial: ModelParams, config: TrainConfig, script: Optional[DirectiveSource] = None):
        self._config = config
        self._kind = initial.kind
        self._n_classes = initial.n_classes
        self._box = ArithmeticBlackBox(config.make_backend(), script)
        self._params: Dict[str, SecretTensor] = {
            name: self._box.input(initial[name]) for name in initial.names}
        self._epoch = 0
        self._step = 0

        # variables to keep track of the current epoch
        self._epoch_steps = 0
        self._epoch_errors_before = 0

    @property
    def box(self) -> ArithmeticBlackBox:
        return self._box

    @property
    def step(self) -> int:
        return self._step

    @property
    def epoch(self) -> int:
        return self._epoch

    @property
    def secret_params(self) -> Dict[str, SecretTensor]:
        return dict(self._params)

    def clear_epoch_variables(self) -> None:
        self._epoch_steps = 0
        self._epoch_errors_before = self._box.audit.total

    def process_step(self, features: SecretTensor, targets: SecretTensor) -> GradientBundle:
        """Computes the gradients of one batch and applies the update."""
        self._box.begin_step(self._step)
        try:
            bundle = model_gradient(self._box, self._kind, self._params, features, targets, self._config.activation)
            for name in self._params:
                self._params[name] = self._box.lin_comb(
                    1, self._params[name], -self._config.step_size, bundle.totals[name])
        except NonFiniteValueError as error:
            raise NonFiniteValueError(f"Training diverged at step {self._step}: {error}") from error
        except FixedPointOverflowError as error:
            raise FixedPointOverflowError(f"Fixed-point overflow at step {self._step}: {error}") from error
        self._step += 1
        self._epoch_steps += 1
        return bundle

    def process_epoch(self, features: SecretTensor, targets: SecretTensor, batches: np.ndarray) -> None:
        """Processes the batches of one epoch, given as rows of example indices."""
        self.clear_epoch_variables()
        for batch in batches:
            self.process_step(features[batch], targets[batch])
        LOGGER.debug(
            f"Epoch {self._epoch}: {self._epoch_steps} steps, "
            f"{self._box.audit.total - self._epoch_errors_before} directives consumed")
        self._epoch += 1

    def train(self, features: np.ndarray, labels: np.ndarray) -> TrainingResult:
        """Secret-shares the training data, runs all epochs and opens the final model."""
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or len(features) != len(labels):
            raise ShapeMismatchError(f"Got {features.shape} features for {len(labels)} labels")
        schedule = make_batches(
            len(features), self._config.batch_size, self._config.epochs, self._config.seed, self._config.order)
        LOGGER.info(
            f"Training {self._kind.value} on {len(features)} examples: {self._config.epochs} epochs x "
            f"{schedule.shape[1]} steps, backend {self._box.backend.describe()}")

        secret_features = self._box.input(features)
        secret_targets = self._box.input(encode_targets(self._kind, labels, self._n_classes))
        for epoch_batches in schedule:
            self.process_epoch(secret_features, secret_targets, epoch_batches)

        self._box.verify_script()
        opened = self.open_params()
        if not opened.is_finite():
            raise NonFiniteValueError("Training produced non-finite parameters")
        LOGGER.info(f"Training finished after {self._step} steps, {self._box.audit.total} directives consumed")
        return TrainingResult(params=opened, steps=self._step, audit=self._box.audit)

    def open_params(self) -> ModelParams:
        return ModelParams(self._kind, {name: self._box.open(value) for name, value in self._params.items()})


def sgd_train(initial: ModelParams, features: np.ndarray, labels: np.ndarray, config: TrainConfig,
              script: Optional[DirectiveSource] = None) -> TrainingResult:
    """Trains a model from the given initial parameters, optionally under an attack script."""
    return SecureTrainer(initial, config, script).train(features, labels)
