# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""SGD hyperparameters of one training run."""

from dataclasses import dataclass, field

from abb.backends import FIXED_BACKEND, REAL_BACKEND, Backend, make_backend
from abb.fixed_point import FixedPointParams
from activations.activation_settings import ActivationSettings
from tools.exceptions import ConfigValueError

SHUFFLED = "shuffled"
SEQUENTIAL = "sequential"
ORDER_POLICIES = (SHUFFLED, SEQUENTIAL)

DEFAULT_LEARNING_RATE = 0.1
DEFAULT_BATCH_SIZE = 100
DEFAULT_EPOCHS = 10


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters, activation protocols and backend of a training run.

    With the sequential order policy the position of every example in the training stream is
    public, which the order-aware attacks rely on.
    """
    learning_rate: float = DEFAULT_LEARNING_RATE
    batch_size: int = DEFAULT_BATCH_SIZE
    epochs: int = DEFAULT_EPOCHS
    seed: int = 0
    order: str = SHUFFLED
    activation: ActivationSettings = field(default_factory=ActivationSettings)
    backend: str = REAL_BACKEND
    fixed_point: FixedPointParams = field(default_factory=FixedPointParams)

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigValueError(f"Learning rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ConfigValueError(f"Batch size must be at least 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ConfigValueError(f"Epoch count must be at least 1, got {self.epochs}")
        if self.order not in ORDER_POLICIES:
            raise ConfigValueError(f"Unknown order policy '{self.order}', expected one of {ORDER_POLICIES}")
        if self.backend not in (REAL_BACKEND, FIXED_BACKEND):
            raise ConfigValueError(f"Unknown backend '{self.backend}'")

    @property
    def order_aware(self) -> bool:
        return self.order == SEQUENTIAL

    @property
    def step_size(self) -> float:
        """The public constant lr / B of the parameter update."""
        return self.learning_rate / self.batch_size

    def make_backend(self) -> Backend:
        return make_backend(self.backend, self.fixed_point)
