# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Attack success rate and directive counting."""

from typing import Union

import numpy as np

from abb.sites import DirectiveAudit
from models.model_params import ModelParams
from models.prediction import predict
from models.trainer import TrainingResult
from tools.exceptions import PreconditionError


def attack_success_rate(params: ModelParams, features: np.ndarray, target_labels: Union[int, np.ndarray]) -> float:
    """Fraction of the triggered or targeted inputs classified as the attack's target class."""
    features = np.asarray(features, dtype=np.float64)
    if len(features) == 0:
        raise PreconditionError("Cannot compute the attack success rate of an empty set")
    targets = np.broadcast_to(np.asarray(target_labels), (len(features),))
    return float(np.mean(predict(params, features) == targets))


def count_directives(source: Union[TrainingResult, DirectiveAudit]) -> int:
    """Errors and flips the black box actually applied during a run."""
    audit = source.audit if isinstance(source, TrainingResult) else source
    return audit.total
