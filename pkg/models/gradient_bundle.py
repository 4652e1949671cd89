# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Gradients of one training step."""

from dataclasses import dataclass, field
from typing import Dict

from abb.secret_tensor import SecretTensor


@dataclass
class GradientBundle:
    """Batch-summed gradients per parameter plus the per-example weight gradients.

    per_example holds the weight gradients before summation, with the batch on the first axis;
    these are the tensors the weight-gradient sites produce. loss_derivative is F.
    """
    totals: Dict[str, SecretTensor] = field(default_factory=dict)
    per_example: Dict[str, SecretTensor] = field(default_factory=dict)
    loss_derivative: SecretTensor = None  # type: ignore[assignment]
