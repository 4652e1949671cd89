# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""ReLU and its derivative, both computed from one flippable comparison."""

from typing import Optional

import numpy as np

from abb.black_box import ArithmeticBlackBox
from abb.secret_tensor import SecretTensor
from activations.activation_attack import DRELU, RELU, ActivationAttack, resolve


def relu(box: ArithmeticBlackBox, x: SecretTensor, label: str,
         attack: Optional[ActivationAttack] = None) -> SecretTensor:
    """ReLU(x) = b * x with b = 1(x >= 0).

    The comparison is the site '{label}' and the product '{label}.mult'.
    """
    attack = resolve(attack, RELU)
    x = box.inject(x, attack.input_shift)
    bit = box.compare_ge(x, box.zeros(x.shape), label, flip=attack.flip_b1)
    return box.mult(bit, x, f"{label}.mult")


def drelu(box: ArithmeticBlackBox, x: SecretTensor, label: str,
          attack: Optional[ActivationAttack] = None) -> SecretTensor:
    """dReLU(x) = 1(x > 0) = 1 - 1(0 >= x), the comparison being the site '{label}'."""
    attack = resolve(attack, DRELU)
    x = box.inject(x, attack.input_shift)
    # flipping 1(0 >= x) flips the derivative bit
    bit = box.compare_ge(box.zeros(x.shape), x, label, flip=attack.flip_b1)
    return box.rsub_public(np.ones(x.shape), bit)
