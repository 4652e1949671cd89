# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Exponentiation protocols: the limit approximation and the bit-decomposition protocol."""

from typing import Optional, Sequence

import numpy as np

from abb.backends import PublicValue
from abb.black_box import ArithmeticBlackBox
from abb.secret_tensor import SecretTensor
from activations.activation_settings import bitdecomp_cap, bitdecomp_threshold
from tools.exceptions import PreconditionError


def exp_limit(box: ArithmeticBlackBox, x: SecretTensor, label: str, n: int = 8,
              squaring_epsilons: Optional[Sequence[Optional[PublicValue]]] = None) -> SecretTensor:
    """exp(x) ~ max(0, 1 + x / 2^n)^(2^n) by n repeated squarings.

    The base is clamped at zero through the comparison site '{label}.clamp' and the product
    '{label}.clamp.mult', so inputs below -2^n give exactly zero. Squaring i is the site
    '{label}.sq{i}'; squaring_epsilons[i] is added to it.
    """
    if n < 1:
        raise PreconditionError(f"The limit exponentiation needs at least one squaring, got {n}")
    squaring_epsilons = list(squaring_epsilons or [])
    if len(squaring_epsilons) > n:
        raise PreconditionError(f"Got {len(squaring_epsilons)} squaring errors for {n} squarings")

    base = box.add_public(box.scale(2.0 ** -n, x), 1.0)
    positive = box.compare_ge(base, box.zeros(base.shape), f"{label}.clamp")
    result = box.mult(positive, base, f"{label}.clamp.mult")
    for index in range(n):
        epsilon = squaring_epsilons[index] if index < len(squaring_epsilons) else None
        result = box.mult(result, result, f"{label}.sq{index}", epsilon=epsilon)
    return result


def exp_bitdecomp(box: ArithmeticBlackBox, x: SecretTensor, label: str,
                  z_flip: Optional[PublicValue] = None,
                  step13_epsilon: Optional[PublicValue] = None) -> SecretTensor:
    """Functional model of the exponentiation protocol built on bit decomposition.

    The honest exponential h comes from the ideal functionality. The protocol's check
    z = 1(x < -(k - f - 1)) is a flippable comparison '{label}.z' and the output gate
    (1 - z) * h is the multiplication '{label}.step13'.
    """
    cap = bitdecomp_cap(box.backend)
    honest = box.functional(lambda values: np.exp(np.minimum(values, cap)), x)
    threshold = box.public(np.full(x.shape, bitdecomp_threshold(box.backend)))
    # 1(x >= threshold) is 1 - z, so flipping it flips z
    not_z = box.compare_ge(x, threshold, f"{label}.z", flip=z_flip)
    return box.mult(not_z, honest, f"{label}.step13", epsilon=step13_epsilon)
