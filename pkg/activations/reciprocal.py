# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Iterative reciprocal protocols: Newton-Raphson and Goldschmidt."""

from typing import List, Optional, Sequence

import numpy as np

from abb.backends import PublicValue
from abb.black_box import ArithmeticBlackBox
from abb.secret_tensor import SecretTensor
from activations.exponent import exp_limit
from tools.exceptions import PreconditionError

INITIAL_SCALE = 3.0
INITIAL_OFFSET = 0.003


def _normalizing_factor(values: np.ndarray) -> np.ndarray:
    if np.any(values <= 0.0):
        raise PreconditionError("The reciprocal protocols need positive inputs")
    _, exponent = np.frexp(values)
    return np.ldexp(1.0, -exponent)


def _epsilons(per_iter_epsilons: Optional[Sequence[Optional[PublicValue]]], iterations: int) -> List:
    if iterations < 1:
        raise PreconditionError(f"The reciprocal protocols need at least one iteration, got {iterations}")
    epsilons = list(per_iter_epsilons or [])
    if len(epsilons) > iterations:
        raise PreconditionError(f"Got {len(epsilons)} iteration errors for {iterations} iterations")
    return epsilons + [None] * (iterations - len(epsilons))


def initial_estimate(box: ArithmeticBlackBox, x: SecretTensor, label: str,
                     exp_squarings: int = 8) -> SecretTensor:
    """y0 = c * (3 * exp(0.5 - x * c) + 0.003) for the secret power of two c with x * c in [0.5, 1).

    The scaling c comes from the normalization subprotocol, modeled functionally. Both
    multiplications by c are attack sites.
    """
    factor = box.functional(_normalizing_factor, x)
    normalized = box.mult(x, factor, f"{label}.normalize")
    exponential = exp_limit(box, box.rsub_public(0.5, normalized), f"{label}.init.exp", exp_squarings)
    estimate = box.add_public(box.scale(INITIAL_SCALE, exponential), INITIAL_OFFSET)
    return box.mult(factor, estimate, f"{label}.init.scale")


def reciprocal_newton(box: ArithmeticBlackBox, x: SecretTensor, label: str, iterations: int = 10,
                      per_iter_epsilons: Optional[Sequence[Optional[PublicValue]]] = None,
                      exp_squarings: int = 8) -> SecretTensor:
    """1/x by y_{n+1} = y_n * (2 - x * y_n).

    Iteration i multiplies at '{label}.iter{i}.inner' (x * y) and '{label}.iter{i}.outer'
    (the new estimate); per_iter_epsilons[i] is added to the outer product.
    """
    epsilons = _epsilons(per_iter_epsilons, iterations)
    estimate = initial_estimate(box, x, label, exp_squarings)
    for index, epsilon in enumerate(epsilons):
        product = box.mult(x, estimate, f"{label}.iter{index}.inner")
        estimate = box.mult(estimate, box.rsub_public(2.0, product), f"{label}.iter{index}.outer", epsilon=epsilon)
    return estimate


def reciprocal_goldschmidt(box: ArithmeticBlackBox, x: SecretTensor, label: str, iterations: int = 10,
                           per_iter_epsilons: Optional[Sequence[Optional[PublicValue]]] = None,
                           exp_squarings: int = 8) -> SecretTensor:
    """1/x by Goldschmidt's iteration d <- d * r, n <- n * r, r = 2 - d, started at d = x * y0, n = y0.

    Iteration i multiplies at '{label}.iter{i}.denominator' and '{label}.iter{i}.numerator';
    per_iter_epsilons[i] is added to the numerator product.
    """
    epsilons = _epsilons(per_iter_epsilons, iterations)
    numerator = initial_estimate(box, x, label, exp_squarings)
    denominator = box.mult(x, numerator, f"{label}.start")
    for index, epsilon in enumerate(epsilons):
        correction = box.rsub_public(2.0, denominator)
        denominator = box.mult(denominator, correction, f"{label}.iter{index}.denominator")
        numerator = box.mult(numerator, correction, f"{label}.iter{index}.numerator", epsilon=epsilon)
    return numerator
