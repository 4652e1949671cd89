# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Sigmoid and softmax protocols."""

from typing import Optional

import numpy as np

from abb.black_box import ArithmeticBlackBox
from abb.secret_tensor import SecretTensor
from activations.activation_attack import (
    SIGMOID_DIRECT, SIGMOID_PIECEWISE, SOFTMAX_DIRECT, ActivationAttack, resolve)
from activations.activation_settings import DIRECT_BITDECOMP, GOLDSCHMIDT, ActivationSettings
from activations.exponent import exp_bitdecomp, exp_limit
from activations.reciprocal import reciprocal_goldschmidt, reciprocal_newton
from tools.exceptions import DirectiveError, PreconditionError

DEFAULT_SETTINGS = ActivationSettings()


def sigmoid_piecewise(box: ArithmeticBlackBox, x: SecretTensor, label: str,
                      attack: Optional[ActivationAttack] = None) -> SecretTensor:
    """Piecewise-linear sigmoid (1 - b1) * b2 * (x + 1/2) + (1 - b2).

    b1 = 1(x <= -1/2) and b2 = 1(x <= 1/2) are the comparison sites '{label}.b1' and '{label}.b2'.
    """
    attack = resolve(attack, SIGMOID_PIECEWISE)
    x = box.inject(x, attack.input_shift)
    ones = np.ones(x.shape)
    b1 = box.compare_ge(box.public(-0.5 * ones), x, f"{label}.b1", flip=attack.flip_b1)
    b2 = box.compare_ge(box.public(0.5 * ones), x, f"{label}.b2", flip=attack.flip_b2)
    middle = box.mult(box.rsub_public(ones, b1), b2, f"{label}.select")
    linear = box.mult(middle, box.add_public(x, 0.5), f"{label}.mult")
    return box.add(linear, box.rsub_public(ones, b2))


def _exponential(box: ArithmeticBlackBox, x: SecretTensor, label: str, settings: ActivationSettings,
                 attack: ActivationAttack) -> SecretTensor:
    if settings.variant == DIRECT_BITDECOMP:
        return exp_bitdecomp(box, x, f"{label}.exp", attack.exp_z_flip, attack.exp_step13_epsilon)
    if attack.exp_z_flip is not None or attack.exp_step13_epsilon is not None:
        raise DirectiveError(f"Exponentiation attacks need the {DIRECT_BITDECOMP} activation variant")
    return exp_limit(box, x, f"{label}.exp", settings.exp_squarings)


def _reciprocal(box: ArithmeticBlackBox, x: SecretTensor, label: str, settings: ActivationSettings) -> SecretTensor:
    method = reciprocal_goldschmidt if settings.reciprocal == GOLDSCHMIDT else reciprocal_newton
    return method(box, x, f"{label}.recip", settings.reciprocal_iterations, exp_squarings=settings.exp_squarings)


def sigmoid_direct(box: ArithmeticBlackBox, x: SecretTensor, label: str,
                   attack: Optional[ActivationAttack] = None,
                   settings: ActivationSettings = DEFAULT_SETTINGS) -> SecretTensor:
    """Sigmoid(x) = exp(x) * 1/(1 + exp(x)); the output offset lands on '{label}.output'."""
    attack = resolve(attack, SIGMOID_DIRECT)
    x = box.inject(x, attack.input_shift)
    exponential = _exponential(box, x, label, settings, attack)
    reciprocal = _reciprocal(box, box.add_public(exponential, 1.0), label, settings)
    return box.mult(exponential, reciprocal, f"{label}.output", epsilon=attack.output_offset)


def softmax_direct(box: ArithmeticBlackBox, x: SecretTensor, label: str,
                   attack: Optional[ActivationAttack] = None,
                   settings: ActivationSettings = DEFAULT_SETTINGS) -> SecretTensor:
    """Softmax over the last axis: exp(x_i) times the reciprocal of the summed denominator.

    The output offset lands on the final multiplication '{label}.output'.
    """
    if x.ndim < 1 or x.shape[-1] < 2:
        raise PreconditionError(f"Softmax needs at least two classes, got shape {x.shape}")
    attack = resolve(attack, SOFTMAX_DIRECT)
    x = box.inject(x, attack.input_shift)
    exponential = _exponential(box, x, label, settings, attack)
    reciprocal = _reciprocal(box, exponential.sum(axis=-1, keepdims=True), label, settings)
    return box.mult(exponential, reciprocal, f"{label}.output", epsilon=attack.output_offset)


def sigmoid(box: ArithmeticBlackBox, x: SecretTensor, label: str,
            attack: Optional[ActivationAttack] = None,
            settings: ActivationSettings = DEFAULT_SETTINGS) -> SecretTensor:
    """Dispatches to the sigmoid protocol chosen by the settings."""
    if settings.is_direct:
        return sigmoid_direct(box, x, label, attack, settings)
    return sigmoid_piecewise(box, x, label, attack)
