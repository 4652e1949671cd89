# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Activation protocols built from black-box operations, each exposing its attack surface."""

from activations.activation_attack import ActivationAttack
from activations.activation_settings import (
    ACTIVATION_VARIANTS, DIRECT_BITDECOMP, DIRECT_LIMIT, GOLDSCHMIDT, NEWTON, PIECEWISE, ActivationSettings)
from activations.comparison import drelu, relu
from activations.exponent import exp_bitdecomp, exp_limit
from activations.reciprocal import reciprocal_goldschmidt, reciprocal_newton
from activations.sigmoid import sigmoid, sigmoid_direct, sigmoid_piecewise, softmax_direct

__all__ = [
    "ACTIVATION_VARIANTS", "ActivationAttack", "ActivationSettings", "DIRECT_BITDECOMP", "DIRECT_LIMIT",
    "GOLDSCHMIDT", "NEWTON", "PIECEWISE", "drelu", "exp_bitdecomp", "exp_limit", "reciprocal_goldschmidt",
    "reciprocal_newton", "relu", "sigmoid", "sigmoid_direct", "sigmoid_piecewise", "softmax_direct",
]
