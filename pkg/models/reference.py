# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Plaintext training that mirrors the real-valued black box operation by operation.

Without attacks the secure trainer on the real backend produces bit-identical parameters.
Adversaries use it to train reference and shadow models on their own data.
"""

from typing import Dict

import numpy as np

from activations.activation_settings import (
    DIRECT_BITDECOMP, GOLDSCHMIDT, ActivationSettings, REAL_EXP_CAP)
from abb.fixed_point import FixedPointParams
from models.batching import make_batches
from models.gradients import check_activation_support, encode_targets
from models.model_params import ModelKind, ModelParams
from models.train_config import TrainConfig
from tools.exceptions import NonFiniteValueError
from tools.tools import FullLogger

LOGGER = FullLogger(__name__)

Arrays = Dict[str, np.ndarray]


def _lin_comb(c1: float, a: np.ndarray, c2: float, b) -> np.ndarray:
    return np.asarray(c1) * a + np.asarray(c2) * b


def _add(a, b):
    return _lin_comb(1, a, 1, b)


def _sub(a, b):
    return _lin_comb(1, a, -1, b)


def _scale(constant, a):
    return _lin_comb(constant, a, 0, a)


def _add_public(a, value):
    return _add(a, np.broadcast_to(np.asarray(value, dtype=np.float64), np.shape(a)))


def _rsub_public(value, a):
    return _lin_comb(-1, a, 1, np.broadcast_to(np.asarray(value, dtype=np.float64), np.shape(a)))


def _bits(values: np.ndarray) -> np.ndarray:
    return np.asarray(values, dtype=bool).astype(np.float64)


def exp_limit(x: np.ndarray, n: int) -> np.ndarray:
    base = _add_public(_scale(2.0 ** -n, x), 1.0)
    result = _bits(np.greater_equal(base, np.zeros(np.shape(base)))) * base
    for _ in range(n):
        result = result * result
    return result


def exp_bitdecomp(x: np.ndarray) -> np.ndarray:
    params = FixedPointParams()
    threshold = -float(params.total_value_bits - params.frac_bits - 1)
    honest = np.exp(np.minimum(x, REAL_EXP_CAP))
    return _bits(np.greater_equal(x, np.full(np.shape(x), threshold))) * honest


def reciprocal(x: np.ndarray, settings: ActivationSettings) -> np.ndarray:
    _, exponent = np.frexp(x)
    factor = np.ldexp(1.0, -exponent)
    normalized = x * factor
    exponential = exp_limit(_rsub_public(0.5, normalized), settings.exp_squarings)
    estimate = factor * _add_public(_scale(3.0, exponential), 0.003)
    if settings.reciprocal == GOLDSCHMIDT:
        numerator = estimate
        denominator = x * numerator
        for _ in range(settings.reciprocal_iterations):
            correction = _rsub_public(2.0, denominator)
            denominator = denominator * correction
            numerator = numerator * correction
        return numerator
    for _ in range(settings.reciprocal_iterations):
        product = x * estimate
        estimate = estimate * _rsub_public(2.0, product)
    return estimate


def _exponential(x: np.ndarray, settings: ActivationSettings) -> np.ndarray:
    if settings.variant == DIRECT_BITDECOMP:
        return exp_bitdecomp(x)
    return exp_limit(x, settings.exp_squarings)


def sigmoid(x: np.ndarray, settings: ActivationSettings) -> np.ndarray:
    if not settings.is_direct:
        ones = np.ones(np.shape(x))
        b1 = _bits(np.greater_equal(-0.5 * ones, x))
        b2 = _bits(np.greater_equal(0.5 * ones, x))
        middle = _rsub_public(ones, b1) * b2
        linear = middle * _add_public(x, 0.5)
        return _add(linear, _rsub_public(ones, b2))
    exponential = _exponential(x, settings)
    return exponential * reciprocal(_add_public(exponential, 1.0), settings)


def softmax(x: np.ndarray, settings: ActivationSettings) -> np.ndarray:
    exponential = _exponential(x, settings)
    return exponential * reciprocal(np.sum(exponential, axis=-1, keepdims=True), settings)


def plaintext_gradients(params: ModelParams, x: np.ndarray, targets: np.ndarray,
                        settings: ActivationSettings) -> Arrays:
    """Batch-summed gradients of one step, computed without the black box."""
    kind = params.kind
    check_activation_support(kind, params.n_classes, settings)
    if kind in (ModelKind.LR_BINARY, ModelKind.LR_MULTICLASS):
        scores = _add(np.matmul(x, params["w"]), params["b"])
        if kind == ModelKind.LR_MULTICLASS:
            derivative = _sub(softmax(scores, settings), targets)
            per_example = x[:, :, np.newaxis] * derivative[:, np.newaxis, :]
        else:
            derivative = _sub(sigmoid(scores, settings), targets)
            per_example = derivative[:, np.newaxis] * x
        return {"w": np.sum(per_example, axis=0), "b": np.sum(derivative, axis=0)}

    if kind == ModelKind.SVM:
        scores = _add(np.matmul(x, params["w"]), params["b"])
        margin = targets * scores
        slack = _rsub_public(np.ones(np.shape(margin)), margin)
        hinge = _bits(np.greater_equal(slack, np.zeros(np.shape(slack)))) * slack
        negated = _scale(-1.0, hinge * targets)
        return {"w": np.sum(negated[:, np.newaxis] * x, axis=0), "b": np.sum(negated, axis=0)}

    hidden_input = _add(np.matmul(x, params["w0"].T), params["b0"])
    hidden = _bits(np.greater_equal(hidden_input, np.zeros(np.shape(hidden_input)))) * hidden_input
    scores = _add(np.matmul(hidden, params["w1"].T), params["b1"])
    probabilities = softmax(scores, settings) if params.n_classes >= 2 else sigmoid(scores, settings)
    derivative = _sub(probabilities, targets)
    grad_w1 = derivative[:, :, np.newaxis] * hidden[:, np.newaxis, :]
    backpropagated = np.matmul(derivative, params["w1"])
    relu_derivative = _rsub_public(
        np.ones(np.shape(hidden_input)), _bits(np.greater_equal(np.zeros(np.shape(hidden_input)), hidden_input)))
    hidden_derivative = backpropagated * relu_derivative
    grad_w0 = hidden_derivative[:, :, np.newaxis] * x[:, np.newaxis, :]
    return {"w0": np.sum(grad_w0, axis=0), "b0": np.sum(hidden_derivative, axis=0),
            "w1": np.sum(grad_w1, axis=0), "b1": np.sum(derivative, axis=0)}


def reference_train(initial: ModelParams, features: np.ndarray, labels: np.ndarray,
                    config: TrainConfig) -> ModelParams:
    """Plain SGD with the same batch schedule, activations and update as the secure trainer."""
    features = np.asarray(features, dtype=np.float64)
    targets = encode_targets(initial.kind, labels, initial.n_classes)
    schedule = make_batches(len(features), config.batch_size, config.epochs, config.seed, config.order)
    arrays = {name: initial[name].copy() for name in initial.names}
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch_batches in schedule:
            for batch in epoch_batches:
                current = ModelParams(initial.kind, arrays)
                gradients = plaintext_gradients(current, features[batch], targets[batch], config.activation)
                arrays = {name: _lin_comb(1, arrays[name], -config.step_size, gradients[name])
                          for name in initial.names}
    trained = ModelParams(initial.kind, arrays)
    if not trained.is_finite():
        raise NonFiniteValueError("Plaintext training produced non-finite parameters")
    LOGGER.debug(f"Plaintext training of {initial.kind.value} finished after {schedule.shape[0] * schedule.shape[1]} steps")
    return trained
