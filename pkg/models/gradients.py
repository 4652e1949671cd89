# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Secure forward and backward passes of the supported models.

Every multiplication and comparison below is an attack site named by a stable label.
"""

from typing import Dict, Tuple

import numpy as np

from abb.black_box import ArithmeticBlackBox
from abb.secret_tensor import SecretTensor
from activations.activation_settings import ActivationSettings
from activations.comparison import drelu, relu
from activations.sigmoid import sigmoid, softmax_direct
from models.gradient_bundle import GradientBundle
from models.model_params import ModelKind
from tools.exceptions import ConfigValueError, ShapeMismatchError

SecretParams = Dict[str, SecretTensor]

LR_FORWARD = "lr.forward.matmul"
LR_SIGMOID = "lr.sigmoid"
LR_SOFTMAX = "lr.softmax"
LR_GRAD_W = "lr.grad_w"

SVM_FORWARD = "svm.forward.matmul"
SVM_MARGIN = "svm.margin"
SVM_HINGE = "svm.hinge"
SVM_HINGE_MULT = "svm.hinge.mult"
SVM_GRAD_D = "svm.grad_d"
SVM_GRAD_W = "svm.grad_w"

NN_LAYER0 = "nn.layer0.matmul"
NN_RELU = "nn.relu"
NN_LAYER1 = "nn.layer1.matmul"
NN_SOFTMAX = "nn.softmax"
NN_SIGMOID = "nn.sigmoid"
NN_GRAD_W1 = "nn.grad_w1"
NN_BACKPROP = "nn.backprop.matmul"
NN_DRELU = "nn.drelu"
NN_GRAD_B0 = "nn.grad_b0"
NN_GRAD_W0 = "nn.grad_w0"

# site producing the per-example gradient of each weight
WEIGHT_GRADIENT_SITES: Dict[ModelKind, Dict[str, str]] = {
    ModelKind.LR_BINARY: {"w": LR_GRAD_W},
    ModelKind.LR_MULTICLASS: {"w": LR_GRAD_W},
    ModelKind.SVM: {"w": SVM_GRAD_W},
    ModelKind.NN: {"w0": NN_GRAD_W0, "w1": NN_GRAD_W1},
}


def output_activation_label(kind: ModelKind, n_classes: int) -> str:
    if kind == ModelKind.LR_BINARY:
        return LR_SIGMOID
    if kind == ModelKind.LR_MULTICLASS:
        return LR_SOFTMAX
    if kind == ModelKind.NN:
        return NN_SOFTMAX if n_classes >= 2 else NN_SIGMOID
    raise ConfigValueError(f"{kind.value} has no output activation")


def check_activation_support(kind: ModelKind, n_classes: int, settings: ActivationSettings) -> None:
    """Softmax heads exist only as direct protocols."""
    if output_activation_label(kind, n_classes) in (LR_SOFTMAX, NN_SOFTMAX) and not settings.is_direct:
        raise ConfigValueError(f"{kind.value} with {n_classes} classes needs a direct activation variant")


def per_example_gradient_shape(kind: ModelKind, name: str, batch_size: int, n_features: int, n_classes: int,
                               hidden_units: int = 0) -> Tuple[int, ...]:
    """Shape of the output of the site producing the per-example gradients of a weight."""
    if kind in (ModelKind.LR_BINARY, ModelKind.SVM):
        return (batch_size, n_features)
    if kind == ModelKind.LR_MULTICLASS:
        return (batch_size, n_features, n_classes)
    if name == "w1":
        return (batch_size, n_classes, hidden_units)
    return (batch_size, hidden_units, n_features)


def encode_targets(kind: ModelKind, labels: np.ndarray, n_classes: int) -> np.ndarray:
    """Integer class labels to the target encoding of the model: {0,1}, {-1,1} or one-hot."""
    labels = np.asarray(labels, dtype=np.int64)
    if kind == ModelKind.SVM:
        return np.where(labels == 1, 1.0, -1.0)
    if kind == ModelKind.LR_BINARY:
        return (labels == 1).astype(np.float64)
    if kind == ModelKind.NN and n_classes == 1:
        return (labels == 1).astype(np.float64).reshape(-1, 1)
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ShapeMismatchError(f"Labels must lie in [0, {n_classes})")
    return np.eye(n_classes)[labels]


def _check_batch(x: SecretTensor, y: SecretTensor, n_features: int) -> None:
    if x.ndim != 2 or x.shape[1] != n_features:
        raise ShapeMismatchError(f"Expected a batch of shape (B, {n_features}), got {x.shape}")
    if y.shape[0] != x.shape[0]:
        raise ShapeMismatchError(f"Batch has {x.shape[0]} examples but {y.shape[0]} labels")


def lr_gradient(box: ArithmeticBlackBox, kind: ModelKind, params: SecretParams, x: SecretTensor,
                y: SecretTensor, settings: ActivationSettings) -> GradientBundle:
    """Logistic regression: D = xw + b, P = sigmoid/softmax(D), F = P - Y, grad_w = F * x, grad_b = F."""
    weights, bias = params["w"], params["b"]
    _check_batch(x, y, weights.shape[0])
    multiclass = kind == ModelKind.LR_MULTICLASS
    check_activation_support(kind, weights.shape[1] if multiclass else 1, settings)

    scores = box.add(box.matmul(x, weights, LR_FORWARD), bias)
    if multiclass:
        probabilities = softmax_direct(box, scores, LR_SOFTMAX, box.activation_attack(LR_SOFTMAX), settings)
    else:
        probabilities = sigmoid(box, scores, LR_SIGMOID, box.activation_attack(LR_SIGMOID), settings)
    derivative = box.sub(probabilities, y)

    if multiclass:
        per_example = box.mult(x.expand_dims(2), derivative.expand_dims(1), LR_GRAD_W)
    else:
        per_example = box.mult(derivative.expand_dims(1), x, LR_GRAD_W)
    return GradientBundle(
        totals={"w": per_example.sum(axis=0), "b": derivative.sum(axis=0)},
        per_example={"w": per_example},
        loss_derivative=derivative)


def svm_gradient(box: ArithmeticBlackBox, params: SecretParams, x: SecretTensor, y: SecretTensor) -> GradientBundle:
    """Squared-hinge SVM with labels in {-1, 1}.

    P = 1 - y * D, F = 1(P >= 0) * P, and the loss derivative F * y is itself a multiplication,
    giving grad_w = -(F * y) * x and grad_b = -(F * y).
    """
    weights, bias = params["w"], params["b"]
    _check_batch(x, y, weights.shape[0])

    scores = box.add(box.matmul(x, weights, SVM_FORWARD), bias)
    margin = box.mult(y, scores, SVM_MARGIN)
    slack = box.rsub_public(np.ones(margin.shape), margin)
    active = box.compare_ge(slack, box.zeros(slack.shape), SVM_HINGE)
    hinge = box.mult(active, slack, SVM_HINGE_MULT)
    derivative = box.mult(hinge, y, SVM_GRAD_D)
    negated = box.scale(-1.0, derivative)
    per_example = box.mult(negated.expand_dims(1), x, SVM_GRAD_W)
    return GradientBundle(
        totals={"w": per_example.sum(axis=0), "b": negated.sum(axis=0)},
        per_example={"w": per_example},
        loss_derivative=hinge)


def nn_gradient(box: ArithmeticBlackBox, params: SecretParams, x: SecretTensor, y: SecretTensor,
                settings: ActivationSettings) -> GradientBundle:
    """Two-layer ReLU network: forward pass and backpropagation.

    An input shift addressed to the ReLU lands once on the first-layer output, which the ReLU
    and its derivative then both see.
    """
    w0, b0, w1, b1 = params["w0"], params["b0"], params["w1"], params["b1"]
    _check_batch(x, y, w0.shape[1])
    n_classes = w1.shape[0]
    check_activation_support(ModelKind.NN, n_classes, settings)

    hidden_input = box.add(box.matmul(x, w0.T, NN_LAYER0), b0)
    relu_attack = box.activation_attack(NN_RELU)
    if relu_attack is not None:
        hidden_input = box.inject(hidden_input, relu_attack.validate_for("relu").input_shift)
        relu_attack = relu_attack.without_input_shift()
    hidden = relu(box, hidden_input, NN_RELU, relu_attack)

    scores = box.add(box.matmul(hidden, w1.T, NN_LAYER1), b1)
    if n_classes >= 2:
        probabilities = softmax_direct(box, scores, NN_SOFTMAX, box.activation_attack(NN_SOFTMAX), settings)
    else:
        probabilities = sigmoid(box, scores, NN_SIGMOID, box.activation_attack(NN_SIGMOID), settings)
    derivative = box.sub(probabilities, y)

    grad_w1 = box.mult(derivative.expand_dims(2), hidden.expand_dims(1), NN_GRAD_W1)
    backpropagated = box.matmul(derivative, w1, NN_BACKPROP)
    relu_derivative = drelu(box, hidden_input, NN_DRELU, box.activation_attack(NN_DRELU))
    hidden_derivative = box.mult(backpropagated, relu_derivative, NN_GRAD_B0)
    grad_w0 = box.mult(hidden_derivative.expand_dims(2), x.expand_dims(1), NN_GRAD_W0)
    return GradientBundle(
        totals={"w0": grad_w0.sum(axis=0), "b0": hidden_derivative.sum(axis=0),
                "w1": grad_w1.sum(axis=0), "b1": derivative.sum(axis=0)},
        per_example={"w0": grad_w0, "w1": grad_w1},
        loss_derivative=derivative)


def model_gradient(box: ArithmeticBlackBox, kind: ModelKind, params: SecretParams, x: SecretTensor,
                   y: SecretTensor, settings: ActivationSettings) -> GradientBundle:
    if kind in (ModelKind.LR_BINARY, ModelKind.LR_MULTICLASS):
        return lr_gradient(box, kind, params, x, y, settings)
    if kind == ModelKind.SVM:
        return svm_gradient(box, params, x, y)
    return nn_gradient(box, params, x, y, settings)
