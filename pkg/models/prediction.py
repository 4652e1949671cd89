# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Plaintext evaluation of opened models."""

import numpy as np
from scipy.special import expit, softmax

from models.model_params import ModelKind, ModelParams
from tools.exceptions import PreconditionError, ShapeMismatchError


def _check_features(params: ModelParams, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != params.n_features:
        raise ShapeMismatchError(f"Expected features of shape (n, {params.n_features}), got {features.shape}")
    return features


def hidden_activations(params: ModelParams, features: np.ndarray) -> np.ndarray:
    """ReLU outputs of the hidden layer of a neural network."""
    if params.kind != ModelKind.NN:
        raise PreconditionError(f"{params.kind.value} has no hidden layer")
    features = _check_features(params, features)
    return np.maximum(features @ params["w0"].T + params["b0"], 0.0)


def decision_scores(params: ModelParams, features: np.ndarray) -> np.ndarray:
    """Pre-activation outputs, shaped (n,) for single-output models and (n, K) otherwise."""
    features = _check_features(params, features)
    if params.kind == ModelKind.NN:
        scores = hidden_activations(params, features) @ params["w1"].T + params["b1"]
        return scores[:, 0] if params.n_classes == 1 else scores
    return features @ params["w"] + params["b"]


def predict_proba(params: ModelParams, features: np.ndarray) -> np.ndarray:
    """Class probabilities (n, n_labels) from the exact sigmoid or softmax of the scores."""
    scores = decision_scores(params, features)
    if scores.ndim == 2:
        return softmax(scores, axis=1)
    # for the SVM this squashes the margin into a confidence
    positive = expit(scores)
    return np.column_stack((1.0 - positive, positive))


def predict(params: ModelParams, features: np.ndarray) -> np.ndarray:
    """Argmax for softmax heads, threshold 0.5 for sigmoid heads, sign for the SVM."""
    scores = decision_scores(params, features)
    if scores.ndim == 2:
        return np.argmax(scores, axis=1)
    return (scores >= 0.0).astype(np.int64)


def accuracy(params: ModelParams, features: np.ndarray, labels: np.ndarray) -> float:
    labels = np.asarray(labels)
    if len(labels) == 0:
        raise PreconditionError("Cannot compute the accuracy of an empty evaluation set")
    if len(labels) != len(features):
        raise ShapeMismatchError(f"Got {len(features)} examples and {len(labels)} labels")
    return float(np.mean(predict(params, features) == labels))
