# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Logistic regression, SVM and two-layer network trained inside the arithmetic black box."""

from models.gradient_bundle import GradientBundle
from models.gradients import lr_gradient, model_gradient, nn_gradient, svm_gradient
from models.model_params import ModelKind, ModelParams
from models.prediction import accuracy, predict, predict_proba
from models.script_context import ScriptContext
from models.train_config import SEQUENTIAL, SHUFFLED, TrainConfig
from models.trainer import SecureTrainer, TrainingResult, sgd_train

__all__ = [
    "GradientBundle", "ModelKind", "ModelParams", "SEQUENTIAL", "SHUFFLED", "ScriptContext", "SecureTrainer",
    "TrainConfig", "TrainingResult", "accuracy", "lr_gradient", "model_gradient", "nn_gradient", "predict",
    "predict_proba", "sgd_train", "svm_gradient",
]
