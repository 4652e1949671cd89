# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Gradients of the secure forward and backward passes."""

import unittest

import numpy as np
from scipy.special import log_softmax

from abb.backends import FixedPointBackend, RealBackend
from abb.black_box import ArithmeticBlackBox
from activations import DIRECT_BITDECOMP, PIECEWISE, ActivationSettings
from attacks.attack_script import AttackScript
from models.gradients import (
    NN_LAYER0, SVM_MARGIN, check_activation_support, encode_targets, lr_gradient, nn_gradient, svm_gradient)
from models.model_params import ModelKind
from tools.exceptions import ConfigValueError, ShapeMismatchError

BITDECOMP = ActivationSettings(variant=DIRECT_BITDECOMP)
STEP_SIZE = 1.0e-4


def secret_params(box, arrays):
    return {name: box.input(value) for name, value in arrays.items()}


def opened_totals(box, bundle):
    return {name: box.open(value) for name, value in bundle.totals.items()}


def cross_entropy(scores, targets):
    return -float(np.sum(targets * log_softmax(scores, axis=1)))


def lr_loss(arrays, x, targets):
    return cross_entropy(x @ arrays["w"] + arrays["b"], targets)


def nn_loss(arrays, x, targets):
    hidden = np.maximum(x @ arrays["w0"].T + arrays["b0"], 0.0)
    return cross_entropy(hidden @ arrays["w1"].T + arrays["b1"], targets)


def finite_differences(loss, arrays, *args):
    """Central differences of the loss with respect to every parameter entry."""
    gradients = {}
    for name, array in arrays.items():
        gradient = np.zeros_like(array)
        for index in np.ndindex(array.shape):
            plus = {key: value.copy() for key, value in arrays.items()}
            minus = {key: value.copy() for key, value in arrays.items()}
            plus[name][index] += STEP_SIZE
            minus[name][index] -= STEP_SIZE
            gradient[index] = (loss(plus, *args) - loss(minus, *args)) / (2 * STEP_SIZE)
        gradients[name] = gradient
    return gradients


class TestLogisticRegressionGradient(unittest.TestCase):
    def test_binary_gradient_at_zero(self):
        x = np.array([[1.0, 2.0, -1.0]])
        box = ArithmeticBlackBox(RealBackend())
        params = secret_params(box, {"w": np.zeros(3), "b": np.zeros(())})
        bundle = lr_gradient(box, ModelKind.LR_BINARY, params, box.input(x), box.input([1.0]),
                             ActivationSettings(variant=PIECEWISE))
        np.testing.assert_array_equal(box.open(bundle.loss_derivative), [-0.5])
        totals = opened_totals(box, bundle)
        np.testing.assert_array_equal(totals["w"], -0.5 * x[0])
        np.testing.assert_array_equal(totals["b"], -0.5)
        self.assertEqual(bundle.per_example["w"].shape, (1, 3))

    def test_binary_gradient_on_fixed_point(self):
        x = np.array([[1.0, 2.0, -1.0], [0.5, 0.25, 0.0]])
        box = ArithmeticBlackBox(FixedPointBackend())
        params = secret_params(box, {"w": np.zeros(3), "b": np.zeros(())})
        bundle = lr_gradient(box, ModelKind.LR_BINARY, params, box.input(x), box.input([1.0, 0.0]),
                             ActivationSettings())
        np.testing.assert_array_equal(opened_totals(box, bundle)["w"], -0.5 * x[0] + 0.5 * x[1])

    def test_multiclass_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        for instance in range(20):
            with self.subTest(instance=instance):
                x = rng.uniform(-1.0, 1.0, size=(4, 3))
                targets = np.eye(3)[rng.integers(0, 3, size=4)]
                arrays = {"w": rng.normal(scale=0.5, size=(3, 3)), "b": rng.normal(scale=0.5, size=3)}
                box = ArithmeticBlackBox(RealBackend())
                bundle = lr_gradient(box, ModelKind.LR_MULTICLASS, secret_params(box, arrays), box.input(x),
                                     box.input(targets), BITDECOMP)
                expected = finite_differences(lr_loss, arrays, x, targets)
                for name, value in opened_totals(box, bundle).items():
                    np.testing.assert_allclose(value, expected[name], rtol=1e-4, atol=1e-7)

    def test_softmax_head_needs_direct_variant(self):
        box = ArithmeticBlackBox(RealBackend())
        params = secret_params(box, {"w": np.zeros((2, 3)), "b": np.zeros(3)})
        with self.assertRaises(ConfigValueError):
            lr_gradient(box, ModelKind.LR_MULTICLASS, params, box.input(np.ones((1, 2))),
                        box.input(np.eye(3)[:1]), ActivationSettings())
        with self.assertRaises(ConfigValueError):
            check_activation_support(ModelKind.NN, 4, ActivationSettings(variant=PIECEWISE))
        check_activation_support(ModelKind.NN, 1, ActivationSettings(variant=PIECEWISE))

    def test_batch_shape_mismatch(self):
        box = ArithmeticBlackBox(RealBackend())
        params = secret_params(box, {"w": np.zeros(3), "b": np.zeros(())})
        with self.assertRaises(ShapeMismatchError):
            lr_gradient(box, ModelKind.LR_BINARY, params, box.input(np.ones((2, 4))), box.input([1.0, 0.0]),
                        ActivationSettings())


class TestSvmGradient(unittest.TestCase):
    def test_active_margin(self):
        x = np.array([[1.0, 2.0]])
        box = ArithmeticBlackBox(RealBackend())
        params = secret_params(box, {"w": np.zeros(2), "b": np.zeros(())})
        totals = opened_totals(box, svm_gradient(box, params, box.input(x), box.input([1.0])))
        # hinge 1 at score 0, so the gradient is -y * x
        np.testing.assert_array_equal(totals["w"], [-1.0, -2.0])
        np.testing.assert_array_equal(totals["b"], -1.0)

    def test_inactive_margin_gives_zero_gradient(self):
        box = ArithmeticBlackBox(RealBackend())
        params = secret_params(box, {"w": np.array([1.0, 0.0]), "b": np.array(1.0)})
        totals = opened_totals(box, svm_gradient(box, params, box.input([[1.0, 5.0]]), box.input([1.0])))
        np.testing.assert_array_equal(totals["w"], [0.0, 0.0])
        np.testing.assert_array_equal(totals["b"], 0.0)

    def test_margin_error_deactivates_the_hinge(self):
        script = AttackScript().add_errors(0, SVM_MARGIN, np.full(2, 1.0e4))
        box = ArithmeticBlackBox(RealBackend(), script)
        params = secret_params(box, {"w": np.zeros(2), "b": np.zeros(())})
        bundle = svm_gradient(box, params, box.input([[1.0, 2.0], [3.0, -1.0]]), box.input([1.0, -1.0]))
        np.testing.assert_array_equal(box.open(bundle.per_example["w"]), np.zeros((2, 2)))
        self.assertEqual(box.audit.error_count, 2)


class TestNetworkGradient(unittest.TestCase):
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        checked = 0
        while checked < 10:
            x = rng.uniform(-1.0, 1.0, size=(3, 4))
            targets = np.eye(3)[rng.integers(0, 3, size=3)]
            arrays = {"w0": rng.normal(scale=0.7, size=(5, 4)), "b0": rng.normal(scale=0.3, size=5),
                      "w1": rng.normal(scale=0.7, size=(3, 5)), "b1": rng.normal(scale=0.3, size=3)}
            # the loss is not differentiable where a hidden input crosses zero
            if np.min(np.abs(x @ arrays["w0"].T + arrays["b0"])) < 1e-2:
                continue
            box = ArithmeticBlackBox(RealBackend())
            bundle = nn_gradient(box, secret_params(box, arrays), box.input(x), box.input(targets), BITDECOMP)
            expected = finite_differences(nn_loss, arrays, x, targets)
            for name, value in opened_totals(box, bundle).items():
                np.testing.assert_allclose(value, expected[name], rtol=1e-4, atol=1e-7, err_msg=name)
            checked += 1

    def test_zero_weights_give_outer_product(self):
        b0 = np.array([0.5, -0.25, 1.0])
        b1 = np.array([0.2, -0.1])
        arrays = {"w0": np.zeros((3, 2)), "b0": b0, "w1": np.zeros((2, 3)), "b1": b1}
        box = ArithmeticBlackBox(RealBackend())
        targets = np.array([[0.0, 1.0]])
        bundle = nn_gradient(box, secret_params(box, arrays), box.input([[1.0, -1.0]]), box.input(targets),
                             BITDECOMP)
        derivative = np.exp(b1) / np.sum(np.exp(b1)) - targets[0]
        totals = opened_totals(box, bundle)
        np.testing.assert_allclose(totals["w1"], np.outer(derivative, np.maximum(b0, 0.0)), rtol=1e-12)
        np.testing.assert_allclose(totals["b1"], derivative, rtol=1e-12)
        np.testing.assert_array_equal(totals["w0"], np.zeros((3, 2)))

    def test_zeroed_hidden_layer_leaves_only_output_bias(self):
        rng = np.random.default_rng(5)
        arrays = {"w0": rng.normal(size=(4, 3)), "b0": rng.normal(size=4),
                  "w1": rng.normal(size=(2, 4)), "b1": rng.normal(size=2)}
        script = AttackScript().add_errors(0, NN_LAYER0, np.full((6, 4), -1.0e4))
        box = ArithmeticBlackBox(RealBackend(), script)
        x = rng.uniform(size=(6, 3))
        targets = np.eye(2)[rng.integers(0, 2, size=6)]
        totals = opened_totals(box, nn_gradient(box, secret_params(box, arrays), box.input(x), box.input(targets),
                                                BITDECOMP))
        for name in ("w0", "b0", "w1"):
            np.testing.assert_array_equal(totals[name], np.zeros(arrays[name].shape), err_msg=name)
        self.assertTrue(np.any(totals["b1"] != 0.0))

    def test_sigmoid_head(self):
        arrays = {"w0": np.zeros((2, 2)), "b0": np.ones(2), "w1": np.zeros((1, 2)), "b1": np.zeros(1)}
        box = ArithmeticBlackBox(RealBackend())
        bundle = nn_gradient(box, secret_params(box, arrays), box.input([[1.0, 1.0]]), box.input([[1.0]]),
                             ActivationSettings())
        np.testing.assert_array_equal(opened_totals(box, bundle)["w1"], [[-0.5, -0.5]])


class TestTargetEncoding(unittest.TestCase):
    def test_encodings(self):
        labels = np.array([0, 1, 1])
        np.testing.assert_array_equal(encode_targets(ModelKind.SVM, labels, 1), [-1.0, 1.0, 1.0])
        np.testing.assert_array_equal(encode_targets(ModelKind.LR_BINARY, labels, 1), [0.0, 1.0, 1.0])
        np.testing.assert_array_equal(encode_targets(ModelKind.NN, labels, 1), [[0.0], [1.0], [1.0]])
        np.testing.assert_array_equal(encode_targets(ModelKind.LR_MULTICLASS, labels, 3)[1], [0.0, 1.0, 0.0])

    def test_out_of_range_label(self):
        with self.assertRaises(ShapeMismatchError):
            encode_targets(ModelKind.LR_MULTICLASS, np.array([0, 3]), 3)


if __name__ == "__main__":
    unittest.main()
