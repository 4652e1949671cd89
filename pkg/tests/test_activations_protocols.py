# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Honest behaviour of the activation, exponentiation and reciprocal protocols."""

import unittest

import numpy as np
from scipy.special import expit, softmax

from abb.backends import FixedPointBackend, RealBackend
from abb.black_box import ArithmeticBlackBox
from activations import (
    DIRECT_BITDECOMP, DIRECT_LIMIT, ActivationSettings, drelu, exp_bitdecomp, exp_limit, reciprocal_goldschmidt,
    reciprocal_newton, relu, sigmoid, sigmoid_direct, sigmoid_piecewise, softmax_direct)
from activations.activation_settings import GOLDSCHMIDT, bitdecomp_cap, bitdecomp_threshold
from tools.exceptions import ConfigValueError, PreconditionError

BACKENDS = (RealBackend, FixedPointBackend)


def fresh_box(backend_class=RealBackend):
    return ArithmeticBlackBox(backend_class())


class TestComparisonActivations(unittest.TestCase):
    def test_relu(self):
        for backend_class in BACKENDS:
            with self.subTest(backend=backend_class.name):
                box = fresh_box(backend_class)
                output = relu(box, box.input([-2.0, -0.5, 0.0, 0.75, 3.0]), "relu")
                np.testing.assert_array_equal(box.open(output), [0.0, 0.0, 0.0, 0.75, 3.0])

    def test_drelu(self):
        for backend_class in BACKENDS:
            with self.subTest(backend=backend_class.name):
                box = fresh_box(backend_class)
                output = drelu(box, box.input([-2.0, 0.0, 0.75]), "drelu")
                np.testing.assert_array_equal(box.open(output), [0.0, 0.0, 1.0])


class TestSigmoid(unittest.TestCase):
    def test_piecewise_sigmoid(self):
        values = np.array([-3.0, -0.5, -0.25, 0.0, 0.25, 0.5, 3.0])
        for backend_class in BACKENDS:
            with self.subTest(backend=backend_class.name):
                box = fresh_box(backend_class)
                output = sigmoid_piecewise(box, box.input(values), "sigmoid")
                np.testing.assert_array_equal(box.open(output), np.clip(values + 0.5, 0.0, 1.0))

    def test_direct_sigmoid_with_limit_exponentiation(self):
        values = np.linspace(-8.0, 8.0, 65)
        box = fresh_box()
        output = sigmoid_direct(box, box.input(values), "sigmoid", settings=ActivationSettings(variant=DIRECT_LIMIT))
        np.testing.assert_allclose(box.open(output), expit(values), rtol=0.0, atol=2e-3)

    def test_direct_sigmoid_with_bitdecomp_exponentiation(self):
        # the reciprocal of 1 + exp(x) loses relative precision on the fixed-point grid for large x
        for backend_class, values, tolerance in ((RealBackend, np.linspace(-8.0, 8.0, 65), 1e-9),
                                                 (FixedPointBackend, np.linspace(-2.0, 2.0, 17), 2e-3)):
            with self.subTest(backend=backend_class.name):
                box = fresh_box(backend_class)
                settings = ActivationSettings(variant=DIRECT_BITDECOMP)
                output = sigmoid_direct(box, box.input(values), "sigmoid", settings=settings)
                np.testing.assert_allclose(box.open(output), expit(values), rtol=0.0, atol=tolerance)

    def test_sigmoid_dispatches_on_variant(self):
        box = fresh_box()
        piecewise = box.open(sigmoid(box, box.input([0.25]), "piecewise"))
        direct = box.open(sigmoid(box, box.input([0.25]), "direct", settings=ActivationSettings(DIRECT_BITDECOMP)))
        self.assertEqual(piecewise[0], 0.75)
        self.assertAlmostEqual(direct[0], float(expit(0.25)), places=9)

    def test_softmax(self):
        values = np.array([[0.5, -1.0, 2.0], [0.0, 0.0, 0.0]])
        for variant, tolerance in ((DIRECT_BITDECOMP, 1e-9), (DIRECT_LIMIT, 3e-3)):
            with self.subTest(variant=variant):
                box = fresh_box()
                output = softmax_direct(box, box.input(values), "softmax", settings=ActivationSettings(variant))
                np.testing.assert_allclose(box.open(output), softmax(values, axis=1), rtol=0.0, atol=tolerance)

    def test_softmax_needs_two_classes(self):
        box = fresh_box()
        with self.assertRaises(PreconditionError):
            softmax_direct(box, box.input([[1.0]]), "softmax")


class TestExponentiation(unittest.TestCase):
    def test_limit_matches_closed_form(self):
        values = np.linspace(-4.0, 4.0, 33)
        box = fresh_box()
        output = exp_limit(box, box.input(values), "exp", n=8)
        np.testing.assert_allclose(box.open(output), (1.0 + values / 256.0) ** 256, rtol=1e-12)

    def test_limit_on_fixed_point(self):
        values = np.array([-2.0, 0.0, 1.0, 2.0])
        box = fresh_box(FixedPointBackend)
        output = exp_limit(box, box.input(values), "exp", n=8)
        np.testing.assert_allclose(box.open(output), (1.0 + values / 256.0) ** 256, rtol=1e-2, atol=1e-3)

    def test_limit_squaring_sites(self):
        box = fresh_box()
        exp_limit(box, box.input([1.0]), "exp", n=3)
        labels = [label for label, _, _ in box.iter_sites()]
        self.assertEqual(labels, ["exp.clamp", "exp.clamp.mult", "exp.sq0", "exp.sq1", "exp.sq2"])

    def test_limit_is_zero_below_the_clamp(self):
        values = np.array([-256.0, -300.0, -1.0e3, -5.0e3])
        for backend_class in BACKENDS:
            with self.subTest(backend=backend_class.name):
                box = fresh_box(backend_class)
                output = exp_limit(box, box.input(values), "exp", n=8)
                np.testing.assert_array_equal(box.open(output), np.zeros(4))

    def test_bitdecomp_honest(self):
        box = fresh_box()
        output = exp_bitdecomp(box, box.input([-1.0, 0.0, 2.0]), "exp")
        np.testing.assert_allclose(box.open(output), np.exp([-1.0, 0.0, 2.0]), rtol=1e-12)

    def test_bitdecomp_below_threshold_is_zero(self):
        box = fresh_box()
        threshold = bitdecomp_threshold(box.backend)
        self.assertEqual(threshold, -14.0)
        output = exp_bitdecomp(box, box.input([threshold - 1.0]), "exp")
        np.testing.assert_array_equal(box.open(output), [0.0])

    def test_bitdecomp_cap(self):
        self.assertEqual(bitdecomp_cap(RealBackend()), 700.0)
        self.assertAlmostEqual(bitdecomp_cap(FixedPointBackend()), 13 * np.log(2.0))


class TestReciprocal(unittest.TestCase):
    def test_newton(self):
        for backend_class, tolerance in ((RealBackend, 1e-12), (FixedPointBackend, 1e-3)):
            with self.subTest(backend=backend_class.name):
                box = fresh_box(backend_class)
                output = reciprocal_newton(box, box.input([4.0, 0.3, 7.5]), "recip")
                np.testing.assert_allclose(box.open(output), [0.25, 1.0 / 0.3, 1.0 / 7.5], rtol=tolerance)

    def test_goldschmidt(self):
        for backend_class, tolerance in ((RealBackend, 1e-12), (FixedPointBackend, 1e-3)):
            with self.subTest(backend=backend_class.name):
                box = fresh_box(backend_class)
                output = reciprocal_goldschmidt(box, box.input([2.0, 5.0]), "recip")
                np.testing.assert_allclose(box.open(output), [0.5, 0.2], rtol=tolerance)

    def test_large_inputs_are_normalized(self):
        box = fresh_box()
        output = reciprocal_newton(box, box.input([1.0e6]), "recip")
        np.testing.assert_allclose(box.open(output), [1.0e-6], rtol=1e-12)

    def test_non_positive_input(self):
        box = fresh_box()
        with self.assertRaises(PreconditionError):
            reciprocal_newton(box, box.input([0.0]), "recip")

    def test_iteration_count(self):
        box = fresh_box()
        with self.assertRaises(PreconditionError):
            reciprocal_newton(box, box.input([2.0]), "recip", iterations=0)
        with self.assertRaises(PreconditionError):
            reciprocal_newton(box, box.input([2.0]), "recip", iterations=2, per_iter_epsilons=[0.0, 0.0, 0.0])


class TestActivationSettings(unittest.TestCase):
    def test_defaults(self):
        settings = ActivationSettings()
        self.assertFalse(settings.is_direct)
        self.assertEqual(settings.exp_squarings, 8)

    def test_invalid_values(self):
        with self.assertRaises(ConfigValueError):
            ActivationSettings(variant="taylor")
        with self.assertRaises(ConfigValueError):
            ActivationSettings(reciprocal="division")
        with self.assertRaises(ConfigValueError):
            ActivationSettings(reciprocal=GOLDSCHMIDT, reciprocal_iterations=0)


if __name__ == "__main__":
    unittest.main()
