# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Tests for the arithmetic black box on both backends."""

import unittest

import numpy as np

from abb.backends import FixedPointBackend, RealBackend, make_backend
from abb.black_box import ArithmeticBlackBox
from abb.sites import SiteKind
from attacks.attack_script import AttackScript
from tools.exceptions import (
    ConfigValueError, DirectiveError, FixedPointOverflowError, NonFiniteValueError, ProvenanceError,
    ShapeMismatchError)

BACKENDS = (RealBackend, FixedPointBackend)


class TestLinearOperations(unittest.TestCase):
    def test_lin_comb_examples(self):
        for backend_class in BACKENDS:
            with self.subTest(backend=backend_class.name):
                box = ArithmeticBlackBox(backend_class())
                a = box.input([3.0, -2.0])
                b = box.input([1.0, 4.0])
                np.testing.assert_array_equal(box.open(box.lin_comb(0.5, a, 0, b)), [1.5, -1.0])
                np.testing.assert_array_equal(box.open(box.lin_comb(2, a, -1, b)), [5.0, -8.0])
                np.testing.assert_array_equal(box.open(box.add_public(a, 1.0)), [4.0, -1.0])
                np.testing.assert_array_equal(box.open(box.rsub_public(1.0, a)), [-2.0, 3.0])

    def test_linear_operations_carry_no_error(self):
        script = AttackScript().add_errors(0, "p", np.array([1.0]))
        box = ArithmeticBlackBox(RealBackend(), script)
        box.lin_comb(1, box.input([1.0]), 1, box.input([2.0]))
        self.assertEqual(box.audit.total, 0)

    def test_shape_mismatch(self):
        box = ArithmeticBlackBox(RealBackend())
        with self.assertRaises(ShapeMismatchError):
            box.add(box.input(np.zeros(3)), box.input(np.zeros(2)))
        with self.assertRaises(ShapeMismatchError):
            box.matmul(box.input(np.zeros((2, 3))), box.input(np.zeros((2, 3))), "m")


class TestMultiplication(unittest.TestCase):
    def test_mult_with_additive_error(self):
        for backend_class in BACKENDS:
            with self.subTest(backend=backend_class.name):
                box = ArithmeticBlackBox(backend_class())
                product = box.mult(box.input([2.0]), box.input([3.0]), "p", epsilon=1.0)
                np.testing.assert_array_equal(box.open(product), [7.0])
                self.assertEqual(box.audit.error_count, 1)

    def test_error_is_exact_on_both_backends(self):
        for backend_class in BACKENDS:
            with self.subTest(backend=backend_class.name):
                box = ArithmeticBlackBox(backend_class())
                honest = box.open(box.mult(box.input([1.25, -3.5]), box.input([2.0, 0.75]), "honest"))
                attacked = box.open(
                    box.mult(box.input([1.25, -3.5]), box.input([2.0, 0.75]), "attacked", epsilon=[0.5, -0.25]))
                np.testing.assert_array_equal(attacked - honest, [0.5, -0.25])

    def test_fixed_point_truncation_matches_integer_oracle(self):
        box = ArithmeticBlackBox(FixedPointBackend())
        product = box.open(box.mult(box.input([0.1]), box.input([0.1]), "p"))
        self.assertEqual(product[0], (6554 * 6554 // 65536) / 65536)

    def test_script_errors_address_single_coordinates(self):
        script = AttackScript().add_errors(0, "p", np.array([0.0, 10.0, 0.0]))
        box = ArithmeticBlackBox(RealBackend(), script)
        product = box.mult(box.input([1.0, 2.0, 3.0]), box.input([1.0, 1.0, 1.0]), "p")
        np.testing.assert_array_equal(box.open(product), [1.0, 12.0, 3.0])
        self.assertEqual(box.audit.error_count, 1)

    def test_matmul_error_lands_on_output_scalars(self):
        box = ArithmeticBlackBox(RealBackend())
        x = box.input([[1.0, 2.0], [3.0, 4.0]])
        w = box.input([1.0, 1.0])
        np.testing.assert_array_equal(box.open(box.matmul(x, w, "m", epsilon=[0.0, -7.0])), [3.0, 0.0])

    def test_fixed_point_operand_overflow(self):
        box = ArithmeticBlackBox(FixedPointBackend())
        big = box.add(box.input([10000.0]), box.input([10000.0]))
        with self.assertRaises(FixedPointOverflowError):
            box.mult(big, box.input([1.0]), "p")

    def test_real_backend_rejects_non_finite_results(self):
        box = ArithmeticBlackBox(RealBackend())
        with self.assertRaises(NonFiniteValueError):
            box.mult(box.input([1e200]), box.input([1e200]), "p")

    def test_backends_agree_on_random_circuits(self):
        rng = np.random.default_rng(11)
        for circuit in range(20):
            a, b, c, d = (rng.uniform(-4.0, 4.0, size=5) for _ in range(4))
            results = []
            for backend_class in BACKENDS:
                box = ArithmeticBlackBox(backend_class())
                first = box.mult(box.input(a), box.input(b), "first")
                second = box.lin_comb(1, first, -0.5, box.input(c))
                third = box.mult(second, box.input(d), "third")
                bit = box.compare_ge(third, box.zeros(third.shape), "sign")
                results.append((box.open(third), box.open(bit)))
            with self.subTest(circuit=circuit):
                np.testing.assert_allclose(results[0][0], results[1][0], rtol=0.0, atol=1e-3)
                agree = np.abs(results[0][0]) > 1e-3
                np.testing.assert_array_equal(results[0][1][agree], results[1][1][agree])


class TestComparison(unittest.TestCase):
    def test_compare_ge(self):
        for backend_class in BACKENDS:
            with self.subTest(backend=backend_class.name):
                box = ArithmeticBlackBox(backend_class())
                bits = box.compare_ge(box.input([1.0, 1.0, -2.0]), box.input([0.0, 1.0, 2.0]), "c")
                np.testing.assert_array_equal(box.open(bits), [1.0, 1.0, 0.0])

    def test_flips_from_script_and_argument(self):
        script = AttackScript().add_flips(0, "c", np.array([True, False, False]))
        box = ArithmeticBlackBox(RealBackend(), script)
        bits = box.compare_ge(box.input([1.0, 1.0, -2.0]), box.input([0.0, 1.0, 2.0]), "c",
                              flip=[False, False, True])
        np.testing.assert_array_equal(box.open(bits), [0.0, 1.0, 1.0])
        self.assertEqual(box.audit.flip_count, 2)

    def test_comparison_output_has_comparison_provenance(self):
        box = ArithmeticBlackBox(RealBackend())
        bits = box.compare_ge(box.input([1.0]), box.input([0.0]), "c")
        self.assertEqual(box.audit.kind_of(bits.provenance), SiteKind.COMPARISON)


class TestSiteAddressing(unittest.TestCase):
    def test_duplicate_label_in_one_step(self):
        box = ArithmeticBlackBox(RealBackend())
        box.mult(box.input([1.0]), box.input([1.0]), "p")
        with self.assertRaises(DirectiveError):
            box.mult(box.input([1.0]), box.input([1.0]), "p")
        box.begin_step(1)
        box.mult(box.input([1.0]), box.input([1.0]), "p")

    def test_label_cannot_change_kind(self):
        box = ArithmeticBlackBox(RealBackend())
        box.mult(box.input([1.0]), box.input([1.0]), "site")
        box.begin_step(1)
        with self.assertRaises(DirectiveError):
            box.compare_ge(box.input([1.0]), box.input([1.0]), "site")

    def test_errors_follow_the_step(self):
        script = AttackScript().add_errors(1, "p", np.array([5.0]))
        box = ArithmeticBlackBox(RealBackend(), script)
        step0 = box.open(box.mult(box.input([1.0]), box.input([1.0]), "p"))
        box.begin_step(1)
        step1 = box.open(box.mult(box.input([1.0]), box.input([1.0]), "p"))
        np.testing.assert_array_equal(step0, [1.0])
        np.testing.assert_array_equal(step1, [6.0])

    def test_inject_needs_multiplication_provenance(self):
        box = ArithmeticBlackBox(RealBackend())
        x = box.input([1.0])
        with self.assertRaises(ProvenanceError):
            box.inject(x, [2.0])
        self.assertIs(box.inject(x, None), x)
        product = box.mult(x, box.input([3.0]), "p")
        np.testing.assert_array_equal(box.open(box.inject(product, [2.0])), [5.0])
        self.assertEqual(box.audit.error_count, 1)

    def test_verify_script_rejects_unknown_sites(self):
        box = ArithmeticBlackBox(RealBackend(), AttackScript().add_errors(0, "missing", np.array([1.0])))
        box.mult(box.input([1.0]), box.input([1.0]), "p")
        with self.assertRaises(DirectiveError):
            box.verify_script()

    def test_verify_script_rejects_wrong_site_kind(self):
        box = ArithmeticBlackBox(RealBackend(), AttackScript().add_flips(0, "p", np.array([True])))
        box.mult(box.input([1.0]), box.input([1.0]), "p")
        with self.assertRaises(DirectiveError):
            box.verify_script()

    def test_verify_script_accepts_consumed_directives(self):
        box = ArithmeticBlackBox(RealBackend(), AttackScript().add_errors(0, "p", np.array([1.0])))
        box.mult(box.input([1.0]), box.input([1.0]), "p")
        box.verify_script()

    def test_open_is_counted(self):
        box = ArithmeticBlackBox(RealBackend())
        box.open(box.input([1.0]))
        self.assertEqual(box.open_count, 1)

    def test_unknown_backend(self):
        with self.assertRaises(ConfigValueError):
            make_backend("quantum")


if __name__ == "__main__":
    unittest.main()
