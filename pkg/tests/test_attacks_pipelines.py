# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""End-to-end attacks compiled into scripts."""

import unittest

import numpy as np

from abb.sites import ANY_STEP
from activations import DIRECT_BITDECOMP, ActivationSettings
from attacks import (
    AdversaryKnowledge, fairness_attack, mi_scaling, neuron_override, no_attack, parameter_transfer,
    poison_amplification, reconstruction_attack)
from attacks.pipelines import AVAILABILITY, BACKDOOR, SCALING, TARGETED, ZEROING, goal_data
from models.gradients import NN_GRAD_W0, NN_GRAD_W1, encode_targets
from models.model_params import ModelKind, ModelParams
from models.reference import plaintext_gradients, reference_train
from models.script_context import ScriptContext
from models.train_config import SEQUENTIAL, TrainConfig
from models.trainer import sgd_train
from tools.exceptions import PreconditionError, UnsupportedIntentError

BITDECOMP = ActivationSettings(variant=DIRECT_BITDECOMP)


def knowledge_for(n_features=4, n_classes=2, seed=0, **extra):
    rng = np.random.default_rng(seed)
    features = rng.uniform(size=(20, n_features))
    labels = rng.integers(0, n_classes, size=20)
    return AdversaryKnowledge(own_features=features, own_labels=labels, **extra)


def context_for(kind, n_features=4, n_classes=1, hidden_units=0, n_examples=12, **config):
    config.setdefault("batch_size", 4)
    config.setdefault("epochs", 2)
    params = ModelParams.initialize(kind, n_features, n_classes, hidden_units)
    return ScriptContext.for_run(params, TrainConfig(**config), n_examples)


class TestAdversaryKnowledge(unittest.TestCase):
    def test_defaults(self):
        knowledge = knowledge_for(trigger_feature=2, trigger_value=0.5)
        np.testing.assert_allclose(knowledge.data_mean, knowledge.own_features.mean(axis=0))
        np.testing.assert_array_equal(knowledge.trigger, [0.0, 0.0, 0.5, 0.0])
        norm = float(knowledge.data_mean @ knowledge.data_mean)
        self.assertAlmostEqual(knowledge.resolved_mean_scaling(), 0.5 / norm)
        self.assertEqual(knowledge_for(mean_scaling=0.0).resolved_mean_scaling(), 0.0)

    def test_invalid(self):
        with self.assertRaises(PreconditionError):
            knowledge_for(trigger_feature=4)
        with self.assertRaises(PreconditionError):
            AdversaryKnowledge(own_features=np.zeros((3, 2)), own_labels=np.zeros(2))
        with self.assertRaises(PreconditionError):
            knowledge_for(poison_indices=[1, 2], poison_labels=[0])

    def test_goal_data(self):
        knowledge = knowledge_for(target_class=1, trigger_feature=0, trigger_value=3.0)
        features, labels = goal_data(knowledge, BACKDOOR, 2)
        self.assertEqual(len(features), int(np.sum(knowledge.own_labels == 0)))
        np.testing.assert_array_equal(features[:, 0], 3.0)
        np.testing.assert_array_equal(labels, 1)
        _, labels = goal_data(knowledge, AVAILABILITY, 2)
        np.testing.assert_array_equal(labels, 1 - knowledge.own_labels)
        with self.assertRaises(PreconditionError):
            goal_data(knowledge, TARGETED, 2)
        with self.assertRaises(PreconditionError):
            goal_data(knowledge, "sabotage", 2)


class TestParameterTransfer(unittest.TestCase):
    def test_shift_is_the_scaled_goal_gradient(self):
        knowledge = knowledge_for(target_class=1, trigger_feature=3, trigger_value=2.0)
        config = TrainConfig(learning_rate=0.5, batch_size=4, epochs=2, activation=BITDECOMP)
        context = context_for(ModelKind.LR_BINARY, learning_rate=0.5, activation=BITDECOMP)
        script = parameter_transfer(context, knowledge, BACKDOOR, config, shift_scale=2.0)

        reference = reference_train(ModelParams.initialize(ModelKind.LR_BINARY, 4, 1), knowledge.own_features,
                                    knowledge.own_labels, config)
        features, labels = goal_data(knowledge, BACKDOOR, 2)
        gradient = plaintext_gradients(reference, features, encode_targets(ModelKind.LR_BINARY, labels, 1),
                                       config.activation)["w"] / len(features)
        epsilon, mask = script.error_block(0, "lr.grad_w", (4, 4))
        np.testing.assert_allclose(epsilon[0], 4 * 2.0 * gradient, rtol=1e-12)
        self.assertFalse(np.any(mask[1:]))
        self.assertEqual(script.intent, "parameter_transfer")
        self.assertEqual(script.parameters["goal"], BACKDOOR)
        self.assertEqual(script.addressed_labels()["error"], {(ANY_STEP, "lr.grad_w")})

    def test_targeted_goal_on_multiclass(self):
        knowledge = knowledge_for(n_classes=3, goal_features=np.ones((2, 4)), goal_labels=np.array([2, 2]))
        config = TrainConfig(learning_rate=0.5, batch_size=4, epochs=1, activation=BITDECOMP)
        context = context_for(ModelKind.LR_MULTICLASS, n_classes=3, learning_rate=0.5, epochs=1,
                              activation=BITDECOMP)
        script = parameter_transfer(context, knowledge, TARGETED, config)
        epsilon, _ = script.error_block(3, "lr.grad_w", (4, 4, 3))
        # P - Y is negative in the goal class column and the goal inputs are positive
        self.assertTrue(np.all(epsilon[0][:, 2] < 0.0))

    def test_unsupported_models(self):
        knowledge = knowledge_for()
        for kind, n_classes, hidden in ((ModelKind.NN, 2, 3), (ModelKind.SVM, 1, 0)):
            with self.assertRaises(UnsupportedIntentError):
                parameter_transfer(context_for(kind, n_classes=n_classes, hidden_units=hidden), knowledge,
                                   BACKDOOR, TrainConfig())


class TestNeuronOverride(unittest.TestCase):
    def test_shifts(self):
        knowledge = knowledge_for(target_class=1, trigger_feature=1, trigger_value=1.0, mean_scaling=0.0)
        context = context_for(ModelKind.NN, n_classes=2, hidden_units=3, learning_rate=0.4)
        script = neuron_override(context, knowledge, neuron_index=2, second_layer_boost=6.0, first_layer_scale=3.0)
        run_step_size = 0.1 * context.total_steps
        w1_shift = script.error_block(0, NN_GRAD_W1, (4, 2, 3))[0][0]
        expected = np.zeros((2, 3))
        expected[1, 2] = -6.0 / run_step_size
        np.testing.assert_allclose(w1_shift, expected, rtol=1e-12)
        w0_shift = script.error_block(0, NN_GRAD_W0, (4, 3, 4))[0][0]
        np.testing.assert_allclose(w0_shift[2], [0.0, -3.0 / run_step_size, 0.0, 0.0], rtol=1e-12)
        self.assertFalse(np.any(w0_shift[:2]))

    def test_override_moves_the_neuron_weights(self):
        rng = np.random.default_rng(3)
        features, labels = rng.uniform(size=(12, 4)), rng.integers(0, 2, size=12)
        initial = ModelParams.initialize(ModelKind.NN, 4, 2, 3, seed=1)
        config = TrainConfig(learning_rate=0.04, batch_size=4, epochs=2, activation=BITDECOMP)
        knowledge = knowledge_for(target_class=1, trigger_feature=1, mean_scaling=0.0)
        script = neuron_override(ScriptContext.for_run(initial, config, len(features)), knowledge, neuron_index=0,
                                 second_layer_boost=6.0, first_layer_scale=3.0)
        honest = sgd_train(initial, features, labels, config).params
        attacked = sgd_train(initial, features, labels, config, script).params
        self.assertGreater(attacked["w1"][1, 0] - honest["w1"][1, 0], 5.0)
        self.assertGreater(attacked["w0"][0, 1] - honest["w0"][0, 1], 2.5)

    def test_zero_parameters_give_an_empty_script(self):
        knowledge = knowledge_for(trigger_value=0.0, mean_scaling=0.0)
        context = context_for(ModelKind.NN, n_classes=2, hidden_units=3)
        self.assertTrue(neuron_override(context, knowledge, 0, second_layer_boost=0.0,
                                        first_layer_scale=0.0).is_empty())

    def test_preconditions(self):
        knowledge = knowledge_for()
        with self.assertRaises(PreconditionError):
            neuron_override(context_for(ModelKind.NN, n_classes=2, hidden_units=3), knowledge, neuron_index=3)
        with self.assertRaises(UnsupportedIntentError):
            neuron_override(context_for(ModelKind.LR_BINARY), knowledge)


class TestMembershipAndReconstruction(unittest.TestCase):
    def test_mi_scaling_every_epoch(self):
        context = context_for(ModelKind.LR_BINARY, order=SEQUENTIAL, activation=BITDECOMP, epochs=3)
        script = mi_scaling(context, target_class=1, strength=2.0, target_examples=[5])
        self.assertEqual(script.addressed_labels()["activation"], {(1, "lr.sigmoid"), (4, "lr.sigmoid"),
                                                                   (7, "lr.sigmoid")})
        np.testing.assert_array_equal(script.activation_attack(4, "lr.sigmoid").output_offset, [0.0, -2.0, 0.0, 0.0])
        self.assertEqual(script.intent, "mi_scaling")

    def test_mi_scaling_by_slot(self):
        context = context_for(ModelKind.LR_BINARY, activation=BITDECOMP)
        script = mi_scaling(context, target_class=0, strength=2.0, slots=[3])
        self.assertEqual(len(script.addressed_labels()["activation"]), context.total_steps)
        with self.assertRaises(PreconditionError):
            mi_scaling(context, 0, 2.0, target_examples=[1])
        with self.assertRaises(PreconditionError):
            mi_scaling(context, 0, 2.0)

    def test_reconstruction_targets_last_step(self):
        context = context_for(ModelKind.LR_MULTICLASS, n_classes=3, activation=BITDECOMP)
        script = reconstruction_attack(context, slot=2, strength=1.0e4, target_class=1)
        self.assertEqual(script.addressed_labels()["activation"], {(context.last_step, "lr.softmax")})
        offset = script.activation_attack(context.last_step, "lr.softmax").output_offset
        self.assertEqual(offset[2, 1], 1.0e4)
        self.assertEqual(np.count_nonzero(offset), 1)
        self.assertEqual(script.parameters["slot"], 2)


class TestFairnessAndPoisoning(unittest.TestCase):
    def test_empty_party_gives_empty_script(self):
        context = context_for(ModelKind.LR_BINARY, order=SEQUENTIAL)
        self.assertTrue(fairness_attack(context, [], ZEROING).is_empty())
        self.assertTrue(fairness_attack(context, [], SCALING).is_empty())

    def test_zeroing_needs_a_zeroable_model(self):
        with self.assertRaises(UnsupportedIntentError):
            fairness_attack(context_for(ModelKind.LR_BINARY, order=SEQUENTIAL), [0, 1], ZEROING)
        with self.assertRaises(PreconditionError):
            fairness_attack(context_for(ModelKind.SVM, order=SEQUENTIAL), [0], "erase")

    def test_zeroing_the_party_on_svm(self):
        context = context_for(ModelKind.SVM, order=SEQUENTIAL)
        script = fairness_attack(context, [0, 6], ZEROING)
        # two examples in each of two epochs
        self.assertEqual(script.planned_count(context.total_steps), 4)
        self.assertEqual(script.parameters["mode"], ZEROING)

    def test_scaling_the_party(self):
        context = context_for(ModelKind.LR_BINARY, order=SEQUENTIAL, activation=BITDECOMP)
        script = fairness_attack(context, [1], SCALING, strength=2.0, target_class=0)
        self.assertEqual(script.addressed_labels()["activation"], {(0, "lr.sigmoid"), (3, "lr.sigmoid")})
        # toward class 0 raises the sigmoid output
        np.testing.assert_array_equal(script.activation_attack(3, "lr.sigmoid").output_offset, [0.0, 2.0, 0.0, 0.0])

    def test_poison_amplification(self):
        context = context_for(ModelKind.LR_MULTICLASS, n_classes=3, order=SEQUENTIAL, activation=BITDECOMP)
        script = poison_amplification(context, [0, 1], [2, 1], strength=3.0)
        offset = script.activation_attack(0, "lr.softmax").output_offset
        np.testing.assert_array_equal(offset[:2], [[0.0, 0.0, -3.0], [0.0, -3.0, 0.0]])
        self.assertFalse(np.any(offset[2:]))
        self.assertEqual(script.intent, "poison_amplification")
        self.assertTrue(poison_amplification(context, [0, 1], [2, 1], strength=0.0).is_empty())
        with self.assertRaises(PreconditionError):
            poison_amplification(context, [0, 1], [2])

    def test_no_attack(self):
        script = no_attack()
        self.assertTrue(script.is_empty())
        self.assertEqual(script.intent, "none")
        self.assertEqual(script.audit_lines(), ["intent none"])


if __name__ == "__main__":
    unittest.main()
