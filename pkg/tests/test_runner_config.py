# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Validation, overrides and hashing of experiment configurations."""

import pickle
import unittest
from pathlib import Path

from abb.backends import FIXED_BACKEND
from runner.experiment_config import ExperimentConfig, sweep_values
from tools.exceptions import ConfigValueError, PreconditionError, TrialError

CONFIGURATIONS = Path(__file__).resolve().parent.parent / "configurations"


class TestExperimentConfig(unittest.TestCase):
    def test_defaults(self):
        config = ExperimentConfig()
        self.assertEqual(config.experiment.trials, 1)
        self.assertEqual(config.attack.intent, "none")
        self.assertEqual(config.training.order, "shuffled")
        self.assertFalse(config.uses_membership)
        self.assertEqual(config.party_count, 0)
        train_config = config.train_config(seed=7)
        self.assertEqual(train_config.seed, 7)
        self.assertEqual(train_config.activation.variant, "piecewise")

    def test_invalid_values(self):
        cases = [
            ({"Foo": {}}, "Unknown section Foo"),
            ({"Experiment": {"Bogus": 1}}, "Unknown attribute Experiment.Bogus"),
            ({"Training": {"Epochs": 0}}, "Invalid value for Training.Epochs: 0"),
            ({"Training": {"Epochs": True}}, "Training.Epochs"),
            ({"Backend": {"Name": "gpu"}}, "Backend.Name"),
            ({"Model": {"Kind": "tree"}}, "Model.Kind"),
            ({"Attack": {"Intent": "steal"}}, "Attack.Intent"),
            ({"Split": {"Parties": ["a", "a"]}}, "Split.Parties"),
            ({"Evaluation": {"FalsePositiveRate": 1.0}}, "Evaluation.FalsePositiveRate"),
            ({"Experiment": []}, "must be a mapping"),
        ]
        for values, message in cases:
            with self.subTest(values=values):
                with self.assertRaisesRegex(ConfigValueError, message):
                    ExperimentConfig(values)

    def test_constraints_between_sections(self):
        cases = [
            ({"Attack": {"Intent": "mi-scaling"}}, "needs Training.Order"),
            ({"Attack": {"Intent": "fairness"}, "Training": {"Order": "sequential"}}, "Split.Parties"),
            ({"Split": {"Parties": 3}}, "Split.PartyRows"),
            ({"Dataset": {"Source": "csv"}}, "Dataset.Path"),
            ({"Dataset": {"Source": "idx", "Path": "images.idx"}}, "Dataset.LabelsPath"),
            ({"Evaluation": {"Membership": True, "Shadows": 3}}, "Evaluation.Shadows"),
            ({"Evaluation": {"SweepAttribute": "Attack.Nope"}}, "Unknown sweep attribute"),
            ({"Backend": {"Name": FIXED_BACKEND, "FracBits": 40}}, "fixed-point"),
        ]
        for values, message in cases:
            with self.subTest(values=values):
                with self.assertRaisesRegex(ConfigValueError, message):
                    ExperimentConfig(values)

    def test_zero_shadows_pass_validation(self):
        config = ExperimentConfig({"Evaluation": {"Membership": True, "Shadows": 0}})
        self.assertTrue(config.uses_membership)

    def test_with_value(self):
        config = ExperimentConfig({"Experiment": {"Seed": 3}})
        changed = config.with_value("Experiment.Seed", 9)
        self.assertEqual(changed.experiment.seed, 9)
        self.assertEqual(config.experiment.seed, 3)
        with self.assertRaisesRegex(ConfigValueError, "Unknown attribute"):
            config.with_value("Experiment.Colour", 1)
        with self.assertRaises(ConfigValueError):
            config.with_value("Experiment.Trials", 0)

    def test_hash_and_yaml(self):
        config = ExperimentConfig({"Training": {"LearningRate": 0.25}, "Split": {"Parties": ["a", "b"],
                                                                                 "PartyRows": 10}})
        self.assertEqual(config.config_hash(), ExperimentConfig(config.to_dict()).config_hash())
        self.assertEqual(len(config.config_hash()), 64)
        self.assertNotEqual(config.config_hash(), config.with_value("Experiment.Seed", 1).config_hash())
        self.assertEqual(ExperimentConfig.from_yaml(config.to_yaml()), config)
        self.assertEqual(config.party_count, 2)

    def test_malformed_yaml(self):
        with self.assertRaisesRegex(ConfigValueError, "Malformed"):
            ExperimentConfig.from_yaml("Experiment: [unclosed")
        with self.assertRaisesRegex(ConfigValueError, "mapping"):
            ExperimentConfig.from_yaml("- just\n- a list\n")
        with self.assertRaisesRegex(ConfigValueError, "Cannot read"):
            ExperimentConfig.from_file(CONFIGURATIONS / "missing.yml")

    def test_shipped_configurations_load(self):
        paths = sorted(CONFIGURATIONS.glob("*.yml"))
        self.assertTrue(paths)
        for path in paths:
            with self.subTest(path=path.name):
                ExperimentConfig.from_file(path)

    def test_sweep_values(self):
        config = ExperimentConfig({"Evaluation": {"SweepAttribute": "Attack.Strength", "SweepValues": [1, 2]}})
        self.assertEqual(sweep_values(config), [1, 2])
        with self.assertRaises(ConfigValueError):
            sweep_values(ExperimentConfig())

    def test_trial_error_pickles(self):
        error = pickle.loads(pickle.dumps(TrialError(2, "shadows", PreconditionError("none left"))))
        self.assertEqual((error.trial, error.phase), (2, "shadows"))
        self.assertIn("trial 2 failed during shadows: PreconditionError: none left", str(error))


if __name__ == "__main__":
    unittest.main()
