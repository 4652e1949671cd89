# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Experiment configuration read from a YAML file with CamelCase keys."""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path
from typing import Any, ClassVar, Dict, List, Optional, Union

import yaml

from abb.backends import FIXED_BACKEND, REAL_BACKEND
from abb.fixed_point import (
    DEFAULT_FRAC_BITS, DEFAULT_MODULUS_BITS, DEFAULT_TOTAL_VALUE_BITS, FixedPointParams)
from activations.activation_settings import (
    ACTIVATION_VARIANTS, DEFAULT_EXP_SQUARINGS, DEFAULT_RECIPROCAL_ITERATIONS, NEWTON, PIECEWISE, RECIPROCAL_METHODS,
    ActivationSettings)
from attacks.pipelines import BACKDOOR, FAIRNESS_MODES, SCALING, TRANSFER_GOALS
from data.dataset import SplitSpec
from evaluation.membership import MIN_SHADOWS
from models.model_params import ModelKind
from models.train_config import (
    DEFAULT_BATCH_SIZE, DEFAULT_EPOCHS, DEFAULT_LEARNING_RATE, ORDER_POLICIES, SEQUENTIAL, SHUFFLED, TrainConfig)
from tools.exceptions import ConfigValueError

NO_ATTACK = "none"
PARAMETER_TRANSFER = "parameter-transfer"
NEURON_OVERRIDE = "neuron-override"
MI_SCALING = "mi-scaling"
RECONSTRUCTION = "reconstruction"
FAIRNESS = "fairness"
POISON_AMPLIFICATION = "poison-amplification"
ATTACK_INTENTS = (NO_ATTACK, PARAMETER_TRANSFER, NEURON_OVERRIDE, MI_SCALING, RECONSTRUCTION, FAIRNESS,
                  POISON_AMPLIFICATION)
# these intents address training examples by their position in the stream
ORDER_AWARE_INTENTS = (MI_SCALING, FAIRNESS, POISON_AMPLIFICATION)

SYNTHETIC_CLASSIFICATION = "synthetic-classification"
SYNTHETIC_IMAGES = "synthetic-images"
SYNTHETIC_CENSUS = "synthetic-census"
CSV_SOURCE = "csv"
IDX_SOURCE = "idx"
DATASET_SOURCES = (SYNTHETIC_CLASSIFICATION, SYNTHETIC_IMAGES, SYNTHETIC_CENSUS, CSV_SOURCE, IDX_SOURCE)

ConfigValues = Dict[str, Any]


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _is_optional_str(value: Any) -> bool:
    return value is None or isinstance(value, str)


class ConfigSection:
    """One section of the experiment file.

    ATTRIBUTES maps the file's attribute names to property names and DEFAULTS gives the value of
    every property whose attribute is missing. Each property is validated by the class method
    _check_<property>, which returns whether the value is acceptable.
    """
    SECTION_NAME: ClassVar[str] = ""
    ATTRIBUTES: ClassVar[Dict[str, str]] = {}
    DEFAULTS: ClassVar[Dict[str, Any]] = {}

    def __init__(self, values: Optional[ConfigValues] = None):
        values = {} if values is None else values
        if not isinstance(values, dict):
            raise ConfigValueError(f"Section {self.SECTION_NAME} must be a mapping, got {type(values).__name__}")
        unknown = sorted(set(values) - set(self.ATTRIBUTES))
        if unknown:
            raise ConfigValueError(f"Unknown attribute {self.SECTION_NAME}.{unknown[0]}")
        for attribute_name, property_name in self.ATTRIBUTES.items():
            self.set_value(property_name, values.get(attribute_name, copy.deepcopy(self.DEFAULTS[property_name])))

    def set_value(self, property_name: str, value: Any) -> None:
        checker = getattr(self, f"_check_{property_name}")
        if not checker(value):
            attribute_name = next(name for name, prop in self.ATTRIBUTES.items() if prop == property_name)
            raise ConfigValueError(f"Invalid value for {self.SECTION_NAME}.{attribute_name}: {value!r}")
        setattr(self, property_name, value)

    def to_dict(self) -> ConfigValues:
        return {attribute_name: getattr(self, property_name)
                for attribute_name, property_name in self.ATTRIBUTES.items()}

    def __eq__(self, other: Any) -> bool:
        return type(self) is type(other) and self.to_dict() == other.to_dict()


class ExperimentSection(ConfigSection):
    SECTION_NAME = "Experiment"
    ATTRIBUTES = {
        "Name": "name",
        "Description": "description",
        "Seed": "seed",
        "Trials": "trials",
        "OutputDirectory": "output_directory",
        "Workers": "workers",
    }
    DEFAULTS = {"name": "experiment", "description": "", "seed": 0, "trials": 1, "output_directory": "results",
                "workers": 1}

    @classmethod
    def _check_name(cls, name: Any) -> bool:
        return isinstance(name, str) and bool(name.strip())

    @classmethod
    def _check_description(cls, description: Any) -> bool:
        return isinstance(description, str)

    @classmethod
    def _check_seed(cls, seed: Any) -> bool:
        return _is_int(seed) and seed >= 0

    @classmethod
    def _check_trials(cls, trials: Any) -> bool:
        return _is_int(trials) and trials >= 1

    @classmethod
    def _check_output_directory(cls, output_directory: Any) -> bool:
        return isinstance(output_directory, str) and bool(output_directory)

    @classmethod
    def _check_workers(cls, workers: Any) -> bool:
        return _is_int(workers) and workers >= 1


class BackendSection(ConfigSection):
    SECTION_NAME = "Backend"
    ATTRIBUTES = {
        "Name": "name",
        "ModulusBits": "modulus_bits",
        "FracBits": "frac_bits",
        "TotalValueBits": "total_value_bits",
    }
    DEFAULTS = {"name": REAL_BACKEND, "modulus_bits": DEFAULT_MODULUS_BITS, "frac_bits": DEFAULT_FRAC_BITS,
                "total_value_bits": DEFAULT_TOTAL_VALUE_BITS}

    @classmethod
    def _check_name(cls, name: Any) -> bool:
        return name in (REAL_BACKEND, FIXED_BACKEND)

    @classmethod
    def _check_modulus_bits(cls, modulus_bits: Any) -> bool:
        return _is_int(modulus_bits) and modulus_bits > 0

    @classmethod
    def _check_frac_bits(cls, frac_bits: Any) -> bool:
        return _is_int(frac_bits) and frac_bits > 0

    @classmethod
    def _check_total_value_bits(cls, total_value_bits: Any) -> bool:
        return _is_int(total_value_bits) and total_value_bits > 0

    def fixed_point(self) -> FixedPointParams:
        try:
            return FixedPointParams(self.modulus_bits, self.frac_bits, self.total_value_bits)
        except ValueError as error:
            raise ConfigValueError(f"Invalid fixed-point parameters: {error}") from error


class DatasetSection(ConfigSection):
    SECTION_NAME = "Dataset"
    ATTRIBUTES = {
        "Source": "source",
        "Rows": "rows",
        "Features": "features",
        "Classes": "classes",
        "ClassSeparation": "class_separation",
        "Noise": "noise",
        "States": "states",
        "StateShift": "state_shift",
        "Path": "path",
        "LabelsPath": "labels_path",
        "LabelColumn": "label_column",
        "GroupColumn": "group_column",
        "Seed": "seed",
    }
    DEFAULTS = {"source": SYNTHETIC_CLASSIFICATION, "rows": 6000, "features": 20, "classes": 2,
                "class_separation": 2.0, "noise": 0.15, "states": 5, "state_shift": 1.0, "path": None,
                "labels_path": None, "label_column": "label", "group_column": None, "seed": 0}

    @classmethod
    def _check_source(cls, source: Any) -> bool:
        return source in DATASET_SOURCES

    @classmethod
    def _check_rows(cls, rows: Any) -> bool:
        return _is_int(rows) and rows >= 1

    @classmethod
    def _check_features(cls, features: Any) -> bool:
        return _is_int(features) and features >= 1

    @classmethod
    def _check_classes(cls, classes: Any) -> bool:
        return _is_int(classes) and classes >= 2

    @classmethod
    def _check_class_separation(cls, class_separation: Any) -> bool:
        return _is_number(class_separation) and class_separation >= 0

    @classmethod
    def _check_noise(cls, noise: Any) -> bool:
        return _is_number(noise) and noise >= 0

    @classmethod
    def _check_states(cls, states: Any) -> bool:
        return _is_int(states) and states >= 1

    @classmethod
    def _check_state_shift(cls, state_shift: Any) -> bool:
        return _is_number(state_shift) and state_shift >= 0

    @classmethod
    def _check_path(cls, path: Any) -> bool:
        return _is_optional_str(path)

    @classmethod
    def _check_labels_path(cls, labels_path: Any) -> bool:
        return _is_optional_str(labels_path)

    @classmethod
    def _check_label_column(cls, label_column: Any) -> bool:
        return isinstance(label_column, str) and bool(label_column)

    @classmethod
    def _check_group_column(cls, group_column: Any) -> bool:
        return _is_optional_str(group_column)

    @classmethod
    def _check_seed(cls, seed: Any) -> bool:
        return _is_int(seed) and seed >= 0


class SplitSection(ConfigSection):
    SECTION_NAME = "Split"
    ATTRIBUTES = {
        "CleanRows": "clean_rows",
        "AdversaryRows": "adversary_rows",
        "TestRows": "test_rows",
        "Parties": "parties",
        "PartyRows": "party_rows",
    }
    DEFAULTS = {"clean_rows": 5000, "adversary_rows": 500, "test_rows": 500, "parties": None, "party_rows": 0}

    @classmethod
    def _check_clean_rows(cls, clean_rows: Any) -> bool:
        return _is_int(clean_rows) and clean_rows >= 1

    @classmethod
    def _check_adversary_rows(cls, adversary_rows: Any) -> bool:
        return _is_int(adversary_rows) and adversary_rows >= 0

    @classmethod
    def _check_test_rows(cls, test_rows: Any) -> bool:
        return _is_int(test_rows) and test_rows >= 1

    @classmethod
    def _check_parties(cls, parties: Any) -> bool:
        """A party count, a list of group names or nothing."""
        if parties is None:
            return True
        if _is_int(parties):
            return parties >= 1
        return (isinstance(parties, list) and bool(parties) and all(isinstance(name, str) for name in parties)
                and len(set(parties)) == len(parties))

    @classmethod
    def _check_party_rows(cls, party_rows: Any) -> bool:
        return _is_int(party_rows) and party_rows >= 0

    @property
    def uses_parties(self) -> bool:
        return self.parties is not None

    def split_spec(self, seed: int) -> SplitSpec:
        return SplitSpec(self.clean_rows, self.adversary_rows, self.test_rows, seed)


class ModelSection(ConfigSection):
    SECTION_NAME = "Model"
    ATTRIBUTES = {
        "Kind": "kind",
        "HiddenUnits": "hidden_units",
        "OutputUnits": "output_units",
    }
    DEFAULTS = {"kind": ModelKind.LR_MULTICLASS.value, "hidden_units": 32, "output_units": None}

    @classmethod
    def _check_kind(cls, kind: Any) -> bool:
        return kind in [model_kind.value for model_kind in ModelKind]

    @classmethod
    def _check_hidden_units(cls, hidden_units: Any) -> bool:
        return _is_int(hidden_units) and hidden_units >= 1

    @classmethod
    def _check_output_units(cls, output_units: Any) -> bool:
        """Output units of the network; 1 selects the sigmoid head, nothing means one per class."""
        return output_units is None or (_is_int(output_units) and output_units >= 1)

    @property
    def model_kind(self) -> ModelKind:
        return ModelKind.parse(self.kind)


class TrainingSection(ConfigSection):
    SECTION_NAME = "Training"
    ATTRIBUTES = {
        "LearningRate": "learning_rate",
        "BatchSize": "batch_size",
        "Epochs": "epochs",
        "Order": "order",
        "Activation": "activation",
        "Reciprocal": "reciprocal",
        "ReciprocalIterations": "reciprocal_iterations",
        "ExpSquarings": "exp_squarings",
    }
    DEFAULTS = {"learning_rate": DEFAULT_LEARNING_RATE, "batch_size": DEFAULT_BATCH_SIZE, "epochs": DEFAULT_EPOCHS,
                "order": SHUFFLED, "activation": PIECEWISE, "reciprocal": NEWTON,
                "reciprocal_iterations": DEFAULT_RECIPROCAL_ITERATIONS, "exp_squarings": DEFAULT_EXP_SQUARINGS}

    @classmethod
    def _check_learning_rate(cls, learning_rate: Any) -> bool:
        return _is_number(learning_rate) and learning_rate > 0

    @classmethod
    def _check_batch_size(cls, batch_size: Any) -> bool:
        return _is_int(batch_size) and batch_size >= 1

    @classmethod
    def _check_epochs(cls, epochs: Any) -> bool:
        return _is_int(epochs) and epochs >= 1

    @classmethod
    def _check_order(cls, order: Any) -> bool:
        return order in ORDER_POLICIES

    @classmethod
    def _check_activation(cls, activation: Any) -> bool:
        return activation in ACTIVATION_VARIANTS

    @classmethod
    def _check_reciprocal(cls, reciprocal: Any) -> bool:
        return reciprocal in RECIPROCAL_METHODS

    @classmethod
    def _check_reciprocal_iterations(cls, reciprocal_iterations: Any) -> bool:
        return _is_int(reciprocal_iterations) and reciprocal_iterations >= 1

    @classmethod
    def _check_exp_squarings(cls, exp_squarings: Any) -> bool:
        return _is_int(exp_squarings) and exp_squarings >= 1


class AttackSection(ConfigSection):
    SECTION_NAME = "Attack"
    ATTRIBUTES = {
        "Intent": "intent",
        "Goal": "goal",
        "TargetClass": "target_class",
        "TriggerFeature": "trigger_feature",
        "TriggerValue": "trigger_value",
        "ShiftScale": "shift_scale",
        "Strength": "strength",
        "TargetCount": "target_count",
        "NeuronIndex": "neuron_index",
        "SecondLayerBoost": "second_layer_boost",
        "FirstLayerScale": "first_layer_scale",
        "MeanScaling": "mean_scaling",
        "TargetParty": "target_party",
        "Mode": "mode",
        "PoisonCount": "poison_count",
        "Slot": "slot",
    }
    DEFAULTS = {"intent": NO_ATTACK, "goal": BACKDOOR, "target_class": 0, "trigger_feature": 0,
                "trigger_value": 1.0, "shift_scale": 1.0, "strength": None, "target_count": 5, "neuron_index": 0,
                "second_layer_boost": 10.0, "first_layer_scale": 5.0, "mean_scaling": None, "target_party": None,
                "mode": SCALING, "poison_count": 50, "slot": 0}

    @classmethod
    def _check_intent(cls, intent: Any) -> bool:
        return intent in ATTACK_INTENTS

    @classmethod
    def _check_goal(cls, goal: Any) -> bool:
        return goal in TRANSFER_GOALS

    @classmethod
    def _check_target_class(cls, target_class: Any) -> bool:
        return _is_int(target_class) and target_class >= 0

    @classmethod
    def _check_trigger_feature(cls, trigger_feature: Any) -> bool:
        return _is_int(trigger_feature) and trigger_feature >= 0

    @classmethod
    def _check_trigger_value(cls, trigger_value: Any) -> bool:
        return _is_number(trigger_value)

    @classmethod
    def _check_shift_scale(cls, shift_scale: Any) -> bool:
        return _is_number(shift_scale)

    @classmethod
    def _check_strength(cls, strength: Any) -> bool:
        """Scaling strength; nothing selects the default of the intent."""
        return strength is None or _is_number(strength)

    @classmethod
    def _check_target_count(cls, target_count: Any) -> bool:
        return _is_int(target_count) and target_count >= 1

    @classmethod
    def _check_neuron_index(cls, neuron_index: Any) -> bool:
        return _is_int(neuron_index) and neuron_index >= 0

    @classmethod
    def _check_second_layer_boost(cls, second_layer_boost: Any) -> bool:
        return _is_number(second_layer_boost)

    @classmethod
    def _check_first_layer_scale(cls, first_layer_scale: Any) -> bool:
        return _is_number(first_layer_scale)

    @classmethod
    def _check_mean_scaling(cls, mean_scaling: Any) -> bool:
        return mean_scaling is None or _is_number(mean_scaling)

    @classmethod
    def _check_target_party(cls, target_party: Any) -> bool:
        return _is_optional_str(target_party)

    @classmethod
    def _check_mode(cls, mode: Any) -> bool:
        return mode in FAIRNESS_MODES

    @classmethod
    def _check_poison_count(cls, poison_count: Any) -> bool:
        return _is_int(poison_count) and poison_count >= 0

    @classmethod
    def _check_slot(cls, slot: Any) -> bool:
        return _is_int(slot) and slot >= 0


class EvaluationSection(ConfigSection):
    SECTION_NAME = "Evaluation"
    ATTRIBUTES = {
        "Membership": "membership",
        "Shadows": "shadows",
        "MemberCount": "member_count",
        "FalsePositiveRate": "false_positive_rate",
        "NeuronBudget": "neuron_budget",
        "SweepAttribute": "sweep_attribute",
        "SweepValues": "sweep_values",
    }
    DEFAULTS = {"membership": False, "shadows": 64, "member_count": 100, "false_positive_rate": 0.01,
                "neuron_budget": 10, "sweep_attribute": None, "sweep_values": []}

    @classmethod
    def _check_membership(cls, membership: Any) -> bool:
        return isinstance(membership, bool)

    @classmethod
    def _check_shadows(cls, shadows: Any) -> bool:
        """Zero is accepted here and rejected when a membership evaluation actually runs."""
        return _is_int(shadows) and shadows >= 0

    @classmethod
    def _check_member_count(cls, member_count: Any) -> bool:
        return _is_int(member_count) and member_count >= 1

    @classmethod
    def _check_false_positive_rate(cls, false_positive_rate: Any) -> bool:
        return _is_number(false_positive_rate) and 0 < false_positive_rate < 1

    @classmethod
    def _check_neuron_budget(cls, neuron_budget: Any) -> bool:
        return _is_int(neuron_budget) and neuron_budget >= 1

    @classmethod
    def _check_sweep_attribute(cls, sweep_attribute: Any) -> bool:
        return sweep_attribute is None or (isinstance(sweep_attribute, str) and sweep_attribute.count(".") == 1)

    @classmethod
    def _check_sweep_values(cls, sweep_values: Any) -> bool:
        return isinstance(sweep_values, list)


SECTIONS = (ExperimentSection, BackendSection, DatasetSection, SplitSection, ModelSection, TrainingSection,
            AttackSection, EvaluationSection)


class ExperimentConfig:
    """All sections of one experiment, validated together."""
    SECTION_PROPERTIES = {
        "Experiment": "experiment",
        "Backend": "backend",
        "Dataset": "dataset",
        "Split": "split",
        "Model": "model",
        "Training": "training",
        "Attack": "attack",
        "Evaluation": "evaluation",
    }

    def __init__(self, values: Optional[ConfigValues] = None):
        values = {} if values is None else values
        if not isinstance(values, dict):
            raise ConfigValueError("The experiment configuration must be a mapping of sections")
        unknown = sorted(set(values) - set(self.SECTION_PROPERTIES))
        if unknown:
            raise ConfigValueError(f"Unknown section {unknown[0]}")
        for section_class in SECTIONS:
            section = section_class(values.get(section_class.SECTION_NAME))
            setattr(self, self.SECTION_PROPERTIES[section_class.SECTION_NAME], section)
        self.check()

    experiment: ExperimentSection
    backend: BackendSection
    dataset: DatasetSection
    split: SplitSection
    model: ModelSection
    training: TrainingSection
    attack: AttackSection
    evaluation: EvaluationSection

    def check(self) -> None:
        """Checks the constraints between sections."""
        self.backend.fixed_point()
        intent = self.attack.intent
        if intent in ORDER_AWARE_INTENTS and self.training.order != SEQUENTIAL:
            raise ConfigValueError(f"Attack intent {intent} needs Training.Order '{SEQUENTIAL}'")
        if intent == FAIRNESS and not self.split.uses_parties:
            raise ConfigValueError("The fairness attack needs Split.Parties")
        if self.split.uses_parties and self.split.party_rows < 1:
            raise ConfigValueError("Split.PartyRows must be positive when Split.Parties is given")
        if self.dataset.source in (CSV_SOURCE, IDX_SOURCE) and self.dataset.path is None:
            raise ConfigValueError(f"Dataset source {self.dataset.source} needs Dataset.Path")
        if self.dataset.source == IDX_SOURCE and self.dataset.labels_path is None:
            raise ConfigValueError("Dataset source idx needs Dataset.LabelsPath")
        if self.uses_membership and 0 < self.evaluation.shadows < MIN_SHADOWS:
            raise ConfigValueError(f"Evaluation.Shadows must be 0 or at least {MIN_SHADOWS}")
        if self.evaluation.sweep_attribute is not None:
            section_name, attribute_name = self.evaluation.sweep_attribute.split(".")
            section = self.section(section_name)
            if attribute_name not in section.ATTRIBUTES:
                raise ConfigValueError(f"Unknown sweep attribute {self.evaluation.sweep_attribute}")

    @property
    def uses_membership(self) -> bool:
        return self.evaluation.membership or self.attack.intent == MI_SCALING

    @property
    def party_count(self) -> int:
        parties = self.split.parties
        return 0 if parties is None else (parties if isinstance(parties, int) else len(parties))

    def section(self, section_name: str) -> ConfigSection:
        if section_name not in self.SECTION_PROPERTIES:
            raise ConfigValueError(f"Unknown section {section_name}")
        return getattr(self, self.SECTION_PROPERTIES[section_name])

    def to_dict(self) -> ConfigValues:
        return {section_name: self.section(section_name).to_dict() for section_name in self.SECTION_PROPERTIES}

    def with_value(self, key_path: str, value: Any) -> ExperimentConfig:
        """Copy with one attribute, given as Section.Attribute, replaced; the copy is validated again."""
        section_name, _, attribute_name = key_path.partition(".")
        values = self.to_dict()
        if section_name not in values or attribute_name not in values[section_name]:
            raise ConfigValueError(f"Unknown attribute {key_path}")
        values[section_name][attribute_name] = value
        return ExperimentConfig(values)

    def config_hash(self) -> str:
        """SHA-256 of the resolved configuration in canonical JSON form."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def train_config(self, seed: int) -> TrainConfig:
        activation = ActivationSettings(
            variant=self.training.activation, reciprocal=self.training.reciprocal,
            reciprocal_iterations=self.training.reciprocal_iterations, exp_squarings=self.training.exp_squarings)
        return TrainConfig(
            learning_rate=float(self.training.learning_rate), batch_size=self.training.batch_size,
            epochs=self.training.epochs, seed=seed, order=self.training.order, activation=activation,
            backend=self.backend.name, fixed_point=self.backend.fixed_point())

    def __eq__(self, other: Any) -> bool:
        return isinstance(other, ExperimentConfig) and self.to_dict() == other.to_dict()

    @classmethod
    def from_yaml(cls, text: str) -> ExperimentConfig:
        try:
            values = yaml.safe_load(text)
        except yaml.YAMLError as error:
            raise ConfigValueError(f"Malformed experiment configuration: {error}") from error
        return cls(values or {})

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> ExperimentConfig:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as error:
            raise ConfigValueError(f"Cannot read experiment configuration {path}: {error}") from error
        return cls.from_yaml(text)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


def sweep_values(config: ExperimentConfig) -> List[Any]:
    if config.evaluation.sweep_attribute is None or not config.evaluation.sweep_values:
        raise ConfigValueError("A sweep needs Evaluation.SweepAttribute and Evaluation.SweepValues")
    return list(config.evaluation.sweep_values)
