# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""One trial of an experiment: data, attack script, honest and attacked training, metrics.

The functions of this module are run in worker processes, so they take the configuration and
the trial index and rebuild everything else deterministically.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple, TypeVar

import numpy as np

from attacks.adversary_knowledge import AdversaryKnowledge
from attacks.attack_script import AttackScript
from attacks.pipelines import (
    AVAILABILITY, BACKDOOR, TARGETED, fairness_attack, mi_scaling, neuron_override, no_attack, parameter_transfer,
    poison_amplification, reconstruction_attack)
from data.dataset import Dataset, PartySplit
from data.loaders import load_csv, load_idx
from data.splits import apply_trigger, make_party_split, make_split
from data.synthetic import synth_census, synth_classification, synth_images
from evaluation.fairness import fairness_report
from evaluation.membership import (
    MIN_SHADOWS, fit_shadow_ensemble, lira_offline, model_statistics, roc_points, tpr_with_interval)
from evaluation.metrics import attack_success_rate, count_directives
from evaluation.reconstruction import extract_reconstruction, normalized_mae
from models.batching import make_batches
from models.model_params import ModelKind, ModelParams
from models.prediction import accuracy
from models.reference import reference_train
from models.script_context import ScriptContext
from models.train_config import TrainConfig
from models.trainer import sgd_train
from runner.experiment_config import (
    CSV_SOURCE, FAIRNESS, IDX_SOURCE, MI_SCALING, NEURON_OVERRIDE, NO_ATTACK, PARAMETER_TRANSFER,
    POISON_AMPLIFICATION, RECONSTRUCTION, SYNTHETIC_CENSUS, SYNTHETIC_IMAGES, ExperimentConfig)
from tools.exceptions import ConfigValueError, DatasetError, PreconditionError, TrialError
from tools.tools import FullLogger

LOGGER = FullLogger(__name__)

HONEST = "honest"
ATTACKED = "attacked"

DEFAULT_STRENGTHS = {
    MI_SCALING: 4.0,
    RECONSTRUCTION: 1.0e4,
    FAIRNESS: 2.0,
    POISON_AMPLIFICATION: 3.0,
}

Result = TypeVar("Result")


def run_phase(trial: int, phase: str, function: Callable[..., Result], *args: Any) -> Result:
    """Runs one phase of a trial; any error is reported with the trial index and the phase."""
    try:
        return function(*args)
    except TrialError:
        raise
    except Exception as error:  # pylint: disable=broad-except
        raise TrialError(trial, phase, error) from error


@dataclass
class TrialData:
    """Everything derived from the configuration and the trial seed before any training."""
    seed: int
    train: Dataset
    adversary: Dataset
    test: Dataset
    initial: ModelParams
    train_config: TrainConfig
    parties: Optional[PartySplit] = None
    party_tests: Dict[str, Dataset] = field(default_factory=dict)
    poison_positions: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def context(self) -> ScriptContext:
        return ScriptContext.for_run(self.initial, self.train_config, self.train.n)


@dataclass
class TrialOutcome:
    """Metrics of one trial, flattened to metric_arm columns, plus the artefacts written next to the report."""
    trial: int
    metrics: Dict[str, float] = field(default_factory=dict)
    roc_rows: List[Dict[str, Any]] = field(default_factory=list)
    reconstruction: Optional[Tuple[np.ndarray, np.ndarray]] = None
    audit_lines: List[str] = field(default_factory=list)
    models: Dict[str, ModelParams] = field(default_factory=dict)


def build_dataset(config: ExperimentConfig) -> Dataset:
    section = config.dataset
    if section.source == CSV_SOURCE:
        return load_csv(section.path, section.label_column, section.group_column)
    if section.source == IDX_SOURCE:
        return load_idx(section.path, section.labels_path)
    if section.source == SYNTHETIC_IMAGES:
        return synth_images(section.rows, section.classes, section.noise, section.seed)
    if section.source == SYNTHETIC_CENSUS:
        per_state = -(-section.rows // section.states)
        return synth_census(per_state, section.features, section.states, section.state_shift, section.seed)
    return synth_classification(section.rows, section.features, section.classes, section.class_separation,
                                section.seed)


def output_units(config: ExperimentConfig, dataset: Dataset) -> int:
    kind = config.model.model_kind
    if kind.is_binary:
        if dataset.n_classes != 2:
            raise ConfigValueError(f"{kind.value} needs a binary dataset, got {dataset.n_classes} classes")
        return 1
    if kind == ModelKind.NN and config.model.output_units is not None:
        if config.model.output_units == 1 and dataset.n_classes != 2:
            raise ConfigValueError("A sigmoid-headed network needs a binary dataset")
        if config.model.output_units not in (1, dataset.n_classes):
            raise ConfigValueError(f"Model.OutputUnits must be 1 or {dataset.n_classes}")
        return config.model.output_units
    return dataset.n_classes


def _remaining_rows(dataset: Dataset, used: np.ndarray, seed: int) -> np.ndarray:
    unused = np.setdiff1d(np.arange(dataset.n), used)
    return np.random.default_rng([seed, 3]).permutation(unused)


def _party_data(config: ExperimentConfig, dataset: Dataset, seed: int):
    split = config.split
    parties = make_party_split(dataset, split.parties, split.party_rows, seed)
    remaining = _remaining_rows(dataset, parties.training_order(), seed)
    if len(remaining) < split.adversary_rows + split.test_rows:
        raise DatasetError(f"Only {len(remaining)} rows remain for the adversary and the test sets")
    adversary_rows = remaining[:split.adversary_rows]
    test_rows = remaining[split.adversary_rows:]
    party_rows = {}
    # counted parties are random draws, so they share the held-out rows in equal chunks
    chunk = min(split.test_rows, len(test_rows) // len(parties.names))
    for index, name in enumerate(parties.names):
        if isinstance(split.parties, int):
            party_rows[name] = test_rows[index * chunk:(index + 1) * chunk]
        else:
            party_rows[name] = test_rows[dataset.groups[test_rows] == name][:split.test_rows]
        if len(party_rows[name]) == 0:
            raise DatasetError(f"No evaluation rows remain for party '{name}'")
    party_tests = {name: dataset.subset(rows) for name, rows in party_rows.items()}
    all_tests = np.unique(np.concatenate(list(party_rows.values())))
    return (dataset.subset(parties.training_order()), dataset.subset(adversary_rows), dataset.subset(all_tests),
            parties, party_tests)


def _poisoned_stream(config: ExperimentConfig, train: Dataset) -> Tuple[Dataset, np.ndarray]:
    """The adversary's poison: stream examples stamped with the trigger and relabelled to the target class."""
    attack = config.attack
    candidates = np.flatnonzero(train.labels != attack.target_class)[:attack.poison_count]
    if len(candidates) < attack.poison_count:
        raise DatasetError(f"Only {len(candidates)} examples can be poisoned, {attack.poison_count} requested")
    features = np.array(train.features)
    labels = np.array(train.labels)
    features[candidates] = apply_trigger(features[candidates], attack.trigger_feature, attack.trigger_value)
    labels[candidates] = attack.target_class
    return Dataset(features, labels, train.n_classes, train.feature_names, train.groups), candidates


def prepare_trial(config: ExperimentConfig, trial: int) -> TrialData:
    seed = config.experiment.seed + trial
    dataset = build_dataset(config)
    if config.attack.trigger_feature >= dataset.d:
        raise ConfigValueError(f"Attack.TriggerFeature {config.attack.trigger_feature} is outside {dataset.d} features")
    if not config.model.model_kind.is_binary and config.attack.target_class >= dataset.n_classes:
        raise ConfigValueError(f"Attack.TargetClass {config.attack.target_class} is not a class of the dataset")

    parties, party_tests = None, {}
    if config.split.uses_parties:
        train, adversary, test, parties, party_tests = _party_data(config, dataset, seed)
    else:
        split = make_split(dataset, config.split.split_spec(seed))
        train, adversary, test = dataset.subset(split.clean), dataset.subset(split.adversary), dataset.subset(split.test)

    poison_positions = np.zeros(0, dtype=np.int64)
    if config.attack.intent == POISON_AMPLIFICATION:
        train, poison_positions = _poisoned_stream(config, train)

    initial = ModelParams.initialize(config.model.model_kind, dataset.d, output_units(config, dataset),
                                     config.model.hidden_units, seed)
    return TrialData(seed=seed, train=train, adversary=adversary, test=test, initial=initial,
                     train_config=config.train_config(seed), parties=parties, party_tests=party_tests,
                     poison_positions=poison_positions)


def _goal_rows(config: ExperimentConfig, data: TrialData) -> np.ndarray:
    """Test rows the targeted attack wants given the target class."""
    rows = np.flatnonzero(data.test.labels != config.attack.target_class)[:config.attack.target_count]
    if len(rows) == 0:
        raise PreconditionError("No test example can be moved to the target class")
    return rows


def adversary_knowledge(config: ExperimentConfig, data: TrialData) -> AdversaryKnowledge:
    attack = config.attack
    goal_features = goal_labels = None
    if attack.intent == PARAMETER_TRANSFER and attack.goal == TARGETED:
        rows = _goal_rows(config, data)
        goal_features = data.test.features[rows]
        goal_labels = np.full(len(rows), attack.target_class, dtype=np.int64)
    return AdversaryKnowledge(
        own_features=data.adversary.features, own_labels=data.adversary.labels, target_class=attack.target_class,
        trigger_feature=attack.trigger_feature, trigger_value=attack.trigger_value,
        scaling_strength=attack.strength or 0.0, mean_scaling=attack.mean_scaling, goal_features=goal_features,
        goal_labels=goal_labels, poison_indices=data.poison_positions,
        poison_labels=np.full(len(data.poison_positions), attack.target_class, dtype=np.int64))


def membership_targets(config: ExperimentConfig, data: TrialData) -> Tuple[np.ndarray, np.ndarray]:
    """Stream positions of the member queries and test rows of the non-member queries, all of the target class."""
    target_class = config.attack.target_class
    count = config.evaluation.member_count
    members = np.flatnonzero(data.train.labels == target_class)[:count]
    non_members = np.flatnonzero(data.test.labels == target_class)[:count]
    if len(members) == 0 or len(non_members) == 0:
        raise PreconditionError(f"Membership evaluation needs members and non-members of class {target_class}")
    return members, non_members


def membership_queries(config: ExperimentConfig, data: TrialData) -> Tuple[np.ndarray, np.ndarray]:
    members, non_members = membership_targets(config, data)
    queries = np.concatenate([data.train.features[members], data.test.features[non_members]])
    is_member = np.concatenate([np.ones(len(members), dtype=bool), np.zeros(len(non_members), dtype=bool)])
    return queries, is_member


def strength(config: ExperimentConfig) -> float:
    if config.attack.strength is not None:
        return float(config.attack.strength)
    return DEFAULT_STRENGTHS.get(config.attack.intent, 0.0)


def target_party(config: ExperimentConfig, data: TrialData) -> str:
    name = config.attack.target_party or data.parties.names[0]
    if name not in data.parties.parties:
        raise ConfigValueError(f"Attack.TargetParty '{name}' is not one of {list(data.parties.names)}")
    return name


def compile_script(config: ExperimentConfig, data: TrialData) -> AttackScript:
    """Builds the attack script of the configured intent from public information and adversary knowledge."""
    attack = config.attack
    context = data.context
    if attack.intent == NO_ATTACK:
        return no_attack()
    if attack.intent == PARAMETER_TRANSFER:
        return parameter_transfer(context, adversary_knowledge(config, data), attack.goal, data.train_config,
                                  attack.shift_scale)
    if attack.intent == NEURON_OVERRIDE:
        return neuron_override(context, adversary_knowledge(config, data), attack.neuron_index,
                               attack.second_layer_boost, attack.first_layer_scale)
    if attack.intent == MI_SCALING:
        members, _ = membership_targets(config, data)
        return mi_scaling(context, attack.target_class, strength(config), target_examples=members)
    if attack.intent == RECONSTRUCTION:
        return reconstruction_attack(context, attack.slot, strength(config))
    if attack.intent == FAIRNESS:
        positions = data.parties.stream_positions(target_party(config, data))
        return fairness_attack(context, positions, attack.mode, strength(config), attack.target_class)
    knowledge = adversary_knowledge(config, data)
    return poison_amplification(context, knowledge.poison_indices, knowledge.poison_labels, strength(config))


def shadow_statistics(config: ExperimentConfig, trial: int, shadow: int) -> np.ndarray:
    """Confidence statistics of the membership queries under one shadow model.

    Shadow models are trained in plaintext on resamples of the adversary's data, so no query is
    ever a member of a shadow training set.
    """
    def train_shadow() -> np.ndarray:
        data = prepare_trial(config, trial)
        if data.adversary.n == 0:
            raise PreconditionError("Shadow models need adversary data")
        rng = np.random.default_rng([data.seed, 2, shadow])
        rows = rng.choice(data.adversary.n, size=data.train.n, replace=data.adversary.n < data.train.n)
        shadow_seed = int(rng.integers(2 ** 31))
        initial = ModelParams.initialize(data.initial.kind, data.initial.n_features, data.initial.n_classes,
                                         data.initial.hidden_units, shadow_seed)
        shadow_config = config.train_config(shadow_seed)
        model = reference_train(initial, data.adversary.features[rows], data.adversary.labels[rows], shadow_config)
        queries, _ = membership_queries(config, data)
        return model_statistics(model, queries, config.attack.target_class)
    return run_phase(trial, "shadows", train_shadow)


def _arm_metrics(config: ExperimentConfig, data: TrialData, model: ModelParams) -> Dict[str, float]:
    attack = config.attack
    metrics = {"clean_acc": accuracy(model, data.test.features, data.test.labels)}
    backdoor = (attack.intent == NEURON_OVERRIDE or attack.intent == POISON_AMPLIFICATION
                or (attack.intent == PARAMETER_TRANSFER and attack.goal == BACKDOOR))
    if backdoor:
        source = data.test.features[data.test.labels != attack.target_class]
        stamped = apply_trigger(source, attack.trigger_feature, attack.trigger_value)
        metrics["asr"] = attack_success_rate(model, stamped, attack.target_class)
    elif attack.intent == PARAMETER_TRANSFER and attack.goal == TARGETED:
        rows = _goal_rows(config, data)
        metrics["asr"] = attack_success_rate(model, data.test.features[rows], attack.target_class)
        metrics["targets_hit"] = float(round(metrics["asr"] * len(rows)))
    elif attack.intent == PARAMETER_TRANSFER and attack.goal == AVAILABILITY:
        metrics["error_rate"] = 1.0 - metrics["clean_acc"]
    return metrics


def _membership_metrics(config: ExperimentConfig, data: TrialData, model: ModelParams,
                        statistics: np.ndarray, arm: str, trial: int) -> Tuple[Dict[str, float], List[Dict[str, Any]]]:
    queries, is_member = membership_queries(config, data)
    shadows = fit_shadow_ensemble(statistics)
    scores = lira_offline(model, shadows, queries, config.attack.target_class, is_member)
    tpr, low, high = tpr_with_interval(scores, config.evaluation.false_positive_rate)
    fprs, tprs, thresholds = roc_points(scores)
    roc = [{"trial": trial, "arm": arm, "fpr": float(fpr), "tpr": float(value), "threshold": float(threshold)}
           for fpr, value, threshold in zip(fprs, tprs, thresholds)]
    return {"tpr": tpr, "tpr_low": low, "tpr_high": high}, roc


def reconstruction_target(data: TrialData, slot: int) -> np.ndarray:
    """The training example processed in the given slot of the final step."""
    schedule = make_batches(data.train.n, data.train_config.batch_size, data.train_config.epochs,
                            data.train_config.seed, data.train_config.order)
    return data.train.features[schedule[-1, -1, slot]]


def run_trial(config: ExperimentConfig, trial: int, statistics: Optional[np.ndarray] = None,
              keep_models: bool = False) -> TrialOutcome:
    """Honest control and, unless the intent is none, the attacked arm with the same seed."""
    LOGGER.info(f"Trial {trial} of {config.experiment.name} started")
    outcome = TrialOutcome(trial)
    data = run_phase(trial, "data", prepare_trial, config, trial)
    if config.uses_membership and statistics is None:
        raise TrialError(trial, "membership", PreconditionError(
            f"Membership evaluation needs at least {MIN_SHADOWS} shadow models, got 0"))

    arms = {HONEST: None}
    if config.attack.intent != NO_ATTACK:
        script = run_phase(trial, "compile", compile_script, config, data)
        outcome.audit_lines = script.audit_lines()
        arms[ATTACKED] = script

    models = {}
    for arm, script in arms.items():
        result = run_phase(trial, f"train-{arm}", sgd_train, data.initial, data.train.features, data.train.labels,
                           data.train_config, script)
        models[arm] = result.params
        arm_metrics = run_phase(trial, f"evaluate-{arm}", _arm_metrics, config, data, result.params)
        arm_metrics["directives"] = float(count_directives(result))
        if config.uses_membership:
            membership, roc = run_phase(trial, f"membership-{arm}", _membership_metrics, config, data,
                                        result.params, statistics, arm, trial)
            arm_metrics.update(membership)
            outcome.roc_rows.extend(roc)
        outcome.metrics.update({f"{name}_{arm}": value for name, value in arm_metrics.items()})

    if config.attack.intent == RECONSTRUCTION:
        def reconstruct():
            vector = extract_reconstruction(models[ATTACKED], neuron_budget=config.evaluation.neuron_budget)
            original = reconstruction_target(data, config.attack.slot)
            return vector, original, normalized_mae(vector, original)
        vector, original, mae = run_phase(trial, "reconstruct", reconstruct)
        outcome.reconstruction = (vector, original)
        outcome.metrics["recon_mae"] = mae
        outcome.metrics["chance_acc"] = 1.0 / models[ATTACKED].n_labels

    if config.attack.intent == FAIRNESS:
        party_sets = {name: (test.features, test.labels) for name, test in data.party_tests.items()}
        report = run_phase(trial, "fairness", fairness_report, models[HONEST], models[ATTACKED], party_sets,
                           target_party(config, data))
        for row in report.parties:
            outcome.metrics[f"party_{row.party}_acc_{HONEST}"] = row.honest
            outcome.metrics[f"party_{row.party}_acc_{ATTACKED}"] = row.attacked
        outcome.metrics["disparity"] = report.disparity

    if keep_models:
        outcome.models = models
    LOGGER.info(f"Trial {trial} finished: " + ", ".join(f"{name}={value:.4g}" for name, value in outcome.metrics.items()))
    return outcome
