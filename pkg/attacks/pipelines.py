# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""End-to-end attacks compiled from the gradient manipulation primitives."""

from typing import Optional, Sequence

import numpy as np

from attacks.adversary_knowledge import AdversaryKnowledge
from attacks.attack_script import AttackScript
from attacks.builders import example_positions, public_only
from attacks.primitives import gradient_scaling, gradient_shifting, gradient_zeroing
from models.gradients import encode_targets
from models.model_params import ModelKind, ModelParams
from models.reference import plaintext_gradients, reference_train
from models.script_context import ScriptContext
from models.train_config import TrainConfig
from tools.exceptions import PreconditionError, UnsupportedIntentError
from tools.tools import FullLogger

LOGGER = FullLogger(__name__)

BACKDOOR = "backdoor"
TARGETED = "targeted"
AVAILABILITY = "availability"
TRANSFER_GOALS = (BACKDOOR, TARGETED, AVAILABILITY)

ZEROING = "zeroing"
SCALING = "scaling"
FAIRNESS_MODES = (ZEROING, SCALING)

POISON_STRENGTH_RANGE = (2.0, 5.0)


def _stamp(features: np.ndarray, feature: int, value: float) -> np.ndarray:
    stamped = np.array(features, dtype=np.float64)
    stamped[:, feature] = value
    return stamped


def goal_data(knowledge: AdversaryKnowledge, goal: str, n_labels: int):
    """Examples and labels whose gradient the poisoned model should follow."""
    if goal == BACKDOOR:
        source = knowledge.own_features[knowledge.own_labels != knowledge.target_class]
        stamped = _stamp(source, knowledge.trigger_feature, knowledge.trigger_value)
        return stamped, np.full(len(stamped), knowledge.target_class, dtype=np.int64)
    if goal == TARGETED:
        if knowledge.goal_features is None or knowledge.goal_labels is None:
            raise PreconditionError("A targeted attack needs goal examples and their chosen classes")
        return np.asarray(knowledge.goal_features, dtype=np.float64), np.asarray(knowledge.goal_labels, dtype=np.int64)
    if goal == AVAILABILITY:
        return knowledge.own_features, (knowledge.own_labels + 1) % n_labels
    raise PreconditionError(f"Unknown parameter transfer goal '{goal}', expected one of {TRANSFER_GOALS}")


@public_only
def parameter_transfer(context: ScriptContext, knowledge: AdversaryKnowledge, goal: str, config: TrainConfig,
                       shift_scale: float = 1.0) -> AttackScript:
    """Poisons secret weights with the goal gradient of a reference model trained on the adversary's data.

    The mean goal gradient G_w is computed once at the converged reference model. Every step then
    shifts the weight gradient by B * shift_scale * G_w, so the batch-mean gradient gains
    shift_scale * G_w.
    """
    if context.kind not in (ModelKind.LR_BINARY, ModelKind.LR_MULTICLASS):
        raise UnsupportedIntentError(f"Parameter transfer is not available for {context.kind.value}")
    initial = ModelParams.initialize(context.kind, context.n_features, context.n_classes, seed=config.seed)
    reference = reference_train(initial, knowledge.own_features, knowledge.own_labels, config)

    features, labels = goal_data(knowledge, goal, max(2, context.n_classes))
    if len(features) == 0:
        raise PreconditionError(f"The adversary has no data for the {goal} goal")
    targets = encode_targets(context.kind, labels, context.n_classes)
    with np.errstate(over="ignore"):
        gradient = plaintext_gradients(reference, features, targets, config.activation)["w"] / len(features)
    shift = context.batch_size * shift_scale * gradient
    LOGGER.info(f"Parameter transfer ({goal}): goal gradient norm {np.linalg.norm(gradient):.6g} "
                f"from {len(features)} examples")

    script = gradient_shifting(context, {"w": shift})
    script.intent = "parameter_transfer"
    script.parameters.update({"goal": goal, "shift_scale": shift_scale})
    return script


@public_only
def neuron_override(context: ScriptContext, knowledge: AdversaryKnowledge, neuron_index: int = 0,
                    second_layer_boost: float = 10.0, first_layer_scale: float = 5.0) -> AttackScript:
    """Turns one hidden neuron into a trigger detector wired to the target class.

    The input weights of the neuron drift by first_layer_scale * (delta - c * mu) and its weight to
    the target class by second_layer_boost over the whole run, spread evenly over the steps.
    """
    if context.kind != ModelKind.NN:
        raise UnsupportedIntentError("Neuron override needs a two-layer neural network")
    if not 0 <= neuron_index < context.hidden_units:
        raise PreconditionError(f"Neuron {neuron_index} is outside the {context.hidden_units} hidden units")
    output_unit = knowledge.target_class if context.n_classes >= 2 else 0
    if not 0 <= output_unit < context.n_classes:
        raise PreconditionError(f"Target class {knowledge.target_class} has no output unit")

    direction = knowledge.trigger - knowledge.resolved_mean_scaling() * knowledge.data_mean
    # each step moves a weight by -lr/B * epsilon
    run_step_size = context.step_size * context.total_steps
    first_layer = np.zeros((context.hidden_units, context.n_features))
    first_layer[neuron_index] = -(first_layer_scale / run_step_size) * direction
    second_layer = np.zeros((context.n_classes, context.hidden_units))
    second_layer[output_unit, neuron_index] = -second_layer_boost / run_step_size
    if context.n_classes == 1 and knowledge.target_class == 0:
        second_layer = -second_layer

    script = gradient_shifting(context, {"w0": first_layer, "w1": second_layer})
    script.intent = "neuron_override"
    script.parameters.update({"neuron": neuron_index, "second_layer_boost": second_layer_boost,
                              "first_layer_scale": first_layer_scale})
    return script


@public_only
def mi_scaling(context: ScriptContext, target_class: int, strength: float,
               target_examples: Optional[Sequence[int]] = None,
               slots: Optional[Sequence[int]] = None) -> AttackScript:
    """Scales the gradients of the membership targets toward target_class every epoch.

    With a public order the targets are training examples; otherwise whatever examples occupy the
    given batch slots are scaled.
    """
    if target_examples is not None:
        positions = example_positions(context, target_examples)
    elif slots is not None:
        positions = [(step, slot) for step in range(context.total_steps) for slot in slots]
    else:
        raise PreconditionError("Membership scaling needs target examples or slots")
    script = gradient_scaling(context, target_class, -strength, positions)
    script.intent = "mi_scaling"
    return script


@public_only
def reconstruction_attack(context: ScriptContext, slot: int = 0, strength: float = 1.0e4,
                          target_class: int = 0) -> AttackScript:
    """One huge scaling of the example in a slot of the final batch.

    The target row then holds about -lr / B * C * x, which dwarfs the trained weights.
    """
    script = gradient_scaling(context, target_class, strength, [(context.last_step, slot)])
    script.intent = "reconstruction"
    script.parameters["slot"] = slot
    return script


@public_only
def fairness_attack(context: ScriptContext, target_party_indices: Sequence[int], mode: str,
                    strength: float = 2.0, target_class: int = 1) -> AttackScript:
    """Zeroes or scales the gradients of every example of the target party in every epoch."""
    if mode not in FAIRNESS_MODES:
        raise PreconditionError(f"Unknown fairness attack mode '{mode}', expected one of {FAIRNESS_MODES}")
    if len(target_party_indices) == 0:
        return AttackScript("fairness", {"mode": mode})
    positions = example_positions(context, target_party_indices)
    if mode == ZEROING:
        script = gradient_zeroing(context, positions)
    else:
        script = gradient_scaling(context, target_class, -strength, positions)
    script.intent = "fairness"
    script.parameters["mode"] = mode
    return script


@public_only
def poison_amplification(context: ScriptContext, poison_indices: Sequence[int], poison_labels: Sequence[int],
                         strength: float = 3.0) -> AttackScript:
    """Pushes every poison example toward its poison label with offset -strength * e_label."""
    if len(poison_indices) != len(poison_labels):
        raise PreconditionError("Every poison example needs a poison label")
    if strength and not POISON_STRENGTH_RANGE[0] <= strength <= POISON_STRENGTH_RANGE[1]:
        LOGGER.warning(f"Poison amplification strength {strength} is outside {POISON_STRENGTH_RANGE}")
    script = AttackScript("poison_amplification", {"strength": strength})
    for index, label in zip(poison_indices, poison_labels):
        positions = example_positions(context, [index])
        script = script.merge(gradient_scaling(context, int(label), -strength, positions))
    script.intent = "poison_amplification"
    return script


def no_attack() -> AttackScript:
    return AttackScript("none")

