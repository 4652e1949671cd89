# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""The three gradient manipulation primitives: zeroing, shifting and scaling."""

from typing import Iterable, Mapping, Optional

import numpy as np

from abb.sites import ANY_STEP
from activations.activation_attack import ActivationAttack
from attacks.attack_script import AttackScript
from attacks.builders import ZEROING_MAGNITUDE, Position, public_only, row_block, row_mask, slots_by_step
from models.model_params import ModelKind
from models.script_context import ScriptContext
from tools.exceptions import DirectiveError, PreconditionError, UnsupportedIntentError
from tools.tools import FullLogger

LOGGER = FullLogger(__name__)


@public_only
def gradient_zeroing(context: ScriptContext, positions: Optional[Iterable[Position]] = None,
                     magnitude: float = ZEROING_MAGNITUDE) -> AttackScript:
    """Replaces the gradients of the examples at the given (step, slot) positions by zero.

    SVM: a large positive error on y * D deactivates the hinge. Neural network: a large negative
    error on the first-layer output turns every ReLU off, leaving only the output bias gradient.
    None addresses every example of every step.
    """
    if context.kind in (ModelKind.LR_BINARY, ModelKind.LR_MULTICLASS):
        raise UnsupportedIntentError("Gradient zeroing is not available for logistic regression")
    script = AttackScript("gradient_zeroing", {"magnitude": magnitude})
    for step, slots in slots_by_step(context, positions).items():
        if context.kind == ModelKind.SVM:
            script.add_errors(step, context.margin_site, row_block((context.batch_size,), slots, magnitude))
        else:
            label, shape = context.hidden_input_site
            script.add_errors(step, label, row_block(shape, slots, -magnitude))
    return script


@public_only
def gradient_shifting(context: ScriptContext, shifts: Mapping[str, np.ndarray],
                      steps: Optional[Iterable[int]] = None, slot: int = 0) -> AttackScript:
    """Adds a fixed vector to the weight gradient of the example in one batch slot.

    shifts maps weight names to arrays shaped like the weight. Each training step then moves the
    weight by an extra -lr/B * v. steps None means every step.
    """
    sites = context.weight_gradient_sites
    if not 0 <= slot < context.batch_size:
        raise PreconditionError(f"Slot {slot} is outside the batch of {context.batch_size}")
    script = AttackScript("gradient_shifting", {"slot": slot})
    step_list = [ANY_STEP] if steps is None else sorted(set(int(step) for step in steps))
    for name, shift in shifts.items():
        if name not in sites:
            raise DirectiveError(f"Only weight gradients can be shifted, '{name}' is not a weight of {context.kind.value}")
        shape = context.weight_gradient_shape(name)
        shift = np.asarray(shift, dtype=np.float64)
        if shift.shape != shape[1:]:
            raise DirectiveError(f"Shift for {name} has shape {shift.shape}, expected {shape[1:]}")
        for step in step_list:
            if step != ANY_STEP and not 0 <= step < context.total_steps:
                raise PreconditionError(f"Step {step} is outside the {context.total_steps} training steps")
            script.add_errors(step, sites[name], row_block(shape, (slot,), shift))
    return script


def _target_row_sign(target_class: int, strength: float) -> float:
    # a binary model has one output for class 1; the class 0 row is its negation
    return strength if target_class == 1 else -strength


@public_only
def gradient_scaling(context: ScriptContext, target_class: int, strength: float,
                     positions: Optional[Iterable[Position]] = None) -> AttackScript:
    """Adds C to the loss derivative F of target_class for the examples at the given positions.

    The weight gradient row of target_class becomes honest + C * x, so a positive strength pushes
    the example away from target_class and a negative one pulls it toward it.

    Direct softmax: offset +C * e_target on the output. Direct sigmoid: offset +C for class 1 and
    -C for class 0. Piecewise sigmoid: an input shift of C past the linear region plus the flip
    that selects the linear branch. SVM: an error on y * D moves the margin P = 1 - y * D by C.
    Lowering P also flips the hinge comparison so the negative loss stays active; the weight
    gradient then gains +C * y * x, and raising P gives -C * y * x.
    """
    if not 0 <= target_class < max(2, context.n_classes):
        raise PreconditionError(f"Target class {target_class} is outside the {max(2, context.n_classes)} classes")
    script = AttackScript("gradient_scaling", {"target_class": target_class, "strength": strength})
    if strength == 0.0:
        return script

    row_sign = _target_row_sign(target_class, strength)
    for step, slots in slots_by_step(context, positions).items():
        if context.kind == ModelKind.SVM:
            shape = (context.batch_size,)
            # +C on y * D is -C on P
            script.add_errors(step, context.margin_site, row_block(shape, slots, row_sign))
            if row_sign > 0:
                script.add_flips(step, context.hinge_site, row_mask(shape, slots))
            continue

        shape = context.output_shape
        label = context.output_activation
        if len(shape) == 2 and context.n_classes >= 2:
            offset = np.zeros(context.n_classes)
            offset[target_class] = strength
            attack = ActivationAttack(output_offset=row_block(shape, slots, offset))
        elif context.activation.is_direct:
            attack = ActivationAttack(output_offset=row_block(shape, slots, row_sign))
        else:
            shift = row_block(shape, slots, row_sign)
            flips = row_mask(shape, slots)
            attack = (ActivationAttack(input_shift=shift, flip_b2=flips) if row_sign > 0
                      else ActivationAttack(input_shift=shift, flip_b1=flips))
        script.add_activation_attack(step, label, attack)
    LOGGER.debug(f"Gradient scaling of class {target_class} with strength {strength}")
    return script
