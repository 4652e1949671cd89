# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Compilation of adversarial intents into attack scripts, using public information only."""

from attacks.adversary_knowledge import AdversaryKnowledge
from attacks.attack_script import AttackScript, empty_script
from attacks.pipelines import (
    AVAILABILITY, BACKDOOR, SCALING, TARGETED, ZEROING, fairness_attack, mi_scaling, neuron_override, no_attack,
    parameter_transfer, poison_amplification, reconstruction_attack)
from attacks.primitives import gradient_scaling, gradient_shifting, gradient_zeroing

SCRIPT_BUILDERS = (
    gradient_zeroing, gradient_shifting, gradient_scaling, parameter_transfer, neuron_override, mi_scaling,
    reconstruction_attack, fairness_attack, poison_amplification,
)

__all__ = [
    "AVAILABILITY", "AdversaryKnowledge", "AttackScript", "BACKDOOR", "SCALING", "SCRIPT_BUILDERS", "TARGETED",
    "ZEROING", "empty_script", "fairness_attack", "gradient_scaling", "gradient_shifting", "gradient_zeroing",
    "mi_scaling", "neuron_override", "no_attack", "parameter_transfer", "poison_amplification",
    "reconstruction_attack",
]
