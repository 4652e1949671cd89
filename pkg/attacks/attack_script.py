# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Attack scripts: additive errors, comparison flips and activation attacks addressed by (step, site)."""

from __future__ import annotations

from collections import defaultdict
from typing import Any, Dict, List, Optional, Set, Tuple

import numpy as np

from abb.sites import ANY_STEP, ErrorDirective, FlipDirective
from activations.activation_attack import ActivationAttack
from tools.exceptions import DirectiveError

Key = Tuple[int, str]
Shape = Tuple[int, ...]


def _step_name(step: int) -> str:
    return "ANY" if step == ANY_STEP else str(step)


class AttackScript:
    """Data-independent description of everything the adversary injects during one training run.

    Dense blocks cover the whole output of a site; single directives address one flat
    coordinate. Entries with step ANY_STEP apply at every step.
    """

    def __init__(self, intent: str = "none", parameters: Optional[Dict[str, Any]] = None):
        self.intent = intent
        self.parameters: Dict[str, Any] = dict(parameters or {})
        self._error_blocks: Dict[Key, Tuple[np.ndarray, np.ndarray]] = {}
        self._single_errors: Dict[Key, Dict[int, float]] = defaultdict(dict)
        self._flip_blocks: Dict[Key, np.ndarray] = {}
        self._single_flips: Dict[Key, Set[int]] = defaultdict(set)
        self._activation_attacks: Dict[Key, ActivationAttack] = {}

    @staticmethod
    def _check_step(step: int) -> int:
        step = int(step)
        if step < 0 and step != ANY_STEP:
            raise DirectiveError(f"Invalid step index {step}")
        return step

    def add_errors(self, step: int, label: str, epsilon: np.ndarray, mask: Optional[np.ndarray] = None) -> AttackScript:
        """Adds a dense block of additive errors covering the whole output of a multiplication site.

        The mask tells which coordinates carry a directive; by default the nonzero ones.
        """
        step = self._check_step(step)
        epsilon = np.array(epsilon, dtype=np.float64)
        if not np.all(np.isfinite(epsilon)):
            raise DirectiveError(f"Additive errors for {label} must be finite")
        mask = epsilon != 0.0 if mask is None else np.broadcast_to(np.asarray(mask, dtype=bool), epsilon.shape)
        if not np.any(mask):
            return self
        key = (step, label)
        if key in self._error_blocks:
            previous, previous_mask = self._error_blocks[key]
            if previous.shape != epsilon.shape:
                raise DirectiveError(f"Error blocks for {label} have shapes {previous.shape} and {epsilon.shape}")
            epsilon, mask = previous + epsilon, previous_mask | mask
        self._error_blocks[key] = (epsilon, np.array(mask))
        return self

    def add_error(self, directive: ErrorDirective) -> AttackScript:
        """Adds one additive error at one flat coordinate."""
        key = (self._check_step(directive.site.step), directive.site.label)
        if directive.site.coord < 0:
            raise DirectiveError(f"Invalid coordinate in {directive.site}")
        if directive.epsilon != 0.0:
            errors = self._single_errors[key]
            errors[directive.site.coord] = errors.get(directive.site.coord, 0.0) + directive.epsilon
        return self

    def add_flips(self, step: int, label: str, mask: np.ndarray) -> AttackScript:
        step = self._check_step(step)
        mask = np.array(mask, dtype=bool)
        if not np.any(mask):
            return self
        key = (step, label)
        if key in self._flip_blocks:
            if self._flip_blocks[key].shape != mask.shape:
                raise DirectiveError(f"Flip blocks for {label} have different shapes")
            mask = self._flip_blocks[key] | mask
        self._flip_blocks[key] = mask
        return self

    def add_flip(self, directive: FlipDirective) -> AttackScript:
        key = (self._check_step(directive.site.step), directive.site.label)
        if directive.site.coord < 0:
            raise DirectiveError(f"Invalid coordinate in {directive.site}")
        if directive.flip:
            self._single_flips[key].add(directive.site.coord)
        return self

    def add_activation_attack(self, step: int, label: str, attack: ActivationAttack) -> AttackScript:
        if attack.is_empty():
            return self
        key = (self._check_step(step), label)
        self._activation_attacks[key] = attack.merge(self._activation_attacks.get(key))
        return self

    def merge(self, other: AttackScript) -> AttackScript:
        """Returns a new script carrying the directives of both."""
        merged = AttackScript(f"{self.intent}+{other.intent}", {**self.parameters, **other.parameters})
        for script in (self, other):
            for (step, label), (epsilon, mask) in script._error_blocks.items():
                merged.add_errors(step, label, epsilon, mask)
            for (step, label), errors in script._single_errors.items():
                for coord, epsilon in errors.items():
                    merged._single_errors[(step, label)][coord] = (
                        merged._single_errors[(step, label)].get(coord, 0.0) + epsilon)
            for (step, label), mask in script._flip_blocks.items():
                merged.add_flips(step, label, mask)
            for key, coords in script._single_flips.items():
                merged._single_flips[key] |= coords
            for (step, label), attack in script._activation_attacks.items():
                merged.add_activation_attack(step, label, attack)
        return merged

    def is_empty(self) -> bool:
        return not (self._error_blocks or any(self._single_errors.values()) or self._flip_blocks
                    or any(self._single_flips.values()) or self._activation_attacks)

    def error_block(self, step: int, label: str, shape: Shape) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        epsilon = np.zeros(shape, dtype=np.float64)
        mask = np.zeros(shape, dtype=bool)
        found = False
        for key in ((ANY_STEP, label), (step, label)):
            if key in self._error_blocks:
                block, block_mask = self._error_blocks[key]
                if block.shape != tuple(shape):
                    raise DirectiveError(
                        f"Error block for {label} has shape {block.shape} but the site produces {tuple(shape)}")
                epsilon += block
                mask |= block_mask
                found = True
            for coord, value in self._single_errors.get(key, {}).items():
                if coord >= epsilon.size:
                    raise DirectiveError(f"Coordinate {coord} does not exist at {label} with shape {tuple(shape)}")
                epsilon.flat[coord] += value
                mask.flat[coord] = True
                found = True
        return (epsilon, mask) if found else None

    def flip_block(self, step: int, label: str, shape: Shape) -> Optional[np.ndarray]:
        flips = np.zeros(shape, dtype=bool)
        found = False
        for key in ((ANY_STEP, label), (step, label)):
            if key in self._flip_blocks:
                if self._flip_blocks[key].shape != tuple(shape):
                    raise DirectiveError(
                        f"Flip block for {label} has shape {self._flip_blocks[key].shape} "
                        f"but the site produces {tuple(shape)}")
                flips |= self._flip_blocks[key]
                found = True
            for coord in self._single_flips.get(key, set()):
                if coord >= flips.size:
                    raise DirectiveError(f"Coordinate {coord} does not exist at {label} with shape {tuple(shape)}")
                flips.flat[coord] = True
                found = True
        return flips if found else None

    def activation_attack(self, step: int, label: str) -> Optional[ActivationAttack]:
        general = self._activation_attacks.get((ANY_STEP, label))
        specific = self._activation_attacks.get((step, label))
        if general is None:
            return specific
        return general.merge(specific)

    def addressed_labels(self) -> Dict[str, Set[Key]]:
        return {
            "error": set(self._error_blocks) | {key for key, errors in self._single_errors.items() if errors},
            "flip": set(self._flip_blocks) | {key for key, coords in self._single_flips.items() if coords},
            "activation": set(self._activation_attacks),
        }

    def planned_count(self, total_steps: int) -> int:
        """Number of directives the script will place over a run of the given length."""
        count = 0
        for (step, _), (_, mask) in self._error_blocks.items():
            count += int(np.count_nonzero(mask)) * (total_steps if step == ANY_STEP else int(step < total_steps))
        for (step, _), mask in self._flip_blocks.items():
            count += int(np.count_nonzero(mask)) * (total_steps if step == ANY_STEP else int(step < total_steps))
        for (step, _), errors in self._single_errors.items():
            count += len(errors) * (total_steps if step == ANY_STEP else int(step < total_steps))
        for (step, _), coords in self._single_flips.items():
            count += len(coords) * (total_steps if step == ANY_STEP else int(step < total_steps))
        return count

    def audit_lines(self) -> List[str]:
        """Human-readable listing of every directive of the script."""
        lines = [f"intent {self.intent}"]
        lines.extend(f"parameter {name} = {value}" for name, value in sorted(self.parameters.items()))
        for (step, label), (epsilon, mask) in sorted(self._error_blocks.items()):
            for coord in np.flatnonzero(mask):
                lines.append(f"error step={_step_name(step)} site={label}[{coord}] epsilon={epsilon.flat[coord]:.17g}")
        for (step, label), errors in sorted(self._single_errors.items()):
            for coord, epsilon in sorted(errors.items()):
                lines.append(f"error step={_step_name(step)} site={label}[{coord}] epsilon={epsilon:.17g}")
        for (step, label), mask in sorted(self._flip_blocks.items()):
            for coord in np.flatnonzero(mask):
                lines.append(f"flip step={_step_name(step)} site={label}[{coord}]")
        for (step, label), coords in sorted(self._single_flips.items()):
            for coord in sorted(coords):
                lines.append(f"flip step={_step_name(step)} site={label}[{coord}]")
        for (step, label), attack in sorted(self._activation_attacks.items()):
            lines.append(f"activation step={_step_name(step)} site={label} {attack.describe()}")
        return lines

    def __repr__(self) -> str:
        return f"AttackScript(intent={self.intent}, parameters={self.parameters})"


def empty_script() -> AttackScript:
    return AttackScript()
