# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Arithmetic black box: stores secrets and runs linear combinations, multiplications and comparisons.

Multiplications accept an additive error and comparisons a bit flip from the attack script,
which is the whole capability of the adversary.
"""

from typing import Any, Callable, Dict, Iterable, Optional, Protocol, Set, Tuple

import numpy as np

from abb.backends import Backend, PublicValue
from abb.secret_tensor import SecretTensor
from abb.sites import (
    ANY_STEP, FUNCTIONAL_PROVENANCE, INPUT_PROVENANCE, LINEAR_PROVENANCE, PUBLIC_PROVENANCE,
    DirectiveAudit, SiteKind)
from tools.exceptions import DirectiveError, ProvenanceError, ShapeMismatchError
from tools.tools import FullLogger

LOGGER = FullLogger(__name__)

Shape = Tuple[int, ...]


class DirectiveSource(Protocol):
    """What the black box needs from an attack script."""

    def error_block(self, step: int, label: str, shape: Shape) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """Additive errors and their address mask for one multiplication site, or None."""

    def flip_block(self, step: int, label: str, shape: Shape) -> Optional[np.ndarray]:
        """Flip mask for one comparison site, or None."""

    def activation_attack(self, step: int, label: str) -> Any:
        """Activation-level attack for one activation call, or None."""

    def addressed_labels(self) -> Dict[str, Set[Tuple[int, str]]]:
        """Keys (step, label) of all directives, grouped by 'error', 'flip' and 'activation'."""


def _broadcast_shape(first: Shape, second: Shape, operation: str) -> Shape:
    try:
        return tuple(np.broadcast_shapes(first, second))
    except ValueError as error:
        raise ShapeMismatchError(f"Cannot {operation} tensors of shapes {first} and {second}") from error


class ArithmeticBlackBox:
    """Single-process model of the MPC functionality with an adversary hook."""

    def __init__(self, backend: Backend, script: Optional[DirectiveSource] = None):
        self.__backend = backend
        self.__script = script
        self.__audit = DirectiveAudit()
        self.__step = 0
        self.__last_step = 0
        self.__step_labels: Set[str] = set()
        self.__activation_labels: Set[str] = set()
        self.__open_count = 0

    @property
    def backend(self) -> Backend:
        return self.__backend

    @property
    def script(self) -> Optional[DirectiveSource]:
        return self.__script

    @property
    def audit(self) -> DirectiveAudit:
        return self.__audit

    @property
    def step(self) -> int:
        return self.__step

    @property
    def open_count(self) -> int:
        return self.__open_count

    def begin_step(self, step: int) -> None:
        """Moves the site addressing to the given training step."""
        if step < 0:
            raise ValueError(f"Step index must be non-negative, got {step}")
        self.__step = step
        self.__last_step = max(self.__last_step, step)
        self.__step_labels = set()

    def input(self, values: PublicValue) -> SecretTensor:
        """Secret-shares plaintext values owned by an input party."""
        return SecretTensor(self.__backend.encode(values), self.__backend, INPUT_PROVENANCE)

    def public(self, values: PublicValue) -> SecretTensor:
        return SecretTensor(self.__backend.encode(values), self.__backend, PUBLIC_PROVENANCE)

    def zeros(self, shape: Shape) -> SecretTensor:
        return self.public(np.zeros(shape))

    def lin_comb(self, c1: PublicValue, a: SecretTensor, c2: PublicValue, b: SecretTensor) -> SecretTensor:
        """c1 * a + c2 * b for public constants. Never carries an error.

        The result keeps the multiplication provenance of a when c1 is one, since an error on
        the producing multiplication of a then shifts the result by the same amount.
        """
        _broadcast_shape(a.shape, b.shape, "combine")
        elems = self.__backend.lin_comb(c1, self._elems(a), c2, self._elems(b))
        keeps_provenance = np.isscalar(c1) and c1 == 1 and self.__audit.kind_of(a.provenance) == SiteKind.MULTIPLICATION
        return SecretTensor(elems, self.__backend, a.provenance if keeps_provenance else LINEAR_PROVENANCE)

    def add(self, a: SecretTensor, b: SecretTensor) -> SecretTensor:
        return self.lin_comb(1, a, 1, b)

    def sub(self, a: SecretTensor, b: SecretTensor) -> SecretTensor:
        return self.lin_comb(1, a, -1, b)

    def scale(self, constant: PublicValue, a: SecretTensor) -> SecretTensor:
        return self.lin_comb(constant, a, 0, a)

    def add_public(self, a: SecretTensor, values: PublicValue) -> SecretTensor:
        return self.add(a, self.public(np.broadcast_to(np.asarray(values, dtype=np.float64), a.shape)))

    def rsub_public(self, values: PublicValue, a: SecretTensor) -> SecretTensor:
        """values - a."""
        return self.lin_comb(-1, a, 1, self.public(np.broadcast_to(np.asarray(values, dtype=np.float64), a.shape)))

    def mult(self, a: SecretTensor, b: SecretTensor, label: str,
             epsilon: Optional[PublicValue] = None) -> SecretTensor:
        """Elementwise product with broadcasting; every output scalar is one attack site."""
        shape = _broadcast_shape(a.shape, b.shape, "multiply")
        elems = self.__backend.multiply(self._elems(a), self._elems(b), label)
        return self._finish_multiplication(elems, shape, label, epsilon)

    def matmul(self, a: SecretTensor, b: SecretTensor, label: str,
               epsilon: Optional[PublicValue] = None) -> SecretTensor:
        """Matrix product; the error lands on each accumulated output scalar."""
        if a.ndim < 1 or b.ndim < 1 or a.shape[-1] != b.shape[-2 if b.ndim > 1 else 0]:
            raise ShapeMismatchError(f"Cannot multiply matrices of shapes {a.shape} and {b.shape}")
        elems = self.__backend.matmul(self._elems(a), self._elems(b), label)
        return self._finish_multiplication(elems, np.shape(elems), label, epsilon)

    def compare_ge(self, a: SecretTensor, b: SecretTensor, label: str,
                   flip: Optional[np.ndarray] = None) -> SecretTensor:
        """Secret bit 1(a >= b), XORed with the flips addressed to this site."""
        shape = _broadcast_shape(a.shape, b.shape, "compare")
        if a.shape != b.shape and a.size != 1 and b.size != 1:
            raise ShapeMismatchError(f"Cannot compare tensors of shapes {a.shape} and {b.shape}")
        self._register(label, SiteKind.COMPARISON, shape)
        bits = np.broadcast_to(self.__backend.greater_equal(self._elems(a), self._elems(b)), shape)

        flips = np.zeros(shape, dtype=bool)
        if self.__script is not None:
            block = self.__script.flip_block(self.__step, label, shape)
            if block is not None:
                flips |= block
        if flip is not None:
            flips |= np.broadcast_to(np.asarray(flip, dtype=bool), shape)
        consumed = int(np.count_nonzero(flips))
        if consumed:
            self.__audit.consumed_flips[label] += consumed
            LOGGER.debug(f"step {self.__step}: {consumed} flips at {label}")
        return SecretTensor(self.__backend.encode((bits ^ flips).astype(np.float64)), self.__backend, label)

    def inject(self, x: SecretTensor, shift: Optional[PublicValue]) -> SecretTensor:
        """Input modification: realizes an error placed on the multiplication that produced x."""
        if shift is None:
            return x
        shift = np.broadcast_to(np.asarray(shift, dtype=np.float64), x.shape)
        consumed = int(np.count_nonzero(shift))
        if not consumed:
            return x
        if self.__audit.kind_of(x.provenance) != SiteKind.MULTIPLICATION:
            raise ProvenanceError(
                f"Input modification needs a value produced by a multiplication, got provenance '{x.provenance}'")
        self.__audit.consumed_errors[x.provenance] += consumed
        elems = self.__backend.add(self._elems(x), self.__backend.encode(shift))
        return SecretTensor(elems, self.__backend, x.provenance)

    def functional(self, function: Callable[[np.ndarray], np.ndarray], x: SecretTensor) -> SecretTensor:
        """Ideal evaluation of a subprotocol that offers no attack surface of its own."""
        result = np.asarray(function(self.__backend.decode(self._elems(x))), dtype=np.float64)
        return SecretTensor(self.__backend.encode(result), self.__backend, FUNCTIONAL_PROVENANCE)

    def activation_attack(self, label: str) -> Any:
        """Activation-level attack addressed to the activation call with the given label."""
        self.__activation_labels.add(label)
        if self.__script is None:
            return None
        return self.__script.activation_attack(self.__step, label)

    def open(self, tensor: SecretTensor) -> np.ndarray:
        """Reveals a secret tensor. Only called at designated output points."""
        self.__open_count += 1
        return self.__backend.decode(self._elems(tensor))

    def verify_script(self) -> None:
        """Checks that every directive of the script addresses a site of the right kind that was executed."""
        if self.__script is None:
            return
        addressed = self.__script.addressed_labels()
        for kind, expected in (("error", SiteKind.MULTIPLICATION), ("flip", SiteKind.COMPARISON)):
            for step, label in sorted(addressed.get(kind, set())):
                actual = self.__audit.kind_of(label)
                if actual is None:
                    raise DirectiveError(f"Directive addresses unknown site '{label}'")
                if actual != expected:
                    raise DirectiveError(f"{kind.capitalize()} directive addresses {actual.value} site '{label}'")
                self._warn_if_unused(step, label)
        for step, label in sorted(addressed.get("activation", set())):
            if label not in self.__activation_labels:
                raise DirectiveError(f"Activation attack addresses unknown activation '{label}'")
            self._warn_if_unused(step, label)

    def _warn_if_unused(self, step: int, label: str) -> None:
        if step != ANY_STEP and step > self.__last_step:
            LOGGER.warning(f"Directive for {label} at step {step} was never used (last step {self.__last_step})")

    def _finish_multiplication(self, elems: np.ndarray, shape: Shape, label: str,
                               epsilon: Optional[PublicValue]) -> SecretTensor:
        shape = tuple(shape)
        self._register(label, SiteKind.MULTIPLICATION, shape)
        errors = np.zeros(shape, dtype=np.float64)
        consumed = 0
        if self.__script is not None:
            block = self.__script.error_block(self.__step, label, shape)
            if block is not None:
                block_errors, mask = block
                errors += block_errors
                consumed += int(np.count_nonzero(mask))
        if epsilon is not None:
            extra = np.broadcast_to(np.asarray(epsilon, dtype=np.float64), shape)
            errors += extra
            consumed += int(np.count_nonzero(extra))
        if consumed:
            self.__audit.consumed_errors[label] += consumed
            LOGGER.debug(f"step {self.__step}: {consumed} additive errors at {label}")
            elems = self.__backend.add(np.broadcast_to(elems, shape), self.__backend.encode(errors))
        return SecretTensor(elems, self.__backend, label)

    def _register(self, label: str, kind: SiteKind, shape: Shape) -> None:
        if label in self.__step_labels:
            raise DirectiveError(f"Site label '{label}' used twice in step {self.__step}")
        known = self.__audit.kind_of(label)
        if known is not None and known != kind:
            raise DirectiveError(f"Site label '{label}' is already used for a {known.value}")
        self.__step_labels.add(label)
        self.__audit.register(label, kind, shape)

    def _elems(self, tensor: SecretTensor) -> np.ndarray:
        if tensor.backend is not self.__backend:
            raise TypeError("Secret tensor belongs to a different black box backend")
        return tensor._elems(self.__backend)  # pylint: disable=protected-access

    def iter_sites(self) -> Iterable[Tuple[str, SiteKind, Shape]]:
        for label, (kind, shape) in sorted(self.__audit.sites.items()):
            yield label, kind, shape
