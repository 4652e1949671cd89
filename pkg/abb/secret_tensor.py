# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Shaped arrays of secret backend values."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any, Optional, Sequence, Tuple, Union

import numpy as np

from abb.sites import LINEAR_PROVENANCE

if TYPE_CHECKING:
    from abb.backends import Backend


class SecretTensor:
    """Immutable array of secret values held inside an arithmetic black box.

    The elements can only be revealed through ArithmeticBlackBox.open. Everything else that is
    visible (shape, provenance, backend name) is public metadata.
    """
    __slots__ = ("__elems", "__backend", "__provenance")

    def __init__(self, elems: np.ndarray, backend: Backend, provenance: str):
        elems = np.asarray(elems, dtype=backend.dtype)
        elems.setflags(write=False)
        self.__elems = elems
        self.__backend = backend
        self.__provenance = provenance

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.__elems.shape

    @property
    def ndim(self) -> int:
        return self.__elems.ndim

    @property
    def size(self) -> int:
        return int(self.__elems.size)

    @property
    def provenance(self) -> str:
        """Label of the operation that produced the tensor, or one of the non-multiplicative provenances."""
        return self.__provenance

    @property
    def backend(self) -> Backend:
        return self.__backend

    def _elems(self, backend: Backend) -> np.ndarray:
        # only the backend that owns the values gets to see them
        if backend is not self.__backend:
            raise TypeError("Secret tensor elements are only accessible to their own backend")
        return self.__elems

    def _derive(self, elems: np.ndarray, provenance: Optional[str] = None) -> SecretTensor:
        return SecretTensor(elems, self.__backend, self.__provenance if provenance is None else provenance)

    def reshape(self, *shape: Union[int, Sequence[int]]) -> SecretTensor:
        return self._derive(self.__elems.reshape(*shape))

    def transpose(self, *axes: int) -> SecretTensor:
        return self._derive(self.__elems.transpose(*axes) if axes else self.__elems.T)

    @property
    def T(self) -> SecretTensor:  # pylint: disable=invalid-name
        return self.transpose()

    def expand_dims(self, axis: int) -> SecretTensor:
        return self._derive(np.expand_dims(self.__elems, axis))

    def broadcast_to(self, shape: Sequence[int]) -> SecretTensor:
        return self._derive(np.broadcast_to(self.__elems, tuple(shape)))

    def sum(self, axis: Optional[Union[int, Tuple[int, ...]]] = None, keepdims: bool = False) -> SecretTensor:
        return self._derive(self.__backend.sum(self.__elems, axis=axis, keepdims=keepdims), LINEAR_PROVENANCE)

    def __getitem__(self, index: Any) -> SecretTensor:
        return self._derive(np.asarray(self.__elems[index], dtype=self.__backend.dtype))

    def __len__(self) -> int:
        return len(self.__elems)

    def __array__(self, *args, **kwargs):
        raise TypeError("Secret tensors cannot be converted to plaintext arrays; open them through the black box")

    def __bool__(self):
        raise TypeError("Secret tensors have no truth value")

    def __float__(self):
        raise TypeError("Secret tensors cannot be converted to plaintext numbers")

    def __repr__(self) -> str:
        return f"SecretTensor(shape={self.shape}, backend={self.__backend.name}, provenance={self.__provenance})"
