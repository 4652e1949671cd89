# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Value backends of the arithmetic black box: real-valued and exact fixed-point over Z_M."""

from abc import ABC, abstractmethod
from typing import Optional, Tuple, Union

import numpy as np

from abb.fixed_point import FixedPointParams, decode_array, encode_array, signed_array
from tools.exceptions import ConfigValueError, FixedPointOverflowError, NonFiniteValueError

Axis = Optional[Union[int, Tuple[int, ...]]]
PublicValue = Union[float, np.ndarray]

REAL_BACKEND = "real"
FIXED_BACKEND = "fixed"


class Backend(ABC):
    """Arithmetic on the element arrays of secret tensors.

    The black box calls these methods; nothing outside the abb package should.
    """
    name: str = ""
    dtype: type = object

    @abstractmethod
    def encode(self, values: PublicValue) -> np.ndarray:
        """Embeds plaintext reals as backend elements."""

    @abstractmethod
    def decode(self, elems: np.ndarray) -> np.ndarray:
        """Returns the float64 plaintext of backend elements."""

    @abstractmethod
    def lin_comb(self, c1: PublicValue, a: np.ndarray, c2: PublicValue, b: np.ndarray) -> np.ndarray:
        """Computes c1 * a + c2 * b for public constants c1 and c2."""

    @abstractmethod
    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Exact elementwise addition."""

    @abstractmethod
    def multiply(self, a: np.ndarray, b: np.ndarray, label: str) -> np.ndarray:
        """Truncated elementwise product."""

    @abstractmethod
    def matmul(self, a: np.ndarray, b: np.ndarray, label: str) -> np.ndarray:
        """Truncated matrix product, truncating once after accumulation."""

    @abstractmethod
    def sum(self, a: np.ndarray, axis: Axis = None, keepdims: bool = False) -> np.ndarray:
        """Exact sum along the given axes."""

    @abstractmethod
    def greater_equal(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Honest comparison bits 1(a >= b) as a boolean array."""

    def describe(self) -> str:
        return self.name


class RealBackend(Backend):
    """Plain float64 arithmetic. Matches the fixed-point backend up to rounding for in-range values."""
    name = REAL_BACKEND
    dtype = np.float64

    def encode(self, values: PublicValue) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise NonFiniteValueError("Cannot store non-finite values")
        return values.copy()

    def decode(self, elems: np.ndarray) -> np.ndarray:
        return np.array(elems, dtype=np.float64)

    def lin_comb(self, c1: PublicValue, a: np.ndarray, c2: PublicValue, b: np.ndarray) -> np.ndarray:
        return self._checked(np.asarray(c1) * a + np.asarray(c2) * b, "linear combination")

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self._checked(a + b, "addition")

    def multiply(self, a: np.ndarray, b: np.ndarray, label: str) -> np.ndarray:
        return self._checked(a * b, label)

    def matmul(self, a: np.ndarray, b: np.ndarray, label: str) -> np.ndarray:
        return self._checked(np.matmul(a, b), label)

    def sum(self, a: np.ndarray, axis: Axis = None, keepdims: bool = False) -> np.ndarray:
        return self._checked(np.sum(a, axis=axis, keepdims=keepdims), "sum")

    def greater_equal(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.greater_equal(a, b)

    @staticmethod
    def _checked(result: np.ndarray, label: str) -> np.ndarray:
        result = np.asarray(result, dtype=np.float64)
        if not np.all(np.isfinite(result)):
            raise NonFiniteValueError(f"Non-finite value produced at {label}")
        return result


class FixedPointBackend(Backend):
    """Exact arithmetic on ring elements in [0, M), stored as Python integers in object arrays.

    Public constants are encoded with the same precision and the linear combination is truncated,
    which makes the scale come out right for encoded constants. Products are truncated by flooring.
    """
    name = FIXED_BACKEND
    dtype = object

    def __init__(self, params: Optional[FixedPointParams] = None):
        self.__params = params or FixedPointParams()

    @property
    def params(self) -> FixedPointParams:
        return self.__params

    def describe(self) -> str:
        return (f"{self.name}(M=2^{self.__params.modulus_bits}, f={self.__params.frac_bits}, "
                f"k={self.__params.total_value_bits})")

    def encode(self, values: PublicValue) -> np.ndarray:
        return encode_array(values, self.__params)

    def decode(self, elems: np.ndarray) -> np.ndarray:
        return decode_array(elems, self.__params)

    def lin_comb(self, c1: PublicValue, a: np.ndarray, c2: PublicValue, b: np.ndarray) -> np.ndarray:
        scaled = (self._signed_constant(c1) * signed_array(a, self.__params) +
                  self._signed_constant(c2) * signed_array(b, self.__params))
        return self._reduce(scaled // self.__params.scale, "linear combination")

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self._reduce(signed_array(a, self.__params) + signed_array(b, self.__params), "addition")

    def multiply(self, a: np.ndarray, b: np.ndarray, label: str) -> np.ndarray:
        left, right = self._operands(a, b, label)
        return self._reduce((left * right) // self.__params.scale, label)

    def matmul(self, a: np.ndarray, b: np.ndarray, label: str) -> np.ndarray:
        left, right = self._operands(a, b, label)
        return self._reduce(np.matmul(left, right) // self.__params.scale, label)

    def sum(self, a: np.ndarray, axis: Axis = None, keepdims: bool = False) -> np.ndarray:
        signed = signed_array(a, self.__params)
        return self._reduce(np.sum(signed, axis=axis, keepdims=keepdims), "sum")

    def greater_equal(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        difference = signed_array(a, self.__params) - signed_array(b, self.__params)
        return np.asarray(difference >= 0, dtype=bool)

    def _signed_constant(self, constant: PublicValue) -> np.ndarray:
        return signed_array(encode_array(constant, self.__params, check_range=False), self.__params)

    def _operands(self, a: np.ndarray, b: np.ndarray, label: str) -> Tuple[np.ndarray, np.ndarray]:
        # values beyond k bits may wrap the ring in the product
        bound = 1 << (self.__params.total_value_bits - 1)
        left = signed_array(a, self.__params)
        right = signed_array(b, self.__params)
        for operand in (left, right):
            if operand.size and max(abs(value) for value in operand.ravel()) >= bound:
                raise FixedPointOverflowError(
                    f"Operand of {label} exceeds {self.__params.total_value_bits} bits "
                    f"(|value| >= {self.__params.max_magnitude})")
        return left, right

    def _reduce(self, signed: np.ndarray, label: str) -> np.ndarray:
        signed = np.asarray(signed, dtype=object)
        half = self.__params.ring_half
        if signed.size and any(value >= half or value < -half for value in signed.ravel()):
            raise FixedPointOverflowError(f"Result of {label} wrapped around the ring")
        return signed % self.__params.modulus


def make_backend(name: str, params: Optional[FixedPointParams] = None) -> Backend:
    if name == REAL_BACKEND:
        return RealBackend()
    if name == FIXED_BACKEND:
        return FixedPointBackend(params)
    raise ConfigValueError(f"Unknown backend '{name}'")
