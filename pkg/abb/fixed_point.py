# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Fixed-point encoding of reals as elements of the ring Z_M."""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from tools.exceptions import FixedPointOverflowError

DEFAULT_MODULUS_BITS = 64
DEFAULT_FRAC_BITS = 16
DEFAULT_TOTAL_VALUE_BITS = 31

# converts exact integral floats or numpy integers to Python integers elementwise
_to_python_int = np.frompyfunc(int, 1, 1)


@dataclass(frozen=True)
class FixedPointParams:
    """Ring size M = 2^modulus_bits, precision f and represented bit length k (incl. sign)."""
    modulus_bits: int = DEFAULT_MODULUS_BITS
    frac_bits: int = DEFAULT_FRAC_BITS
    total_value_bits: int = DEFAULT_TOTAL_VALUE_BITS

    def __post_init__(self):
        if not 0 <= self.frac_bits < self.total_value_bits < self.modulus_bits:
            raise ValueError(
                f"Fixed-point parameters must satisfy f < k < log2 M, got f={self.frac_bits}, "
                f"k={self.total_value_bits}, log2 M={self.modulus_bits}")
        if 2 * self.total_value_bits + 1 > self.modulus_bits:
            raise ValueError(
                f"A product of two {self.total_value_bits}-bit values wraps a "
                f"{self.modulus_bits}-bit ring (need 2k + 1 <= log2 M)")

    @property
    def modulus(self) -> int:
        return 1 << self.modulus_bits

    @property
    def scale(self) -> int:
        return 1 << self.frac_bits

    @property
    def ulp(self) -> float:
        return 2.0 ** -self.frac_bits

    @property
    def max_magnitude(self) -> float:
        """Exclusive bound on the magnitude of encodable reals."""
        return 2.0 ** (self.total_value_bits - self.frac_bits - 1)

    @property
    def ring_half(self) -> int:
        return 1 << (self.modulus_bits - 1)


@dataclass(frozen=True)
class RingValue:
    """One element of Z_M carrying the fixed-point parameters it was encoded with."""
    raw: int
    params: FixedPointParams

    def __post_init__(self):
        if not 0 <= self.raw < self.params.modulus:
            raise ValueError(f"Raw value {self.raw} is outside [0, 2^{self.params.modulus_bits})")


def to_signed(raw: int, params: FixedPointParams) -> int:
    """Centered interpretation of a ring element: the upper half of the ring is negative."""
    return raw - params.modulus if raw >= params.ring_half else raw


def encode(value: float, params: FixedPointParams) -> RingValue:
    """Encodes a real as round(r * 2^f) mod M (two's complement for negatives)."""
    if not math.isfinite(value) or abs(value) >= params.max_magnitude:
        raise FixedPointOverflowError(
            f"{value} is outside the representable range (-{params.max_magnitude}, {params.max_magnitude})")
    scaled = math.floor(value * params.scale + 0.5)
    return RingValue(raw=scaled % params.modulus, params=params)


def decode(value: RingValue) -> float:
    return to_signed(value.raw, value.params) / value.params.scale


def encode_array(values: Union[np.ndarray, float], params: FixedPointParams,
                 check_range: bool = True) -> np.ndarray:
    """Encodes an array of reals into an object array of ring elements in [0, M)."""
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise FixedPointOverflowError("Cannot encode non-finite values")
    if check_range and values.size and np.max(np.abs(values)) >= params.max_magnitude:
        raise FixedPointOverflowError(
            f"Value {np.max(np.abs(values))} is outside the representable range "
            f"(-{params.max_magnitude}, {params.max_magnitude})")
    scaled = np.floor(values * params.scale + 0.5)
    integers = np.asarray(_to_python_int(scaled), dtype=object).reshape(values.shape)
    return integers % params.modulus


def signed_array(raw: np.ndarray, params: FixedPointParams) -> np.ndarray:
    """Centered interpretation of an object array of ring elements."""
    raw = np.asarray(raw, dtype=object)
    return np.where(raw >= params.ring_half, raw - params.modulus, raw)


def decode_array(raw: np.ndarray, params: FixedPointParams) -> np.ndarray:
    signed = signed_array(raw, params)
    decoded = [integer / params.scale for integer in signed.ravel()]
    return np.asarray(decoded, dtype=np.float64).reshape(np.shape(raw))
