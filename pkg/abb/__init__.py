# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Arithmetic black box with real-valued and fixed-point backends."""

from abb.backends import FIXED_BACKEND, REAL_BACKEND, Backend, FixedPointBackend, RealBackend, make_backend
from abb.black_box import ArithmeticBlackBox, DirectiveSource
from abb.fixed_point import FixedPointParams, RingValue, decode, encode
from abb.secret_tensor import SecretTensor
from abb.sites import ANY_STEP, ErrorDirective, FlipDirective, SiteId, SiteKind

__all__ = [
    "ANY_STEP", "ArithmeticBlackBox", "Backend", "DirectiveSource", "ErrorDirective", "FIXED_BACKEND",
    "FixedPointBackend", "FixedPointParams", "FlipDirective", "REAL_BACKEND", "RealBackend", "RingValue",
    "SecretTensor", "SiteId", "SiteKind", "decode", "encode", "make_backend",
]
