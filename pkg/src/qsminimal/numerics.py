"""Exact rationals and working-precision reals.

Two real backends share one code path. ``precision <= 15`` selects IEEE
doubles held in float64 numpy arrays; anything larger selects mpmath with
``precision + GUARD_DIGITS`` decimal digits, held in object arrays so the
same vectorised expressions apply.
"""

from __future__ import annotations

import contextlib
import re
from fractions import Fraction
from numbers import Rational

import mpmath
import numpy as np

from .errors import ConfigError

DEFAULT_PRECISION = 50
FLOAT_PRECISION = 15
GUARD_DIGITS = 10

_RATIONAL_RE = re.compile(r"^\s*[+-]?\d+(\s*/\s*\d+)?\s*$")


def parse_rational(value) -> Fraction:
    """Parse an int, Fraction or "p/q" string; decimal floats are rejected."""
    if isinstance(value, bool):
        raise ConfigError(f"not a rational: {value!r}")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str) and _RATIONAL_RE.match(value):
        num, _, den = value.replace(" ", "").partition("/")
        if den and int(den) == 0:
            raise ConfigError(f"zero denominator in {value!r}")
        return Fraction(int(num), int(den) if den else 1)
    raise ConfigError(
        f"expected an exact rational (integer or 'p/q' string), got {value!r}"
    )


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def uses_float(precision: int) -> bool:
    return precision <= FLOAT_PRECISION


def working_precision(precision: int):
    if uses_float(precision):
        return contextlib.nullcontext()
    return mpmath.workdps(precision + GUARD_DIGITS)


def to_real(x, precision: int):
    """Convert an exact or inexact number to the backend's real type.

    Must be called inside ``working_precision(precision)`` for mpmath.
    """
    if uses_float(precision):
        return float(x)
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def ratio_array(numerators, denominator: int, precision: int) -> np.ndarray:
    """Reals ``n / denominator`` for a sequence of Python ints."""
    if uses_float(precision):
        # int / int true division is correctly rounded
        return np.array([n / denominator for n in numerators], dtype=np.float64)
    den = mpmath.mpf(denominator)
    out = np.empty(len(numerators), dtype=object)
    for i, n in enumerate(numerators):
        out[i] = mpmath.mpf(n) / den
    return out


def real_array(values, precision: int) -> np.ndarray:
    if uses_float(precision):
        return np.array([float(v) for v in values], dtype=np.float64)
    out = np.empty(len(values), dtype=object)
    for i, v in enumerate(values):
        out[i] = to_real(v, precision)
    return out


_mp_pow = np.frompyfunc(mpmath.power, 2, 1)
_mp_log = np.frompyfunc(mpmath.log, 1, 1)


def rpow(arr: np.ndarray, exponent, precision: int) -> np.ndarray:
    if uses_float(precision):
        return np.power(arr, float(exponent))
    return _mp_pow(arr, to_real(exponent, precision))


def rlog(arr: np.ndarray, precision: int) -> np.ndarray:
    if uses_float(precision):
        return np.log(arr)
    return _mp_log(arr)


def log_rational(x: Fraction, precision: int = DEFAULT_PRECISION):
    """Natural log of an exact positive rational at ``precision`` digits."""
    x = Fraction(x)
    with mpmath.workdps(max(precision, FLOAT_PRECISION) + GUARD_DIGITS):
        return mpmath.log(x.numerator) - mpmath.log(x.denominator)


def resolution(precision: int) -> float:
    """Smallest relative difference treated as distinguishable."""
    if uses_float(precision):
        return 4 * np.finfo(np.float64).eps
    return 10.0 ** (-(precision + GUARD_DIGITS // 2))
