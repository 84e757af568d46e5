"""Exact rational helpers shared by every module.

Slopes and degrees are :class:`fractions.Fraction` values throughout; this
module only adds parsing, canonical formatting and a few integer utilities.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import isqrt
from typing import Union

from .errors import DataFormatError, NotPrime

Rational = Fraction
RationalLike = Union[int, Fraction, str]

_FRACTION_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


def parse_fraction(text: str) -> Fraction:
    """Parse ``"num/den"`` or ``"num"`` into a Fraction.

    Decimal or float notation is rejected on purpose: every number that
    enters the workbench must already be exact.
    """
    if not isinstance(text, str):
        raise DataFormatError(f"expected a fraction string, got {text!r}")
    m = _FRACTION_RE.match(text)
    if m is None:
        raise DataFormatError(f"malformed fraction {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise DataFormatError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def to_rational(value: RationalLike) -> Fraction:
    if isinstance(value, bool):
        raise DataFormatError(f"boolean is not a number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_fraction(value)
    raise DataFormatError(f"cannot read {value!r} as an exact rational")


def fraction_str(value: RationalLike) -> str:
    """Canonical machine form: always ``"num/den"`` in lowest terms."""
    f = to_rational(value)
    return f"{f.numerator}/{f.denominator}"


def approx(value: RationalLike, digits: int = 6) -> str:
    """Decimal approximation, for human tables only."""
    return f"{float(to_rational(value)):.{digits}g}"


def ceil_fraction(value: Fraction) -> int:
    return -((-value.numerator) // value.denominator)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def require_prime(p: int) -> int:
    if isinstance(p, bool) or not isinstance(p, int) or not is_prime(p):
        raise NotPrime(p)
    return p


def primes_upto(limit: int) -> list[int]:
    if limit < 2:
        return []
    sieve = bytearray([1]) * (limit + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, int(limit**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i, flag in enumerate(sieve) if flag]


def integer_sqrt_exact(n: int) -> int | None:
    """Return the integer square root of ``n`` if ``n`` is a perfect square."""
    if n < 0:
        return None
    root = isqrt(n)
    return root if root * root == n else None
