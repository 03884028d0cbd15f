"""Exact rational parsing and formatting.

Every numeric quantity in the package is a :class:`fractions.Fraction`.
Floats are refused at the boundary so that saturation tests stay exact.
"""
from __future__ import annotations

from decimal import Decimal
from fractions import Fraction
from numbers import Rational
from typing import Union

RationalLike = Union[str, int, Fraction]


def as_rational(value: RationalLike) -> Fraction:
    """Convert ``value`` to a Fraction.

    Accepts ints, Fractions, and strings holding either a decimal literal
    (``"3.75"``, ``"1e-2"``) or a ``num/den`` literal. Floats raise TypeError.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, float):
        raise TypeError(f"float {value!r} rejected; pass a decimal string instead")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, Decimal):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty numeric string")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse {value!r} as a rational") from exc
    raise TypeError(f"unsupported numeric type {type(value).__name__}")


def _valuation(n: int, p: int) -> int:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def _terminates(den: int) -> bool:
    for p in (2, 5):
        while den % p == 0:
            den //= p
    return den == 1


def format_rational(q: Fraction) -> str:
    """Exact decimal text when the expansion terminates, else ``num/den``."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    if not _terminates(q.denominator):
        return f"{q.numerator}/{q.denominator}"
    digits = max(_valuation(q.denominator, 2), _valuation(q.denominator, 5))
    scaled = abs(q.numerator) * 10**digits // q.denominator
    sign = "-" if q < 0 else ""
    whole, frac = divmod(scaled, 10**digits)
    text = f"{sign}{whole}.{frac:0{digits}d}".rstrip("0")
    return text
