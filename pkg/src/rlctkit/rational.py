"""Exact rationals with a positive-infinity sentinel.

All ratio quantities are ``fractions.Fraction``.  A threshold may also be
``INF``, which compares greater than every rational.  ``1/INF`` is 0.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union


class _PositiveInfinity:
    """Singleton standing for +infinity among exact rationals."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __hash__(self):
        return hash("rlctkit-inf")

    def __eq__(self, other):
        return other is self

    def __ne__(self, other):
        return other is not self

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __reduce__(self):
        return (_PositiveInfinity, ())


INF = _PositiveInfinity()

Extended = Union[Fraction, _PositiveInfinity]


def is_inf(x) -> bool:
    return x is INF


def reciprocal(x: Extended) -> Extended:
    """1/x with 1/0 = INF and 1/INF = 0; negative inputs are rejected."""
    if x is INF:
        return Fraction(0)
    x = Fraction(x)
    if x < 0:
        raise ValueError("reciprocal of a negative ratio is not a threshold")
    if x == 0:
        return INF
    return 1 / x


def to_fraction(value) -> Fraction:
    """Parse ints, Fractions and strings like '3/4' or '-2'."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational")
        return Fraction(text)
    raise TypeError(f"cannot read {value!r} as an exact rational")


def parse_extended(value) -> Extended:
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "+inf"):
        return INF
    if value is INF:
        return INF
    return to_fraction(value)


def format_rational(x: Extended) -> str:
    """'3/4', '2', '-1/2' or 'inf'."""
    if x is INF:
        return "inf"
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"
