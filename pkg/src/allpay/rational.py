"""Exact rational arithmetic with a first-class infinity.

Budgets, bids and thresholds are `fractions.Fraction` values throughout the
library.  Threshold computations additionally need a single infinite value
with the algebra ``1/INF == 0`` and ``c < INF`` for every finite ``c``; the
:data:`INF` singleton provides exactly that and raises on anything ambiguous
(e.g. ``INF - INF``).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union


class Infinity:
    """Positive infinity for threshold values.

    Supports the operations the threshold recurrence needs: ordering against
    finite rationals, `finite / INF == 0`, and `INF + finite == INF`.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("allpay.INF")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        if other is self:
            return self
        return self

    __radd__ = __add__

    def __sub__(self, other):
        if other is self:
            raise ArithmeticError("INF - INF is undefined")
        return self

    def __rsub__(self, other):
        raise ArithmeticError("finite - INF is undefined here")

    def __rtruediv__(self, other):
        if other is self:
            raise ArithmeticError("INF / INF is undefined")
        return Fraction(0)

    def __truediv__(self, other):
        if other is self:
            raise ArithmeticError("INF / INF is undefined")
        return self

    def __neg__(self):
        raise ArithmeticError("negative infinity is not modelled")


INF = Infinity()

#: A threshold value: an exact rational or the infinite sentinel.
Ratio = Union[Fraction, Infinity]


def is_inf(x: Ratio) -> bool:
    return x is INF


def parse_rational(text: str) -> Fraction:
    """Parse ``"7"``, ``"-3/4"`` or a plain decimal like ``"0.25"`` exactly."""
    text = text.strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational number: {text!r}") from exc


def format_rational(x: Ratio) -> str:
    """Render as ``num/den`` (``den`` kept even when 1, for stable CSV columns)."""
    if is_inf(x):
        return "inf"
    return f"{x.numerator}/{x.denominator}"
