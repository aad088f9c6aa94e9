"""Exact arithmetic in Z_(2), the integers localized at 2.

Elements are fractions whose reduced denominator is odd.  The class is a
thin wrapper over exact integer pairs; it exists so that 2-locality is a
construction-time invariant instead of something checked downstream.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd


class EvenDenominator(ArithmeticError):
    """The value has an even denominator in lowest terms, so it is not 2-local."""


def _reduce(numerator: int, denominator: int) -> tuple[int, int]:
    if denominator == 0:
        raise ZeroDivisionError("denominator must be nonzero")
    if denominator < 0:
        numerator, denominator = -numerator, -denominator
    g = gcd(numerator, denominator)
    if g:
        numerator //= g
        denominator //= g
    return numerator, denominator


class TwoLocalNumber:
    """A 2-local rational: numerator over a positive odd denominator.

    Instances are immutable.  Sums, differences and products stay in the
    ring; division is allowed only when the divisor has an odd numerator.
    """

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator: int, denominator: int = 1):
        numerator, denominator = _reduce(numerator, denominator)
        if denominator % 2 == 0:
            raise EvenDenominator(
                f"{numerator}/{denominator} is not 2-local (even denominator)"
            )
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "denominator", denominator)

    def __setattr__(self, name, value):
        raise AttributeError("TwoLocalNumber is immutable")

    @classmethod
    def from_fraction(cls, q) -> "TwoLocalNumber":
        q = Fraction(q)
        return cls(q.numerator, q.denominator)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    # -- ring operations -------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, TwoLocalNumber):
            return other
        if isinstance(other, int):
            return TwoLocalNumber(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return TwoLocalNumber(
            self.numerator * other.denominator + other.numerator * self.denominator,
            self.denominator * other.denominator,
        )

    __radd__ = __add__

    def __neg__(self):
        return TwoLocalNumber(-self.numerator, self.denominator)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return TwoLocalNumber(
            self.numerator * other.numerator, self.denominator * other.denominator
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.numerator == 0:
            raise ZeroDivisionError("division by zero")
        if other.numerator % 2 == 0:
            raise EvenDenominator(
                f"division by {other!r} leaves the 2-local integers"
            )
        return TwoLocalNumber(
            self.numerator * other.denominator, self.denominator * other.numerator
        )

    # -- structure --------------------------------------------------------

    def valuation(self):
        """2-adic valuation; None for zero (conventionally +infinity)."""
        if self.numerator == 0:
            return None
        n, v = abs(self.numerator), 0
        while n % 2 == 0:
            n //= 2
            v += 1
        return v

    def residue_mod_2(self) -> int:
        """Image in Z/2 (the denominator is odd, hence invertible mod 2)."""
        return self.numerator % 2

    def is_zero(self) -> bool:
        return self.numerator == 0

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self.numerator, self.denominator) == (other.numerator, other.denominator)

    def __hash__(self):
        return hash(Fraction(self.numerator, self.denominator))

    def __bool__(self):
        return self.numerator != 0

    def __repr__(self):
        if self.denominator == 1:
            return f"TwoLocalNumber({self.numerator})"
        return f"TwoLocalNumber({self.numerator}, {self.denominator})"

    def __str__(self):
        if self.denominator == 1:
            return str(self.numerator)
        return f"{self.numerator}/{self.denominator}"


def normalize(numerator: int, denominator: int) -> TwoLocalNumber:
    """Canonical reduced 2-local form of numerator/denominator.

    Raises EvenDenominator when the reduced denominator is even.
    """
    return TwoLocalNumber(numerator, denominator)


def is_two_local(q) -> bool:
    """True when the exact rational q lies in Z_(2)."""
    return Fraction(q).denominator % 2 == 1
