"""Decimal-precision real numbers on top of mpmath.

Every real quantity that feeds a proof step is carried as a :class:`RealValue`,
an immutable mpf tagged with the number of decimal digits it was computed at.
Sign decisions go through :func:`certified_compare`, which refuses to decide
when the operands are within a few units in the last place of each other.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

import mpmath
from mpmath import mp, mpf

DEFAULT_PRECISION = 1050
MIN_PRECISION = 50
# Units in the last (decimal) place granted to every computed operand.
ULP_SLACK = 10


class PrecisionError(ArithmeticError):
    """A decision could not be made at the available precision."""


class DomainError(ValueError):
    pass


class CertifiedSign(enum.Enum):
    POSITIVE = 1
    NEGATIVE = -1
    ZERO_INDISTINGUISHABLE = 0


Number = Union[int, float, str, Fraction, mpf, "RealValue"]


def workdps(digits: int):
    """Context manager setting the mpmath decimal precision."""
    return mp.workdps(digits)


def to_mpf(x: Number, digits: int) -> mpf:
    if isinstance(x, RealValue):
        return x.value
    if isinstance(x, Fraction):
        with mp.workdps(digits):
            return mpf(x.numerator) / x.denominator
    with mp.workdps(digits):
        return mpf(x)


@dataclass(frozen=True)
class RealValue:
    value: mpf
    precision_digits: int

    def __post_init__(self) -> None:
        if self.precision_digits < MIN_PRECISION:
            raise ValueError(
                f"precision_digits must be >= {MIN_PRECISION}, got {self.precision_digits}"
            )

    @classmethod
    def of(cls, x: Number, precision_digits: int = DEFAULT_PRECISION) -> "RealValue":
        if isinstance(x, RealValue):
            return x
        return cls(to_mpf(x, precision_digits), precision_digits)

    @classmethod
    def compute(cls, fn: Callable[[], mpf], precision_digits: int = DEFAULT_PRECISION) -> "RealValue":
        """Evaluate ``fn`` under ``precision_digits`` and tag the result."""
        with mp.workdps(precision_digits):
            return cls(+fn(), precision_digits)

    def radius(self) -> mpf:
        """Outward rounding radius: ULP_SLACK decimal ulps of the value."""
        with mp.workdps(20):
            return ULP_SLACK * abs(self.value) * mpf(10) ** (-self.precision_digits)

    def _binary(self, other: Number, op: Callable[[mpf, mpf], mpf]) -> "RealValue":
        if isinstance(other, RealValue):
            digits = min(self.precision_digits, other.precision_digits)
            rhs = other.value
        else:
            digits = self.precision_digits
            rhs = to_mpf(other, digits)
        with mp.workdps(digits):
            return RealValue(op(self.value, rhs), digits)

    def __add__(self, other: Number) -> "RealValue":
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other: Number) -> "RealValue":
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other: Number) -> "RealValue":
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other: Number) -> "RealValue":
        return self._binary(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "RealValue":
        return self._binary(other, lambda a, b: a / b)

    def __rtruediv__(self, other: Number) -> "RealValue":
        return self._binary(other, lambda a, b: b / a)

    def __neg__(self) -> "RealValue":
        return RealValue(-self.value, self.precision_digits)

    def __abs__(self) -> "RealValue":
        return RealValue(abs(self.value), self.precision_digits)

    def __float__(self) -> float:
        return float(self.value)

    def nstr(self, digits: int = 15) -> str:
        return mpmath.nstr(self.value, digits)

    def __repr__(self) -> str:
        return f"RealValue({self.nstr(20)}, precision_digits={self.precision_digits})"


def certified_compare(x: Number, y: Number) -> CertifiedSign:
    """Sign of ``x - y`` that survives outward rounding of both operands.

    Plain Python numbers are treated as exact. The difference is formed
    exactly, then compared against the sum of the operands' radii.
    """
    xr = x if isinstance(x, RealValue) else None
    yr = y if isinstance(y, RealValue) else None
    digits = max(v.precision_digits for v in (xr, yr) if v is not None) if (xr or yr) else DEFAULT_PRECISION
    xv = to_mpf(x, digits)
    yv = to_mpf(y, digits)
    diff = mpmath.fsub(xv, yv, exact=True)
    radius = (xr.radius() if xr else 0) + (yr.radius() if yr else 0)
    if diff == 0 or abs(diff) <= radius:
        return CertifiedSign.ZERO_INDISTINGUISHABLE
    return CertifiedSign.POSITIVE if diff > 0 else CertifiedSign.NEGATIVE


def certified_positive(x: Number) -> bool:
    return certified_compare(x, 0) is CertifiedSign.POSITIVE


def eval_log(x: Number, precision_digits: int | None = None) -> RealValue:
    digits = precision_digits or (x.precision_digits if isinstance(x, RealValue) else DEFAULT_PRECISION)
    xv = to_mpf(x, digits)
    if xv <= 0:
        raise DomainError(f"log of nonpositive value {mpmath.nstr(xv, 10)}")
    with mp.workdps(digits):
        return RealValue(mpmath.log(xv), digits)


def dist_to_nearest_int(x: Number, precision_digits: int | None = None) -> RealValue:
    """||x||, the distance from x to the nearest integer."""
    digits = precision_digits or (x.precision_digits if isinstance(x, RealValue) else DEFAULT_PRECISION)
    xv = to_mpf(x, digits)
    with mp.workdps(digits):
        return RealValue(abs(xv - mpmath.nint(xv)), digits)


def to_fixed(x: mpf, bits: int) -> int:
    """floor(x * 2**bits) as an exact integer."""
    # floor() rounds its result to the context precision, so widen it first.
    with mp.workprec(max(mp.prec, bits + 64, mpmath.mpf(x).man.bit_length() + 64 if x else 0)):
        return int(mpmath.floor(mpmath.ldexp(x, bits)))


def double_and_recheck(fn: Callable[[int], CertifiedSign], precision_digits: int) -> CertifiedSign:
    """Decide a sign at ``precision_digits`` and confirm it at twice that.

    ``fn`` receives the working precision. A disagreement, or an undecided
    sign at both precisions, raises :class:`PrecisionError`.
    """
    first = fn(precision_digits)
    second = fn(2 * precision_digits)
    if second is CertifiedSign.ZERO_INDISTINGUISHABLE:
        raise PrecisionError("sign undecided at doubled precision")
    if first is not CertifiedSign.ZERO_INDISTINGUISHABLE and first is not second:
        raise PrecisionError(f"sign flipped under doubled precision: {first} -> {second}")
    return second
