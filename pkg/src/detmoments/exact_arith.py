"""Exact arithmetic substrate.

Rationals are :class:`fractions.Fraction`. Gamma values at integer and
half-integer arguments are carried as ``coefficient * pi**(k/2)`` so that
ratios of them stay exact. Big floats are ``gmpy2.mpfr`` values with the
precision always passed explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterable, Sequence

import gmpy2

Rational = Fraction
BigFloat = type(gmpy2.mpfr(0))

__all__ = [
    "BigFloat",
    "GammaValue",
    "Rational",
    "as_rational",
    "gamma_half",
    "hyp_terminating",
    "pochhammer",
    "simplest_between",
    "to_bigfloat",
]


def as_rational(x) -> Fraction:
    """Coerce ints, Fractions and exact strings ("3/2", "0.25") to a Fraction.

    Floats are rejected: they would silently smuggle rounding into an
    exact pipeline.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if type(x).__name__ == "mpq":
        return Fraction(int(x.numerator), int(x.denominator))
    raise TypeError(f"cannot interpret {x!r} ({type(x).__name__}) as an exact rational")


def to_bigfloat(x, precision: int) -> BigFloat:
    """Correctly rounded (round-to-nearest) conversion of a rational to ``precision`` bits."""
    if precision < 2:
        raise ValueError("precision must be at least 2 bits")
    q = as_rational(x)
    with gmpy2.context(precision=precision, round=gmpy2.RoundToNearest):
        return gmpy2.mpfr(gmpy2.mpq(q.numerator, q.denominator))


def pochhammer(x, n: int) -> Fraction:
    """Rising factorial x (x+1) ... (x+n-1); 1 for n = 0."""
    if n < 0:
        raise ValueError("pochhammer order must be nonnegative")
    x = as_rational(x)
    p, q = x.numerator, x.denominator
    num = 1
    for i in range(n):
        num *= p + i * q
    return Fraction(num, q**n)


@dataclass(frozen=True)
class GammaValue:
    """The exact number ``coefficient * pi**(pi_half_power / 2)``."""

    coefficient: Fraction
    pi_half_power: int = 0

    def __mul__(self, other):
        if isinstance(other, GammaValue):
            return GammaValue(self.coefficient * other.coefficient,
                              self.pi_half_power + other.pi_half_power)
        return GammaValue(self.coefficient * as_rational(other), self.pi_half_power)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, GammaValue):
            return GammaValue(self.coefficient / other.coefficient,
                              self.pi_half_power - other.pi_half_power)
        return GammaValue(self.coefficient / as_rational(other), self.pi_half_power)

    def __rtruediv__(self, other):
        return GammaValue(as_rational(other) / self.coefficient, -self.pi_half_power)

    def is_rational(self) -> bool:
        return self.pi_half_power == 0 or self.coefficient == 0

    def rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"value carries pi^({self.pi_half_power}/2) and is not rational")
        return self.coefficient

    def to_bigfloat(self, precision: int) -> BigFloat:
        c = to_bigfloat(self.coefficient, precision + 8)
        with gmpy2.context(precision=precision + 8):
            v = c * gmpy2.sqrt(gmpy2.const_pi()) ** self.pi_half_power
        with gmpy2.context(precision=precision):
            return gmpy2.mpfr(v)


def gamma_half(x) -> GammaValue:
    """Exact Gamma at a positive integer or half-integer argument."""
    x = as_rational(x)
    if x <= 0 or (2 * x).denominator != 1:
        raise ValueError(f"gamma_half needs a positive integer or half-integer, got {x}")
    if x.denominator == 1:
        return GammaValue(Fraction(factorial(int(x) - 1)), 0)
    m = int(x - Fraction(1, 2))
    # Gamma(m + 1/2) = (2m)! / (4^m m!) * sqrt(pi)
    return GammaValue(Fraction(factorial(2 * m), 4**m * factorial(m)), 1)


def _termination_index(upper: Sequence[Fraction]) -> int | None:
    k = None
    for u in upper:
        if u <= 0 and u.denominator == 1:
            k = -int(u) if k is None else min(k, -int(u))
    return k


def hyp_terminating(upper: Iterable, lower: Iterable, max_terms: int | None = None) -> Fraction:
    """Exact value of pFq(upper; lower; 1) for a terminating series.

    The series stops after the term of index K, where -K is the nonpositive
    integer upper parameter closest to zero. A zero upper parameter gives 1
    even when a lower parameter is a nonpositive integer. ``max_terms`` caps
    the number of summed terms and is required when nothing terminates.
    """
    upper = [as_rational(u) for u in upper]
    lower = [as_rational(v) for v in lower]
    last = _termination_index(upper)
    if max_terms is not None:
        if max_terms < 1:
            raise ValueError("max_terms must be positive")
        last = max_terms - 1 if last is None else min(last, max_terms - 1)
    if last is None:
        raise ValueError("series does not terminate; supply max_terms")
    if last == 0:
        return Fraction(1)
    for v in lower:
        if v <= 0 and v.denominator == 1 and -v < last:
            raise ZeroDivisionError(
                f"lower parameter {v} vanishes at term {int(-v) + 1} inside the summed range"
            )

    # Term ratio t_{k+1}/t_k = p(k)/q(k) over integers; scale factors are
    # the products of the parameter denominators.
    ud = 1
    for u in upper:
        ud *= u.denominator
    ld = 1
    for v in lower:
        ld *= v.denominator

    # Nested evaluation 1 + r0 (1 + r1 (1 + ...)) keeps everything integral.
    num, den = 1, 1
    for k in range(last - 1, -1, -1):
        p = ld
        for u in upper:
            p *= u.numerator + k * u.denominator
        q = (k + 1) * ud
        for v in lower:
            q *= v.numerator + k * v.denominator
        num, den = q * den + p * num, q * den
    return Fraction(num, den)


def simplest_between(lo, hi) -> Fraction:
    """The rational with the smallest denominator in the closed interval [lo, hi].

    Ties in denominator go to the smallest numerator in absolute value.
    """
    lo, hi = as_rational(lo), as_rational(hi)
    if lo > hi:
        raise ValueError("empty interval")
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -simplest_between(-hi, -lo)
    fl = lo.numerator // lo.denominator
    if fl == lo or fl + 1 <= hi:
        return Fraction(fl) if fl == lo else Fraction(fl + 1)
    # lo and hi share the integer part; recurse on the reciprocals of the fractional parts
    return fl + 1 / simplest_between(1 / (hi - fl), 1 / (lo - fl))
