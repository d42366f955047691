"""Separability probabilities P(alpha) = sum_{i>=0} f(alpha + i) with a certified tail."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exact_arith import BigFloat, as_rational, gamma_half, simplest_between, to_bigfloat

__all__ = ["SeriesResult", "f_term", "r_poly", "r_poly_nested", "sep_prob"]

# Limit of f(a+1)/f(a) as a -> oo: the Gamma arguments 3a, 5a over a, 2a, 5a
# contribute 3^3 5^5 / (2^2 5^5), times 2^-4 from the power of two.
ASYMPTOTIC_RATIO = Fraction(27, 64)

_R_COEFFS = (63000, 410694, 1042015, 1289125, 779750, 185000)


def r_poly(alpha) -> Fraction:
    a = as_rational(alpha)
    return sum((c * a**i for i, c in enumerate(_R_COEFFS)), Fraction(0))


def r_poly_nested(alpha) -> Fraction:
    a = as_rational(alpha)
    return a * (5 * a * (25 * a * (2 * a * (740 * a + 3119) + 10313) + 208403) + 410694) + 63000


def f_term(alpha) -> Fraction:
    """f(alpha) = P(alpha) - P(alpha + 1), exact for integer and half-integer alpha."""
    a = as_rational(alpha)
    if a <= 0 or (2 * a).denominator != 1:
        raise ValueError(f"f_term needs alpha > 0 with 2*alpha integral, got {a}")
    g = (gamma_half(3 * a + Fraction(5, 2)) * gamma_half(5 * a + 2)
         / (gamma_half(a + 1) * gamma_half(2 * a + 3) * gamma_half(5 * a + Fraction(13, 2))))
    return (g * r_poly(a) * Fraction(2) ** int(-4 * a - 6) / 3).rational()


@dataclass(frozen=True)
class SeriesResult:
    alpha: Fraction
    partial_sum: Fraction
    terms_used: int
    tail_bound: Fraction
    decimal: BigFloat

    @property
    def upper(self) -> Fraction:
        return self.partial_sum + self.tail_bound

    @property
    def identified(self) -> Fraction:
        """Smallest-denominator rational in the certified enclosure [partial_sum, upper].

        A guess, not a proof: it is only meaningful once the enclosure is
        narrow compared with 1/denominator^2, so tighten ``tol`` and check
        that it is stable.
        """
        return simplest_between(self.partial_sum, self.upper)


def _tol(tol) -> Fraction:
    if isinstance(tol, float):
        return Fraction(tol)
    try:
        return as_rational(tol)
    except TypeError:
        return Fraction(str(tol))


def sep_prob(alpha, tol=Fraction(1, 10**12), *, ratio_cap=Fraction(1, 2),
             max_terms: int = 10_000, precision: int = 128) -> SeriesResult:
    """Sum f(alpha + i) until the geometric tail bound drops to ``tol``.

    Once the last three term ratios are below ``ratio_cap`` and move
    monotonically (down, or up towards a limit below the cap), the omitted
    tail is at most ``term * cap / (1 - cap)``.
    """
    a = as_rational(alpha)
    tol = _tol(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    ratio_cap = as_rational(ratio_cap)
    if not 0 < ratio_cap < 1:
        raise ValueError("ratio_cap must lie in (0, 1)")
    increasing_ok = ASYMPTOTIC_RATIO < ratio_cap

    total = Fraction(0)
    prev = None
    ratios: list[Fraction] = []
    for i in range(max_terms):
        t = f_term(a + i)
        total += t
        if prev is not None:
            ratios.append(t / prev)
        prev = t
        if len(ratios) >= 3:
            r1, r2, r3 = ratios[-3:]
            below = r3 < ratio_cap and r2 < ratio_cap and r1 < ratio_cap
            monotone = (r1 > r2 > r3) or (increasing_ok and r1 < r2 < r3)
            if below and monotone:
                bound = t * ratio_cap / (1 - ratio_cap)
                if bound <= tol:
                    return SeriesResult(a, total, i + 1, bound, to_bigfloat(total, precision))
    raise RuntimeError(f"could not certify the tail of P({a}) within {max_terms} terms")
