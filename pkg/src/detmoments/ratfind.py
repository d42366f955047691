"""Find exact rationals behind high-precision decimal estimates."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Iterable

import gmpy2

from .exact_arith import BigFloat, to_bigfloat

__all__ = [
    "RationalCandidate",
    "cf_candidates",
    "continued_fraction",
    "factorize_small",
    "parse_decimal",
    "smooth_search",
]


def parse_decimal(text: str) -> tuple[Fraction, int]:
    """Exact value of a decimal string and the number of digits after the point.

    A trailing ellipsis ("0.0804954...") is allowed and ignored.
    """
    s = str(text).strip()
    for tail in ("...", "…"):
        if s.endswith(tail):
            s = s[: -len(tail)]
    try:
        d = Decimal(s)
    except InvalidOperation:
        raise ValueError(f"cannot parse decimal {text!r}") from None
    if not d.is_finite():
        raise ValueError(f"cannot parse decimal {text!r}")
    places = max(0, -d.as_tuple().exponent)
    return Fraction(d), places


def default_tolerance(places: int) -> Fraction:
    """Five units in the last trusted place."""
    return Fraction(5, 10**places)


def factorize_small(n: int, bound: int = 10**6) -> tuple[list[tuple[int, int]], int]:
    """Trial division by every prime up to ``bound``; returns (factors, cofactor).

    The sign of n is dropped. The cofactor is 1 when n factored completely.
    """
    n = abs(int(n))
    if n == 0:
        raise ValueError("cannot factorize 0")
    out = []
    p = 2
    while p <= bound and p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p = 3 if p == 2 else p + 2
    if n > 1 and n <= bound:
        out.append((n, 1))
        n = 1
    return out, n


@dataclass(frozen=True)
class RationalCandidate:
    value: Fraction
    abs_error: Fraction
    numerator_factorization: tuple
    denominator_factorization: tuple
    method: str
    numerator_cofactor: int = 1
    denominator_cofactor: int = 1

    @classmethod
    def build(cls, value: Fraction, target: Fraction, method: str, bound: int = 10**6):
        nf, nc = factorize_small(value.numerator, bound) if value.numerator else ([], 0)
        df, dc = factorize_small(value.denominator, bound)
        return cls(value, abs(value - target), tuple(nf), tuple(df), method, nc, dc)

    def error_bigfloat(self, precision: int = 128) -> BigFloat:
        return to_bigfloat(self.abs_error, precision)

    def to_dict(self) -> dict:
        def fmt(f):
            return [[p, e] for p, e in f]
        return {
            "value": str(self.value),
            "numerator": str(self.value.numerator),
            "denominator": str(self.value.denominator),
            "abs_error": str(self.abs_error),
            "abs_error_decimal": format(float(self.abs_error), ".6e"),
            "numerator_factorization": fmt(self.numerator_factorization),
            "numerator_cofactor": str(self.numerator_cofactor),
            "denominator_factorization": fmt(self.denominator_factorization),
            "denominator_cofactor": str(self.denominator_cofactor),
            "method": self.method,
        }


def continued_fraction(x: Fraction) -> list[int]:
    terms = []
    p, q = x.numerator, x.denominator
    while q:
        a, r = divmod(p, q)
        terms.append(a)
        p, q = q, r
    return terms


def _approximants(x: Fraction, max_den: int):
    """Convergents and semiconvergents of x with denominator <= max_den."""
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    for a in continued_fraction(x):
        # semiconvergents (j h1 + h0)/(j k1 + k0), j = 1..a; j = a is the convergent
        for j in range(1, a + 1):
            k = j * k1 + k0
            if k > max_den:
                return
            yield Fraction(j * h1 + h0, k)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0


def cf_candidates(decimal, max_denominator: int, max_results: int = 10) -> list[RationalCandidate]:
    """Rationals with denominator <= max_denominator from the continued fraction of the input.

    Sorted by absolute error (ties by denominator); the first entry is the
    best rational approximation with that denominator bound.
    """
    if max_denominator < 1:
        raise ValueError("max_denominator must be at least 1")
    x, _ = parse_decimal(decimal) if isinstance(decimal, str) else (Fraction(decimal), 0)
    seen = {}
    for q in _approximants(x, max_denominator):
        seen[q] = None
    # floor(x) / 1 is always admissible
    seen[Fraction(x.numerator // x.denominator)] = None
    best = x.limit_denominator(max_denominator)
    seen[best] = None
    ranked = sorted(seen, key=lambda q: (abs(q - x), q.denominator))
    return [RationalCandidate.build(q, x, "continued_fraction") for q in ranked[:max_results]]


def _smooth_numbers(primes: list[int], max_exponent: int, cap: int) -> Iterable[int]:
    """All products of the primes with exponents <= max_exponent, ascending, up to cap."""
    heap = [(1, (0,) * len(primes))]
    seen = {1}
    while heap:
        d, exps = heapq.heappop(heap)
        yield d
        for i, p in enumerate(primes):
            if exps[i] < max_exponent:
                nd = d * p
                if nd <= cap and nd not in seen:
                    seen.add(nd)
                    ne = exps[:i] + (exps[i] + 1,) + exps[i + 1:]
                    heapq.heappush(heap, (nd, ne))


def smooth_search(decimal, prime_set: Iterable[int], max_exponent: int = 3, tol=None, *,
                  max_denominator: int = 10**12, max_results: int | None = None
                  ) -> list[RationalCandidate]:
    """Rationals num/den with den a product of the given primes, within tol of the decimal.

    ``tol`` defaults to five units in the last given decimal place. Results
    are distinct reduced values sorted by error, then denominator.
    """
    primes = sorted({int(p) for p in prime_set})
    if not primes:
        raise ValueError("prime_set must be nonempty")
    if any(p < 2 for p in primes):
        raise ValueError("prime_set must contain primes")
    if isinstance(decimal, str):
        x, places = parse_decimal(decimal)
    else:
        x, places = Fraction(decimal), 0
    if tol is None:
        tol = default_tolerance(places) if places else Fraction(0)
    elif isinstance(tol, float):
        tol = Fraction(tol)
    elif not isinstance(tol, Fraction):
        tol = Fraction(str(tol))
    if tol < 0:
        raise ValueError("tol must be nonnegative")

    found = {}
    for d in _smooth_numbers(primes, max_exponent, max_denominator):
        # nearest integer to x * d (ties round up)
        num = (2 * x.numerator * d + x.denominator) // (2 * x.denominator)
        q = Fraction(num, d)
        if abs(q - x) <= tol and q not in found:
            found[q] = None
    ranked = sorted(found, key=lambda q: (abs(q - x), q.denominator))
    if max_results is not None:
        ranked = ranked[:max_results]
    return [RationalCandidate.build(q, x, "smooth_search") for q in ranked]


def primes_between(lo: int, hi: int) -> list[int]:
    """Primes in [lo, hi]; handy for building consecutive-prime denominator sets."""
    return [p for p in range(max(2, lo), hi + 1) if gmpy2.is_prime(p)]
