"""Exact moments of determinants of random two-qubit density matrices.

Four families, all indexed by the Dyson-like parameter ``alpha`` (1/2 real,
1 complex, 2 quaternionic, any positive rational in between):

* ``PT_HS``        E|rho^PT|^n under Hilbert-Schmidt measure
* ``BALANCED_HS``  E(|rho| |rho^PT|)^n under Hilbert-Schmidt measure
* ``DET_HS``       E|rho|^n under Hilbert-Schmidt measure
* ``DET_BURES``    E|rho|^n under Bures measure
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .exact_arith import GammaValue, as_rational, gamma_half, hyp_terminating, pochhammer
from .interval import SupportInterval

__all__ = [
    "MomentFamily",
    "MomentTable",
    "beta_product_params",
    "moment_balanced",
    "moment_bures",
    "moment_bures_ratio",
    "moment_det",
    "moment_pt",
    "moment_table",
]

HALF = Fraction(1, 2)


class MomentFamily(enum.Enum):
    PT_HS = "pt-hs"
    BALANCED_HS = "balanced-hs"
    DET_HS = "det-hs"
    DET_BURES = "det-bures"

    @property
    def support(self) -> SupportInterval:
        return _SUPPORTS[self]

    @classmethod
    def parse(cls, name) -> "MomentFamily":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        for fam in cls:
            if fam.value == key:
                return fam
        raise ValueError(f"unknown moment family {name!r}; expected one of "
                         + ", ".join(f.value for f in cls))


_SUPPORTS = {
    MomentFamily.PT_HS: SupportInterval(Fraction(-1, 16), Fraction(1, 256)),
    # -1/110592 = -2^-12 3^-3, 1/65536 = 256^-2
    MomentFamily.BALANCED_HS: SupportInterval(Fraction(-1, 2**12 * 3**3), Fraction(1, 2**16)),
    MomentFamily.DET_HS: SupportInterval(Fraction(0), Fraction(1, 256)),
    MomentFamily.DET_BURES: SupportInterval(Fraction(0), Fraction(1, 256)),
}


def _check_alpha(alpha) -> Fraction:
    alpha = as_rational(alpha)
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return alpha


def _check_order(n: int) -> int:
    if n < 0 or int(n) != n:
        raise ValueError(f"moment order must be a nonnegative integer, got {n}")
    return int(n)


def moment_pt(alpha, n: int) -> Fraction:
    """E|rho^PT|^n; n = 0 is normalised to 1 (the two-term formula gives 2 there)."""
    alpha = _check_alpha(alpha)
    n = _check_order(n)
    if n == 0:
        return Fraction(1)
    shared = pochhammer(3 * alpha + Fraction(3, 2), n) * pochhammer(6 * alpha + Fraction(5, 2), 2 * n)
    first = (factorial(n) * pochhammer(alpha + 1, n) * pochhammer(2 * alpha + 1, n)
             / (2 ** (6 * n) * shared))
    second = (pochhammer(-2 * n - 1 - 5 * alpha, n) * pochhammer(alpha, n)
              * pochhammer(alpha + HALF, n) / (2 ** (4 * n) * shared))
    return first + second * _pt_hyp(alpha, n)


def _pt_hyp(alpha: Fraction, n: int) -> Fraction:
    return hyp_terminating(
        [Fraction(-(n - 2), 2), Fraction(-(n - 1), 2), Fraction(-n), alpha + 1, 2 * alpha + 1],
        [Fraction(1 - n), n + 2 + 5 * alpha, 1 - n - alpha, HALF - n - alpha],
    )


def _balanced_hyp(alpha: Fraction, n: int) -> Fraction:
    return hyp_terminating(
        [Fraction(-n), alpha, alpha + HALF, -4 * n - 1 - 5 * alpha],
        [-2 * n - alpha, -2 * n - 2 * alpha, HALF - n],
    )


def moment_balanced(alpha, n: int) -> Fraction:
    """E(|rho| |rho^PT|)^n."""
    alpha = _check_alpha(alpha)
    n = _check_order(n)
    if n == 0:
        return Fraction(1)
    pre = (factorial(2 * n) * pochhammer(1 + alpha, 2 * n) * pochhammer(1 + 2 * alpha, 2 * n)
           / (2 ** (12 * n) * pochhammer(3 * alpha + Fraction(3, 2), 2 * n)
              * pochhammer(6 * alpha + Fraction(5, 2), 4 * n)))
    return pre * _balanced_hyp(alpha, n)


def moment_det(alpha, n: int) -> Fraction:
    """E|rho|^n under Hilbert-Schmidt measure."""
    alpha = _check_alpha(alpha)
    n = _check_order(n)
    num = pochhammer(1, n) * pochhammer(alpha + 1, n) * pochhammer(2 * alpha + 1, n)
    den = (pochhammer(3 * alpha + Fraction(5, 4), n) * pochhammer(3 * alpha + Fraction(3, 2), n)
           * pochhammer(3 * alpha + Fraction(7, 4), n))
    return num / (den * 256**n)


def moment_bures(alpha, n: int) -> Fraction:
    """E|rho|^n under Bures measure, evaluated through exact Gamma values.

    Only integer and half-integer alpha are accepted; there every Gamma
    argument is an integer or half-integer and the powers of pi cancel.
    """
    alpha = _check_alpha(alpha)
    n = _check_order(n)
    if (2 * alpha).denominator != 1:
        raise ValueError(f"moment_bures needs 2*alpha integral, got alpha={alpha}; "
                         "use moment_bures_ratio for general alpha")
    sqrt_pi = GammaValue(Fraction(1), 1)
    num = (gamma_half(6 * alpha + 2) * gamma_half(n + HALF) * gamma_half(n + alpha + HALF)
           * gamma_half(2 * n + alpha + 1))
    den = (sqrt_pi * gamma_half(n + 2 * alpha + 1) * gamma_half(n + 3 * alpha + 1)
           * gamma_half(2 * n + 3 * alpha + Fraction(3, 2)))
    power = -4 * alpha - 8 * n - 1  # an integer because 2*alpha is
    return (num / den * Fraction(2) ** int(power)).rational()


def moment_bures_ratio(alpha, n: int) -> Fraction:
    """Bures determinant moment written as a Pochhammer ratio; valid for any rational alpha > 0."""
    alpha = _check_alpha(alpha)
    n = _check_order(n)
    num = pochhammer(HALF, n) * pochhammer(alpha + HALF, n) * pochhammer(alpha + 1, 2 * n)
    den = (pochhammer(2 * alpha + 1, n) * pochhammer(3 * alpha + 1, n)
           * pochhammer(3 * alpha + Fraction(3, 2), 2 * n))
    return num / (den * 2 ** (8 * n))


def beta_product_params(family, alpha) -> tuple[Fraction, list[tuple[Fraction, Fraction]]]:
    """Write the family's moments as ``scale**n * prod (a_i)_n / (b_i)_n`` with b_i > a_i > 0.

    Then X = scale * prod Y_i with independent Y_i ~ Beta(a_i, b_i - a_i).
    Only the two determinant families have this form.
    """
    family = MomentFamily.parse(family)
    alpha = _check_alpha(alpha)
    if family is MomentFamily.DET_HS:
        ups = [Fraction(1), alpha + 1, 2 * alpha + 1]
        downs = [3 * alpha + Fraction(5, 4), 3 * alpha + Fraction(3, 2), 3 * alpha + Fraction(7, 4)]
    elif family is MomentFamily.DET_BURES:
        # (c)_{2n} = 4^n (c/2)_n ((c+1)/2)_n; the 4^n factors cancel
        ups = [HALF, alpha + HALF, (alpha + 1) / 2, (alpha + 2) / 2]
        downs = [2 * alpha + 1, 3 * alpha + 1, (3 * alpha + Fraction(3, 2)) / 2,
                 (3 * alpha + Fraction(5, 2)) / 2]
    else:
        raise ValueError(f"{family.value} moments are not a pure Pochhammer ratio")
    pairs = list(zip(sorted(ups), sorted(downs)))
    if any(b <= a for a, b in pairs):
        raise ValueError(f"no Beta pairing for {family.value} at alpha={alpha}")
    return Fraction(1, 256), pairs


@dataclass(frozen=True)
class MomentTable:
    family: MomentFamily
    alpha: Fraction
    values: tuple[Fraction, ...]

    @property
    def order(self) -> int:
        return len(self.values) - 1

    @property
    def support(self) -> SupportInterval:
        return self.family.support

    def __len__(self):
        return len(self.values)

    def __getitem__(self, n):
        return self.values[n]

    def truncate(self, n: int) -> "MomentTable":
        if n > self.order:
            raise ValueError(f"table has orders 0..{self.order}, asked for {n}")
        return MomentTable(self.family, self.alpha, self.values[: n + 1])


def _ratio_step(fac: Fraction, num_factors, den_factors) -> Fraction:
    num = 1
    for f in num_factors:
        num *= f
    den = 1
    for f in den_factors:
        den *= f
    return fac * num / den


def _pt_values(alpha: Fraction, N: int) -> list[Fraction]:
    # With D_n = (3a+3/2)_n (6a+5/2)_{2n}:
    #   first_n  = n! (a+1)_n (2a+1)_n / (64^n D_n)
    #   second_n = (-1)^n (n+2+5a)_n (a)_n (a+1/2)_n / (16^n D_n)
    # since (-2n-1-5a)_n = (-1)^n (n+2+5a)_n.
    values = [Fraction(1)]
    first = Fraction(1)
    second = Fraction(1)
    c, d = 3 * alpha + Fraction(3, 2), 6 * alpha + Fraction(5, 2)
    for n in range(N):
        shared = c + n, (d + 2 * n) * (d + 2 * n + 1)
        first = _ratio_step(first, (n + 1, alpha + 1 + n, 2 * alpha + 1 + n), (64,) + shared)
        b = n + 2 + 5 * alpha
        # (n+3+5a)_{n+1} / (n+2+5a)_n = (b+n)(b+n+1) / b
        second = _ratio_step(second, (-(b + n) * (b + n + 1), alpha + n, alpha + HALF + n),
                             (16, b) + shared)
        values.append(first + second * _pt_hyp(alpha, n + 1))
    return values


def _balanced_values(alpha: Fraction, N: int) -> list[Fraction]:
    values = [Fraction(1)]
    pre = Fraction(1)
    c, d = 3 * alpha + Fraction(3, 2), 6 * alpha + Fraction(5, 2)
    for n in range(N):
        m = 2 * n
        num = [(m + 1) * (m + 2), (1 + alpha + m) * (2 + alpha + m),
               (1 + 2 * alpha + m) * (2 + 2 * alpha + m)]
        den = [4096, (c + m) * (c + m + 1)] + [d + 2 * m + j for j in range(4)]
        pre = _ratio_step(pre, num, den)
        values.append(pre * _balanced_hyp(alpha, n + 1))
    return values


def _ratio_values(ups, downs, scale: Fraction, N: int) -> list[Fraction]:
    values = [Fraction(1)]
    v = Fraction(1)
    for n in range(N):
        v = _ratio_step(v, [u + n for u in ups] + [scale], [d + n for d in downs])
        values.append(v)
    return values


@lru_cache(maxsize=32)
def _table_values(family: MomentFamily, alpha: Fraction, N: int) -> tuple[Fraction, ...]:
    if family is MomentFamily.PT_HS:
        vals = _pt_values(alpha, N)
    elif family is MomentFamily.BALANCED_HS:
        vals = _balanced_values(alpha, N)
    else:
        scale, pairs = beta_product_params(family, alpha)
        vals = _ratio_values([a for a, _ in pairs], [b for _, b in pairs], scale, N)
    return tuple(vals)


def moment_table(family, alpha, N: int) -> MomentTable:
    """Moments of orders 0..N, built with incremental Pochhammer updates.

    Bures tables use the Pochhammer-ratio form and so accept any rational
    alpha; they agree exactly with :func:`moment_bures` where both apply.
    """
    family = MomentFamily.parse(family)
    alpha = _check_alpha(alpha)
    N = _check_order(N)
    return MomentTable(family, alpha, _table_values(family, alpha, N))
