"""Legendre-polynomial density reconstruction from power moments.

The Legendre moments lambda_k = E[P_k(u(X))] of the affinely mapped
variable u in [-1, 1] are computed exactly from the power moments, and the
truncated series

    p_N(x) = sum_k (2k+1)/(b-a) * lambda_k * P_k(u(x))

is the density estimate. Converting power moments to Legendre moments is
exponentially ill-conditioned, so it is done entirely in integer arithmetic
over a common denominator; floats only appear when the series is evaluated.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpz

from .exact_arith import BigFloat, as_rational, to_bigfloat
from .interval import SupportInterval
from .moments import MomentFamily, MomentTable, moment_table

__all__ = [
    "DensityEstimate",
    "LegendreSeries",
    "SupportInterval",
    "cdf",
    "cdf_exact",
    "default_precision",
    "density_curve",
    "eval_density",
    "eval_density_exact",
    "eval_derivative",
    "eval_derivative_exact",
    "legendre_coeffs",
    "load_series",
    "power_moments_from_series",
    "reconstruct_family",
    "save_series",
    "stability_digits",
]

SERIES_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class LegendreSeries:
    """Exact Legendre moments lambda_k = numerators[k] / denominator, k = 0..N."""

    interval: SupportInterval
    numerators: tuple
    denominator: int
    family: MomentFamily | None = None
    alpha: Fraction | None = None

    @property
    def N(self) -> int:
        return len(self.numerators) - 1

    def coefficient(self, k: int) -> Fraction:
        return Fraction(int(self.numerators[k]), int(self.denominator))

    @property
    def lambdas(self) -> list[Fraction]:
        return [self.coefficient(k) for k in range(self.N + 1)]

    def truncate(self, N: int) -> "LegendreSeries":
        if N > self.N or N < 0:
            raise ValueError(f"series has N={self.N}, cannot truncate to {N}")
        return LegendreSeries(self.interval, self.numerators[: N + 1], self.denominator,
                              self.family, self.alpha)

    def float_coefficients(self) -> np.ndarray:
        den = gmpy2.mpz(self.denominator)
        return np.array([float(gmpy2.mpq(c, den)) for c in self.numerators])


GUARD_BITS = 32


def default_precision(N: int) -> int:
    return 8 * N + 256


@dataclass
class DensityEstimate:
    series: LegendreSeries
    eval_precision_bits: int | None = None
    _lambda_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.eval_precision_bits is None:
            self.eval_precision_bits = default_precision(self.series.N)

    @property
    def interval(self) -> SupportInterval:
        return self.series.interval

    @property
    def work_precision(self) -> int:
        # guard bits absorb rounding in the recurrence and the final sum
        return self.eval_precision_bits + GUARD_BITS

    def lambdas_bigfloat(self) -> list:
        prec = self.work_precision
        if prec not in self._lambda_cache:
            s = self.series
            self._lambda_cache[prec] = [to_bigfloat(Fraction(int(c), int(s.denominator)), prec)
                                        for c in s.numerators]
        return self._lambda_cache[prec]


def _moment_integers(mus: Sequence[Fraction]) -> tuple[list, mpz]:
    L = mpz(1)
    for m in mus:
        L = gmpy2.lcm(L, m.denominator)
    return [mpz(m.numerator) * (L // m.denominator) for m in mus], L


def legendre_coeffs(moments, N: int | None = None,
                    interval: SupportInterval | None = None) -> LegendreSeries:
    """Exact Legendre moments from power moments mu_0..mu_N.

    ``moments`` is a :class:`MomentTable` (its family fixes the interval) or
    any sequence of rationals together with ``interval``.
    """
    family = alpha = None
    if isinstance(moments, MomentTable):
        family, alpha = moments.family, moments.alpha
        interval = interval or moments.support
        mus = list(moments.values)
    else:
        if interval is None:
            raise ValueError("an interval is required for raw moment sequences")
        mus = [as_rational(m) for m in moments]
    if N is None:
        N = len(mus) - 1
    if N < 0:
        raise ValueError("N must be nonnegative")
    if N >= len(mus):
        raise ValueError(f"N={N} exceeds the {len(mus) - 1} available moment orders")
    mus = mus[: N + 1]

    A, L = _moment_integers(mus)
    # y = (x - a)/w in [0, 1]; nu_m = E[y^m] = w^-m sum_i C(m,i) (-a)^(m-i) mu_i
    s = -interval.a
    sn, sd = mpz(s.numerator), mpz(s.denominator)
    w = interval.width
    wn, wd = mpz(w.numerator), mpz(w.denominator)

    v = [A[i] * sd**i for i in range(N + 1)]
    S = [v[0]]
    for _ in range(N):
        # applying (sn + shift) once more; v[0] after m steps is S_m
        v = [sn * v[i] + v[i + 1] for i in range(len(v) - 1)]
        S.append(v[0])

    q = sd * wn
    V = [S[m] * wd**m * q ** (N - m) for m in range(N + 1)]
    den = q**N * L

    # shifted Legendre: P_k(2y-1) = sum_m (-1)^(k+m) C(k,m) C(k+m,m) y^m
    nums = []
    for k in range(N + 1):
        c = mpz(1) if k % 2 == 0 else mpz(-1)
        tot = c * V[0]
        for m in range(1, k + 1):
            c = -c * (k - m + 1) * (k + m) // (m * m)
            tot += c * V[m]
        nums.append(tot)
    g = den
    for t in nums:
        g = gmpy2.gcd(g, t)
        if g == 1:
            break
    return LegendreSeries(interval, tuple(t // g for t in nums), den // g, family, alpha)


_SERIES_CACHE: dict = {}


def reconstruct_family(family, alpha, N: int) -> LegendreSeries:
    """Series for one moment family at one alpha, reusing any longer series already built.

    lambda_k does not depend on N, so a shorter series is a truncation.
    """
    family = MomentFamily.parse(family)
    alpha = as_rational(alpha)
    key = (family, alpha)
    cached = _SERIES_CACHE.get(key)
    if cached is not None and cached.N >= N:
        return cached.truncate(N)
    series = legendre_coeffs(moment_table(family, alpha, N), N)
    _SERIES_CACHE[key] = series
    if len(_SERIES_CACHE) > 256:
        _SERIES_CACHE.pop(next(iter(_SERIES_CACHE)))
    return series


def _as_estimate(est) -> DensityEstimate:
    if isinstance(est, LegendreSeries):
        return DensityEstimate(est)
    return est


def _check_point(interval: SupportInterval, x) -> Fraction:
    x = as_rational(x)
    if not interval.contains(x):
        raise ValueError(f"x={x} lies outside the support {interval}")
    return x


def _legendre_table(u, N: int):
    """P_0..P_{N+1} and P'_0..P'_N at u, in whatever arithmetic u carries."""
    one = u * 0 + 1
    P = [one, u]
    for k in range(1, N + 1):
        P.append(((2 * k + 1) * u * P[k] - k * P[k - 1]) / (k + 1))
    dP = [one * 0, one]
    for k in range(1, N):
        dP.append(dP[k - 1] + (2 * k + 1) * P[k])
    return P, dP[: N + 1]


def _ctx(prec: int):
    return gmpy2.context(precision=prec, round=gmpy2.RoundToNearest)


def eval_density(est, x) -> BigFloat:
    """Series value at rational x, evaluated at the estimate's precision."""
    est = _as_estimate(est)
    iv = est.interval
    x = _check_point(iv, x)
    prec = est.work_precision
    lam = est.lambdas_bigfloat()
    N = est.series.N
    with _ctx(prec):
        u = to_bigfloat(iv.to_unit(x), prec)
        P, _ = _legendre_table(u, N)
        total = gmpy2.fsum([(2 * k + 1) * lam[k] * P[k] for k in range(N + 1)])
        total = total / to_bigfloat(iv.width, prec)
    return gmpy2.mpfr(total, est.eval_precision_bits)


def eval_derivative(est, x) -> BigFloat:
    est = _as_estimate(est)
    iv = est.interval
    x = _check_point(iv, x)
    prec = est.work_precision
    lam = est.lambdas_bigfloat()
    N = est.series.N
    with _ctx(prec):
        u = to_bigfloat(iv.to_unit(x), prec)
        _, dP = _legendre_table(u, N)
        total = gmpy2.fsum([(2 * k + 1) * lam[k] * dP[k] for k in range(N + 1)])
        w = to_bigfloat(iv.width, prec)
        total = 2 * total / (w * w)
    return gmpy2.mpfr(total, est.eval_precision_bits)


def _cdf_terms(lam, P1, P2, u1, u2, N):
    # int P_0 = u; int P_k = (P_{k+1} - P_{k-1}) / (2k+1)
    terms = [lam[0] * (u2 - u1) / 2]
    for k in range(1, N + 1):
        terms.append(lam[k] * ((P2[k + 1] - P2[k - 1]) - (P1[k + 1] - P1[k - 1])) / 2)
    return terms


def cdf(est, x1, x2) -> BigFloat:
    """Probability mass of the series over [x1, x2]; exactly 1 over the whole support."""
    est = _as_estimate(est)
    iv = est.interval
    x1, x2 = _check_point(iv, x1), _check_point(iv, x2)
    if x1 > x2:
        raise ValueError(f"disordered bounds: {x1} > {x2}")
    prec = est.work_precision
    lam = est.lambdas_bigfloat()
    N = est.series.N
    with _ctx(prec):
        u1 = to_bigfloat(iv.to_unit(x1), prec)
        u2 = to_bigfloat(iv.to_unit(x2), prec)
        P1, _ = _legendre_table(u1, N)
        P2, _ = _legendre_table(u2, N)
        total = gmpy2.fsum(_cdf_terms(lam, P1, P2, u1, u2, N))
    return gmpy2.mpfr(total, est.eval_precision_bits)


def _exact_lambdas(series: LegendreSeries):
    den = gmpy2.mpz(series.denominator)
    return [gmpy2.mpq(c, den) for c in series.numerators]


def eval_density_exact(est, x) -> Fraction:
    """Exact rational value of the truncated series at rational x."""
    est = _as_estimate(est)
    iv = est.interval
    x = _check_point(iv, x)
    u = gmpy2.mpq(iv.to_unit(x))
    N = est.series.N
    P, _ = _legendre_table(u, N)
    lam = _exact_lambdas(est.series)
    total = sum(((2 * k + 1) * lam[k] * P[k] for k in range(N + 1)), gmpy2.mpq(0))
    return as_rational(total) / iv.width


def eval_derivative_exact(est, x) -> Fraction:
    est = _as_estimate(est)
    iv = est.interval
    x = _check_point(iv, x)
    u = gmpy2.mpq(iv.to_unit(x))
    N = est.series.N
    _, dP = _legendre_table(u, N)
    lam = _exact_lambdas(est.series)
    total = sum(((2 * k + 1) * lam[k] * dP[k] for k in range(N + 1)), gmpy2.mpq(0))
    return 2 * as_rational(total) / iv.width**2


def cdf_exact(est, x1, x2) -> Fraction:
    est = _as_estimate(est)
    iv = est.interval
    x1, x2 = _check_point(iv, x1), _check_point(iv, x2)
    if x1 > x2:
        raise ValueError(f"disordered bounds: {x1} > {x2}")
    N = est.series.N
    u1, u2 = gmpy2.mpq(iv.to_unit(x1)), gmpy2.mpq(iv.to_unit(x2))
    P1, _ = _legendre_table(u1, N)
    P2, _ = _legendre_table(u2, N)
    terms = _cdf_terms(_exact_lambdas(est.series), P1, P2, u1, u2, N)
    return as_rational(sum(terms, gmpy2.mpq(0)))


def density_curve(est, xs) -> np.ndarray:
    """Float64 series values on an array of points (Clenshaw summation).

    Intended for plotting and quadrature; the coefficients are bounded by 1,
    so double precision is adequate once they are known exactly.
    """
    est = _as_estimate(est)
    s = est.series
    iv = s.interval
    xs = np.asarray(xs, dtype=float)
    a, b, w = float(iv.a), float(iv.b), float(iv.width)
    if np.any(xs < a - 1e-15 * abs(w)) or np.any(xs > b + 1e-15 * abs(w)):
        raise ValueError("points outside the support")
    u = (2 * xs - a - b) / w
    coef = s.float_coefficients() * (2 * np.arange(s.N + 1) + 1)
    return np.polynomial.legendre.legval(u, coef) / w


def stability_digits(current, previous, point=None) -> int:
    """Decimal places shared by two successive estimates (e.g. N and N-100 moments).

    With ``point`` given, ``current`` and ``previous`` are series (or estimates)
    and their densities at ``point`` are compared. Counts the digits after the
    decimal point that agree once both values are written out; -1 if even the
    integer parts differ.
    """
    if point is not None:
        current, previous = eval_density(current, point), eval_density(previous, point)
    places = 60
    sa, sb = (format(gmpy2.mpfr(v), f".{places}f") for v in (current, previous))
    ia, _, fa = sa.partition(".")
    ib, _, fb = sb.partition(".")
    if ia != ib:
        return -1
    n = 0
    for ca, cb in zip(fa, fb):
        if ca != cb:
            break
        n += 1
    return n


def _legendre_power_coeffs(N: int) -> list[list[Fraction]]:
    """Monomial coefficients of P_0..P_N from the three-term recurrence."""
    polys = [[Fraction(1)], [Fraction(0), Fraction(1)]]
    for k in range(1, N):
        nxt = [Fraction(0)] * (k + 2)
        for j, c in enumerate(polys[k]):
            nxt[j + 1] += Fraction(2 * k + 1, k + 1) * c
        for j, c in enumerate(polys[k - 1]):
            nxt[j] -= Fraction(k, k + 1) * c
        polys.append(nxt)
    return polys[: N + 1]


def power_moments_from_series(series: LegendreSeries) -> list[Fraction]:
    """Recover E[X^j], j = 0..N, from the Legendre moments (exact).

    Inverts the reconstruction through monomial expansions of P_k; used to
    check the round trip.
    """
    N = series.N
    lam = series.lambdas
    polys = _legendre_power_coeffs(N)
    # E[u^j] = sum_k (2k+1)/2 lambda_k int_{-1}^{1} u^j P_k(u) du
    def mono_int(m):
        return Fraction(2, m + 1) if m % 2 == 0 else Fraction(0)

    eu = []
    for j in range(N + 1):
        tot = Fraction(0)
        for k in range(N + 1):
            inner = sum((c * mono_int(i + j) for i, c in enumerate(polys[k]) if c), Fraction(0))
            tot += Fraction(2 * k + 1, 2) * lam[k] * inner
        eu.append(tot)
    iv = series.interval
    half_w = iv.width / 2
    mid = (iv.a + iv.b) / 2
    # x = half_w * u + mid
    out = []
    for j in range(N + 1):
        out.append(sum((math.comb(j, i) * half_w**i * mid ** (j - i) * eu[i] for i in range(j + 1)),
                       Fraction(0)))
    return out


def _frac_json(q: Fraction) -> dict:
    return {"numerator": str(q.numerator), "denominator": str(q.denominator)}


def series_to_dict(series: LegendreSeries) -> dict:
    return {
        "schema_version": SERIES_SCHEMA_VERSION,
        "kind": "legendre-series",
        "family": series.family.value if series.family else None,
        "alpha": str(series.alpha) if series.alpha is not None else None,
        "interval": {"a": str(series.interval.a), "b": str(series.interval.b)},
        "N": series.N,
        "lambda": [_frac_json(q) for q in series.lambdas],
    }


def series_from_dict(data: dict) -> LegendreSeries:
    if data.get("kind") != "legendre-series":
        raise ValueError("not a legendre-series document")
    if data.get("schema_version") != SERIES_SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {data.get('schema_version')}")
    iv = SupportInterval(Fraction(data["interval"]["a"]), Fraction(data["interval"]["b"]))
    lam = [Fraction(int(d["numerator"]), int(d["denominator"])) for d in data["lambda"]]
    if len(lam) != data["N"] + 1:
        raise ValueError("lambda list length does not match N")
    den = 1
    for q in lam:
        den = den * q.denominator // math.gcd(den, q.denominator)
    nums = tuple(mpz(q.numerator * (den // q.denominator)) for q in lam)
    fam = MomentFamily.parse(data["family"]) if data.get("family") else None
    alpha = Fraction(data["alpha"]) if data.get("alpha") else None
    return LegendreSeries(iv, nums, mpz(den), fam, alpha)


def save_series(series: LegendreSeries, path) -> None:
    with open(path, "w") as fh:
        json.dump(series_to_dict(series), fh, indent=1)
        fh.write("\n")


def load_series(path) -> LegendreSeries:
    with open(path) as fh:
        return series_from_dict(json.load(fh))


def write_curve_csv(path, xs: Iterable, ys: Iterable, header=("x", "value")) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for x, y in zip(xs, ys):
            wr.writerow([repr(float(x)), repr(float(y))])
