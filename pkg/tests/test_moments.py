from fractions import Fraction as F

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from detmoments.exact_arith import pochhammer
from detmoments.moments import (MomentFamily, beta_product_params, moment_balanced,
                                moment_bures, moment_bures_ratio, moment_det, moment_pt,
                                moment_table)

ALPHAS = [F(1, 2), F(1), F(3, 2), F(2), F(5, 2), F(3)]
alphas = st.fractions(min_value=F(1, 8), max_value=6, max_denominator=8)


def mp_pt(alpha, n):
    """Moment of det(rho^PT) evaluated independently in floating point with mpmath."""
    a = mpmath.mpf(alpha.numerator) / alpha.denominator
    rf = mpmath.rf
    shared = rf(3 * a + 1.5, n) * rf(6 * a + 2.5, 2 * n)
    first = mpmath.factorial(n) * rf(a + 1, n) * rf(2 * a + 1, n) / (2 ** (6 * n) * shared)
    second = rf(-2 * n - 1 - 5 * a, n) * rf(a, n) * rf(a + 0.5, n) / (2 ** (4 * n) * shared)
    up = [-(n - 2) / mpmath.mpf(2), -(n - 1) / mpmath.mpf(2), -n, a + 1, 2 * a + 1]
    lo = [1 - n, n + 2 + 5 * a, 1 - n - a, 0.5 - n - a]
    # the series stops where the first upper parameter hits zero, before 1 - n does
    last = next(k for k in range(n + 1) if any(u + k == 0 for u in up[:3]))
    return first + second * _mp_terminating(up, lo, last)


def mp_balanced(alpha, n):
    a = mpmath.mpf(alpha.numerator) / alpha.denominator
    rf = mpmath.rf
    pre = (mpmath.factorial(2 * n) * rf(1 + a, 2 * n) * rf(1 + 2 * a, 2 * n)
           / (2 ** (12 * n) * rf(3 * a + 1.5, 2 * n) * rf(6 * a + 2.5, 4 * n)))
    return pre * _mp_terminating([-n, a, a + 0.5, -4 * n - 1 - 5 * a],
                                 [-2 * n - a, -2 * n - 2 * a, 0.5 - n], n)


def _mp_terminating(up, lo, last):
    total = term = mpmath.mpf(1)
    for k in range(last):
        term *= mpmath.fprod(u + k for u in up) / ((k + 1) * mpmath.fprod(v + k for v in lo))
        total += term
    return total


def mp_bures(alpha, n):
    a = mpmath.mpf(alpha.numerator) / alpha.denominator
    g = mpmath.gamma
    return (2 ** (-4 * a - 8 * n - 1) * g(6 * a + 2) * g(n + 0.5) * g(n + a + 0.5)
            * g(2 * n + a + 1) / (mpmath.sqrt(mpmath.pi) * g(n + 2 * a + 1) * g(n + 3 * a + 1)
                                  * g(2 * n + 3 * a + 1.5)))


def test_known_first_moments():
    assert moment_pt(1, 1) == F(-7, 3876)
    assert moment_det(1, 1) == F(1, 3876)
    assert moment_det(F(1, 2), 1) == F(1, 2288)
    assert moment_pt(F(1, 2), 1) == F(-1, 858)
    assert moment_bures(1, 1) == F(1, 16896)


def test_balanced_first_moment_vanishes_for_rebits():
    # E[det(rho) det(rho^PT)] is exactly 0 at alpha = 1/2 and negative at alpha = 1
    assert moment_balanced(F(1, 2), 1) == 0
    assert moment_balanced(1, 1) < 0


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 13])
def test_pt_matches_mpmath(alpha, n):
    with mpmath.workdps(60):
        ref = mp_pt(alpha, n)
        assert mpmath.almosteq(mpmath.mpf(moment_pt(alpha, n).numerator)
                               / moment_pt(alpha, n).denominator, ref, rel_eps=mpmath.mpf(10) ** -40)


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("n", [1, 2, 4, 7])
def test_balanced_matches_mpmath(alpha, n):
    with mpmath.workdps(60):
        q = moment_balanced(alpha, n)
        ref = mp_balanced(alpha, n)
        assert abs(mpmath.mpf(q.numerator) / q.denominator - ref) <= mpmath.mpf(10) ** -40 * (abs(ref) + mpmath.mpf(10) ** -40)


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("n", [0, 1, 2, 5, 10])
def test_bures_routes_agree(alpha, n):
    q = moment_bures(alpha, n)
    assert q == moment_bures_ratio(alpha, n)
    with mpmath.workdps(40):
        assert float(q) == pytest.approx(float(mp_bures(alpha, n)), rel=1e-12)


def test_bures_gamma_route_needs_half_integers():
    with pytest.raises(ValueError):
        moment_bures(F(1, 3), 1)
    assert moment_bures_ratio(F(1, 3), 0) == 1


@pytest.mark.parametrize("fn", [moment_pt, moment_balanced, moment_det, moment_bures_ratio])
def test_validation(fn):
    with pytest.raises(ValueError):
        fn(0, 1)
    with pytest.raises(ValueError):
        fn(1, -1)
    with pytest.raises(TypeError):
        fn(0.5, 1)


@settings(max_examples=40, deadline=None)
@given(alphas, st.integers(1, 12))
def test_moments_respect_support(alpha, n):
    for fam, fn in ((MomentFamily.PT_HS, moment_pt), (MomentFamily.BALANCED_HS, moment_balanced),
                    (MomentFamily.DET_HS, moment_det), (MomentFamily.DET_BURES, moment_bures_ratio)):
        iv = fam.support
        bound = max(abs(iv.a), abs(iv.b)) ** n
        mu = fn(alpha, n)
        assert abs(mu) <= bound
        if n % 2 == 0 or iv.a >= 0:
            assert mu >= 0


@settings(max_examples=40, deadline=None)
@given(alphas, st.integers(1, 10))
def test_det_moments_are_log_convex(alpha, n):
    # Cauchy-Schwarz on a positive variable: mu_n^2 <= mu_{n-1} mu_{n+1}
    for fn in (moment_det, moment_bures_ratio):
        assert fn(alpha, n) ** 2 <= fn(alpha, n - 1) * fn(alpha, n + 1)


@settings(max_examples=25, deadline=None)
@given(alphas)
def test_pt_hankel_positive(alpha):
    mus = [moment_pt(alpha, n) for n in range(9)]
    H = np.array([[float(mus[i + j]) for j in range(5)] for i in range(5)])
    # rescale to keep the matrix well conditioned before checking definiteness
    s = np.sqrt(np.diag(H))
    assert np.all(np.linalg.eigvalsh(H / np.outer(s, s)) > -1e-9)


@pytest.mark.parametrize("family", list(MomentFamily))
@pytest.mark.parametrize("alpha", [F(1, 2), F(1), F(2)])
def test_table_matches_single_orders(family, alpha):
    fn = {MomentFamily.PT_HS: moment_pt, MomentFamily.BALANCED_HS: moment_balanced,
          MomentFamily.DET_HS: moment_det, MomentFamily.DET_BURES: moment_bures}[family]
    t = moment_table(family, alpha, 14)
    assert t.order == 14 and len(t) == 15
    assert list(t.values) == [fn(alpha, n) for n in range(15)]
    assert t.truncate(5).values == t.values[:6]
    assert t[3] == fn(alpha, 3)


def test_table_from_string_names():
    t = moment_table("pt_hs", "1/2", 3)
    assert t.family is MomentFamily.PT_HS and t.alpha == F(1, 2)
    with pytest.raises(ValueError):
        MomentFamily.parse("nope")
    with pytest.raises(ValueError):
        moment_table("det-hs", 1, -1)


@pytest.mark.parametrize("family", [MomentFamily.DET_HS, MomentFamily.DET_BURES])
@pytest.mark.parametrize("alpha", [F(1, 4), F(1), F(7, 3)])
def test_beta_product_reproduces_moments(family, alpha):
    scale, pairs = beta_product_params(family, alpha)
    fn = moment_det if family is MomentFamily.DET_HS else moment_bures_ratio
    for n in range(6):
        prod = F(1)
        for a, b in pairs:
            for k in range(n):
                prod *= (a + k) / (b + k)
        assert scale**n * prod == fn(alpha, n)


def test_beta_product_rejects_pt():
    with pytest.raises(ValueError):
        beta_product_params(MomentFamily.PT_HS, 1)


@pytest.mark.parametrize("alpha", [F(1, 2), F(1), F(2)])
def test_det_moment_is_first_pt_term(alpha):
    # the leading term of the partial-transpose formula collapses to the determinant moment
    for n in range(21):
        first = (pochhammer(1, n) * pochhammer(alpha + 1, n) * pochhammer(2 * alpha + 1, n)
                 / (2 ** (6 * n) * pochhammer(3 * alpha + F(3, 2), n)
                    * pochhammer(6 * alpha + F(5, 2), 2 * n)))
        assert first == moment_det(alpha, n)


@pytest.mark.parametrize("family", list(MomentFamily))
def test_normalization(family):
    assert moment_table(family, 1, 3)[0] == 1


@pytest.mark.parametrize("alpha", ALPHAS)
def test_det_and_bures_strictly_decrease(alpha):
    for fn in (moment_det, moment_bures):
        vals = [fn(alpha, n) for n in range(15)]
        assert all(x > y for x, y in zip(vals, vals[1:]))
