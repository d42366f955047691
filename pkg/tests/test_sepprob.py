from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, strategies as st

from detmoments.sepprob import ASYMPTOTIC_RATIO, f_term, r_poly, r_poly_nested, sep_prob

half_ints = st.integers(1, 60).map(lambda k: F(k, 2))


@given(st.fractions(min_value=-50, max_value=50, max_denominator=20))
def test_r_poly_forms_agree(a):
    assert r_poly(a) == r_poly_nested(a)


def test_r_poly_values():
    assert r_poly(0) == 63000
    assert r_poly(1) == 3769584
    assert r_poly(-1) == -54


@pytest.mark.parametrize("alpha", [F(1, 2), F(1), F(3, 2), F(2), F(7, 2), F(10)])
def test_f_term_matches_mpmath(alpha):
    a = mpmath.mpf(alpha.numerator) / alpha.denominator
    g = mpmath.gamma
    with mpmath.workdps(40):
        ref = (g(3 * a + 2.5) * g(5 * a + 2) * float(r_poly(alpha)) * 2 ** (-4 * a - 6)
               / (3 * g(a + 1) * g(2 * a + 3) * g(5 * a + 6.5)))
        assert float(f_term(alpha)) == pytest.approx(float(ref), rel=1e-12)


@given(half_ints)
def test_f_term_positive(alpha):
    assert f_term(alpha) > 0


def test_term_ratio_tends_to_limit():
    r = f_term(F(401)) / f_term(F(400))
    assert abs(float(r) - float(ASYMPTOTIC_RATIO)) < 5e-3
    assert r < ASYMPTOTIC_RATIO


@pytest.mark.parametrize("alpha,value", [(F(1, 2), F(29, 64)), (F(1), F(8, 33)),
                                         (F(2), F(26, 323))])
def test_known_probabilities(alpha, value):
    r = sep_prob(alpha)
    assert r.partial_sum <= value <= r.upper
    assert r.identified == value
    assert abs(float(r.decimal) - float(value)) < 1e-12


def test_enclosure_is_certified():
    tight = sep_prob(F(5, 2), F(1, 10**50))
    loose = sep_prob(F(5, 2), F(1, 10**8))
    assert loose.tail_bound <= F(1, 10**8)
    assert loose.partial_sum <= tight.partial_sum <= loose.upper


def test_shift_identity():
    # P(alpha) - P(alpha + 1) = f(alpha)
    tol = F(1, 10**40)
    a, b = sep_prob(F(3, 2), tol), sep_prob(F(5, 2), tol)
    diff = a.partial_sum - b.partial_sum - f_term(F(3, 2))
    assert abs(diff) <= a.tail_bound + b.tail_bound


def test_decreasing_in_alpha():
    res = [sep_prob(F(k, 2), F(1, 10**20)) for k in range(1, 21)]
    # strict decrease with room to spare beyond each tail bound
    assert all(x.upper < y.partial_sum for x, y in zip(res[1:], res))
    assert all(0 < r.partial_sum and r.upper < 1 for r in res)


def test_options_and_errors():
    assert sep_prob(1, 1e-6).tail_bound <= F(1, 10**6)
    assert sep_prob(1, "1e-9").tail_bound <= F(1, 10**9)
    with pytest.raises(ValueError):
        sep_prob(1, 0)
    with pytest.raises(ValueError):
        sep_prob(1, ratio_cap=F(3, 2))
    with pytest.raises(ValueError):
        f_term(F(1, 3))
    with pytest.raises(RuntimeError):
        sep_prob(1, F(1, 10**12), max_terms=5)
    # a cap below the limiting ratio is never certified
    with pytest.raises(RuntimeError):
        sep_prob(1, ratio_cap=F(2, 5), max_terms=200)


def test_precision_of_decimal():
    r = sep_prob(1, precision=300)
    assert r.decimal.precision == 300
