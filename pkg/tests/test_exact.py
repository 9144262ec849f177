import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posetkit.exact import (
    QSqrt2,
    bracket,
    dyadic_between,
    floor_exact,
    format_fraction,
    format_qsqrt2,
    parse_fraction,
    parse_qsqrt2,
    stern_brocot,
)

fracs = st.fractions(min_value=-4, max_value=4, max_denominator=1000)
nonzero = fracs.filter(lambda f: f != 0)


def test_stern_brocot_prefix():
    assert stern_brocot(7) == [Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(1, 4),
                               Fraction(2, 5), Fraction(3, 5), Fraction(3, 4)]


def test_stern_brocot_distinct():
    s = stern_brocot(200)
    assert len(set(s)) == 200 and all(0 < x < 1 for x in s)


def test_sqrt2_square():
    r = QSqrt2(0, 1)
    assert r * r == 2
    assert not r.is_rational()


def test_division():
    x = QSqrt2(1, 1)
    assert x / x == 1
    with pytest.raises(ZeroDivisionError):
        x / QSqrt2(0, 0)


def _exact_sign(c, d):
    """Sign of c + d*sqrt2 from integer arithmetic only."""
    c, d = Fraction(c), Fraction(d)
    ci, di = c.numerator * d.denominator, d.numerator * c.denominator
    if di == 0:
        return (ci > 0) - (ci < 0)
    if ci == 0 or (ci > 0) == (di > 0):
        return 1 if (ci > 0 or (ci == 0 and di > 0)) else -1
    return (1 if ci > 0 else -1) if ci * ci > 2 * di * di else (1 if di > 0 else -1)


@given(fracs, nonzero, fracs, fracs)
def test_order_matches_exact_sign(a, b, c, d):
    x, y = QSqrt2(a, b), QSqrt2(c, d)
    sign = _exact_sign(a - c, b - d)
    assert (x < y) == (sign < 0)
    assert (x > y) == (sign > 0)
    assert (x == y) == (sign == 0)


@given(fracs, nonzero)
def test_floor(a, b):
    x = QSqrt2(a, b)
    f = floor_exact(x)
    assert QSqrt2(f) <= x < QSqrt2(f + 1)


@given(fracs, nonzero, st.integers(0, 300))
def test_comparisons_at_large_scale(a, b, k):
    x = QSqrt2(a, b) * (1 << k)
    f = floor_exact(x)
    assert _exact_sign(x.a - f, x.b) >= 0
    assert _exact_sign(x.a - f - 1, x.b) < 0
    assert (QSqrt2(f) <= x) and (x < f + 1)


@given(st.integers(1, 10 ** 12), st.integers(0, 60))
def test_cancellation(p, k):
    # a + b*sqrt2 with a close to -b*sqrt2: tiny value, huge summands
    b = Fraction(-p, 1)
    a = Fraction(round(p * 2 ** 0.5 * 2 ** k), 2 ** k)
    x = QSqrt2(a, b)
    sign = _exact_sign(a, b)
    assert (x > 0) == (sign > 0)
    assert (x < 0) == (sign < 0)


@given(fracs, nonzero, st.integers(1, 300))
def test_bracket_contains(a, b, bits):
    x = QSqrt2(a, b)
    lo, hi = bracket(x, bits)
    assert lo < x < hi and hi - lo == Fraction(1, 2 ** bits)


@given(st.fractions(0, 1, max_denominator=500), st.fractions(0, 1, max_denominator=500))
def test_dyadic_between_is_least(p, q):
    lo, hi = min(p, q), max(p, q)
    if lo == hi:
        return
    d = dyadic_between(lo, hi)
    assert lo < d < hi
    den = d.denominator
    assert den & (den - 1) == 0
    # no dyadic with a smaller denominator fits
    smaller = den // 2
    if smaller >= 1:
        k = math.floor(lo * smaller) + 1
        assert not Fraction(k, smaller) < hi


def test_dyadic_closed_ends():
    assert dyadic_between(Fraction(1, 2), Fraction(1, 2), True, True) == Fraction(1, 2)
    assert dyadic_between(Fraction(1, 3), Fraction(1, 2), False, True) == Fraction(1, 2)
    with pytest.raises(ValueError):
        dyadic_between(Fraction(1, 2), Fraction(1, 2))


def test_dyadic_between_irrationals():
    lo = QSqrt2(0, Fraction(1, 2))  # ~0.7071
    hi = QSqrt2(Fraction(1, 1000), Fraction(1, 2))
    d = dyadic_between(lo, hi)
    assert lo < d < hi


@settings(max_examples=50)
@given(fracs, fracs)
def test_text_round_trip(a, b):
    assert parse_fraction(format_fraction(a)) == a
    x = QSqrt2(a, b)
    assert parse_qsqrt2(format_qsqrt2(x)) == x


def test_parse_errors():
    for bad in ("", "1/0", "abc"):
        with pytest.raises(ValueError):
            parse_fraction(bad)
