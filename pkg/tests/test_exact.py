from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from ramtel.exact import (AlgebraicConstant, BigFloat, agreement_digits, pi_reference,
                          pochhammer_exact, rational_power, sqrt_bigfloat)


@pytest.mark.parametrize("a, n, expected", [
    (Fraction(1, 2), 0, 1),
    (Fraction(1, 2), 2, Fraction(3, 4)),
    (-3, 5, 0),
    (1, 5, 120),
    (Fraction(-1, 2), 3, Fraction(-1, 2) * Fraction(1, 2) * Fraction(3, 2)),
])
def test_pochhammer(a, n, expected):
    assert pochhammer_exact(a, n) == expected


def test_pochhammer_negative_index():
    with pytest.raises(Exception):
        pochhammer_exact(1, -1)


def test_pi_small_precisions():
    p10 = pi_reference(10)
    assert p10.error_bound <= Fraction(1, 10**10)
    assert p10.to_decimal(10).startswith("3.141592653")
    p1 = pi_reference(1)
    assert abs(p1.mid - Fraction(31, 10)) <= Fraction(1, 10) + p1.error_bound


def test_pi_against_mpmath():
    mpmath.mp.dps = 130
    ref = Fraction(mpmath.nstr(+mpmath.pi, 125, strip_zeros=False))
    v = pi_reference(120)
    assert abs(v.mid - ref) <= v.error_bound + Fraction(1, 10**124)
    assert agreement_digits(v, ref) >= 119


def test_pi_precision_consistency():
    assert pi_reference(50).to_decimal(30) == pi_reference(30).to_decimal(30)


def test_sqrt():
    r = sqrt_bigfloat(4, 20)
    assert r.contains(2)
    assert r.error_bound <= Fraction(1, 10**20)
    r7 = sqrt_bigfloat(7, 30)
    assert abs(r7.mid**2 - 7) <= 2 * r7.mid * Fraction(1, 10**30)
    z = sqrt_bigfloat(0, 10)
    assert z.contains(0) and z.error_bound <= Fraction(1, 10**10)


def test_rational_power_half():
    v = rational_power(Fraction(64, 63), Fraction(-1, 2), 40)
    # (63/64)^(1/2) squared
    assert agreement_digits(v * v, Fraction(63, 64)) >= 38


@pytest.mark.parametrize("text, value", [
    ("16/pi", AlgebraicConstant(Fraction(16), 1, -1)),
    ("9*sqrt(7)/pi", AlgebraicConstant(Fraction(9), 7, -1)),
    ("11*sqrt(33)/(2*pi)", AlgebraicConstant(Fraction(11, 2), 33, -1)),
    ("85*sqrt(255)/(54*pi)", AlgebraicConstant(Fraction(85, 54), 255, -1)),
    ("9/(2*pi)", AlgebraicConstant(Fraction(9, 2), 1, -1)),
])
def test_algebraic_parse_roundtrip(text, value):
    c = AlgebraicConstant.parse(text)
    assert c == value
    assert AlgebraicConstant.parse(str(c)) == c


def test_algebraic_squarefree_and_power():
    assert AlgebraicConstant(Fraction(1), 28, 0) == AlgebraicConstant(Fraction(2), 7, 0)
    # (63/64)^(1/2) = sqrt(63)/8 = 3*sqrt(7)/8
    assert AlgebraicConstant.power(Fraction(63, 64), Fraction(1, 2)) == \
        AlgebraicConstant(Fraction(3, 8), 7, 0)
    c = AlgebraicConstant(Fraction(9), 7, -1)
    assert c / c == AlgebraicConstant(Fraction(1), 1, 0)


def test_algebraic_numeric():
    mpmath.mp.dps = 80
    ref = Fraction(mpmath.nstr(9 * mpmath.sqrt(7) / mpmath.pi, 75, strip_zeros=False))
    v = AlgebraicConstant(Fraction(9), 7, -1).to_bigfloat(60)
    assert agreement_digits(v, ref) >= 60


def test_bad_radicand():
    with pytest.raises(Exception):
        AlgebraicConstant(Fraction(1), 0, 0)


fractions = st.fractions(min_value=-1000, max_value=1000, max_denominator=10**6)


@settings(max_examples=200, deadline=None)
@given(fractions, fractions, st.integers(min_value=20, max_value=200))
def test_bigfloat_enclosure(x, y, prec):
    a = BigFloat.from_rational(x, prec)
    b = BigFloat.from_rational(y, prec)
    assert a.contains(x) and b.contains(y)
    assert (a + b).contains(x + y)
    assert (a - b).contains(x - y)
    assert (a * b).contains(x * y)
    assert a.mul_rational(y).contains(x * y)
    if y:
        assert b.reciprocal().contains(1 / y)
        assert (a / b).contains(x / y)


@settings(max_examples=50, deadline=None)
@given(st.lists(fractions, min_size=1, max_size=60))
def test_bigfloat_accumulated_sum(xs):
    total = BigFloat.from_rational(0, 80)
    for x in xs:
        total = total + BigFloat.from_rational(x, 80)
    assert total.contains(sum(xs, Fraction(0)))


def test_alternating_partial_sums_enclosed():
    # first 50 partial sums of sum (-1)^n/(2n+1), each checked exactly
    exact = Fraction(0)
    total = BigFloat.from_rational(0, 100)
    for n in range(50):
        t = Fraction((-1) ** n, 2 * n + 1)
        exact += t
        total = total + BigFloat.from_rational(t, 100)
        assert total.contains(exact)


def test_agreement_digits():
    a = BigFloat.from_rational(Fraction(1, 3), 300)
    assert agreement_digits(a, Fraction(1, 3) + Fraction(1, 10**40)) in (39, 40)
    assert agreement_digits(a, Fraction(1, 3), cap=60) == 60
