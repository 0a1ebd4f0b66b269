import time
from fractions import Fraction

import pytest

from ramtel.errors import DivergenceError, DomainError
from ramtel.exact import AlgebraicConstant, BigFloat, agreement_digits, pi_reference
from ramtel.hyperterm import eval_term_exact, parse_term
from ramtel.numeric import (closed_form_value, eval_series, eval_weighted_series, plan_series,
                            ratio_analysis, verify_closed_form)

SERIES_IDS = ["65-8", "126-10", "63-8", "7-1", "28-3", "11-1", "133-8", "wz-42-5"]


@pytest.mark.parametrize("sid", SERIES_IDS)
def test_catalog_closed_forms(catalog, sid):
    t0 = time.perf_counter()
    assert verify_closed_form(catalog[sid], 60) >= 58
    assert time.perf_counter() - t0 < 10


def test_geometric():
    r = eval_series(parse_term("vars: n\n(1/2)^n"), digits=30)
    assert abs(r.value.mid - 2) + r.value.error_bound <= Fraction(1, 10**30)


def test_exponential_series():
    # sum 1/n! against exact partial sums with a crude factorial tail
    t = parse_term("vars: n\n1/poch(1,n)")
    r = eval_series(t, digits=40)
    partial = sum((eval_term_exact(t, {"n": n}) for n in range(60)), Fraction(0))
    assert abs(r.value.mid - partial) <= r.value.error_bound + Fraction(1, 10**70)


def test_anchor_weighted():
    t = parse_term("vars: n, z\npoch(1/2,n)^3/poch(1,n)^3 * z^n")
    r = eval_weighted_series(t, 5, 42, Fraction(1, 64), 60)
    assert agreement_digits(r.value, closed_form_value("16/pi", 60)) >= 58


def test_weighted_plain_equals_unweighted():
    t = parse_term("vars: n, z\npoch(1/2,n)^3/poch(1,n)^3 * z^n")
    a = eval_weighted_series(t, 1, 0, Fraction(1, 64), 50)
    b = eval_series(parse_term("vars: n\npoch(1/2,n)^3/poch(1,n)^3 * (1/64)^n"), digits=50)
    assert agreement_digits(a.value, b.value) >= 50


def test_planted_wrong_closed_form(catalog):
    bits = 300
    perturbed = pi_reference(70) + BigFloat.from_rational(Fraction(1, 10**30), bits)
    wrong = AlgebraicConstant(Fraction(9), 7, 0).to_bigfloat(70) / perturbed
    d = verify_closed_form(catalog["65-8"], 60, closed=wrong)
    assert d <= 31


def test_divergent_series(catalog):
    with pytest.raises(DivergenceError):
        eval_series(catalog["wz-4-1"], digits=30)
    with pytest.raises(DivergenceError):
        eval_series(parse_term("vars: n\n2^n"), digits=30)


def test_digit_floor(catalog):
    with pytest.raises(ValueError):
        verify_closed_form(catalog["65-8"], 5)
    with pytest.raises(ValueError):
        eval_series(catalog["65-8"], digits=0)


def test_unassigned_parameter():
    with pytest.raises(DomainError):
        eval_series(parse_term("poch(-k,n)/poch(1,n)*(1/2)^n"), {}, 20)


def test_precision_monotone(catalog):
    lo = eval_series(catalog["7-1"], digits=30).value
    hi = eval_series(catalog["7-1"], digits=80).value
    assert agreement_digits(lo, hi) >= 30
    assert hi.error_bound < lo.error_bound


def test_ratio_analysis_bounds(catalog):
    plan = plan_series(catalog["65-8"].kernel)
    P, Q = plan.full_ratio()
    rho, rho2, n0 = ratio_analysis(P, Q)
    assert rho == Fraction(16, 63) ** 2
    for n in range(n0, n0 + 200):
        assert abs(Fraction(int(P(n).p), int(P(n).q)) / Fraction(int(Q(n).p), int(Q(n).q))) <= rho2


def test_non_integer_parameter():
    # sum (-k)_n/n! x^n = (1-x)^k; x = -1/2, k = 1/3
    t = parse_term("poch(-k,n)/poch(1,n)*(-1/2)^n")
    r = eval_series(t, {"k": Fraction(1, 3)}, 40)
    cube = r.value * r.value * r.value
    assert agreement_digits(cube, Fraction(3, 2)) >= 38
