from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ramtel.errors import PoleError, TermSyntaxError, UndeclaredVariableError
from ramtel.hyperterm import (apply_theta, eval_term_exact, parse_term, render_term,
                              shift_quotient, termination_bound)
from ramtel.polyfield import parse_ratfunc

A_TEXT = "3 * (64/63)^k * poch(-k,n)*poch(1/2,n)^2 / (poch(1/2-k,n)^2*poch(1,n)) * (1/64)^n * (42*n+5)"
B_TEXT = ("poch(-k,n)*poch(-k/2,n)*poch(1/2-k/2,n)/(poch(1/2-k,n)^2*poch(1,n))"
          " * (-1)^n * (16/63)^(2*n) * (130*n-2*k+15)")
ANCHOR = "poch(1/2,n)^3 / poch(1,n)^3 * (1/64)^n * (42*n+5)"


@pytest.fixture(scope="module")
def A():
    return parse_term(A_TEXT)


@pytest.fixture(scope="module")
def B():
    return parse_term(B_TEXT)


def test_parse_anchor_single_variable():
    t = parse_term("vars: n\n" + ANCHOR)
    assert t.variables == ("n",)
    assert termination_bound(t, "n") is None


def test_undeclared_variable():
    with pytest.raises(UndeclaredVariableError):
        parse_term("vars: k\npoch(1/2,n)")


@pytest.mark.parametrize("text", ["poch(1/2,n", "3 * * n", "", "poch(1/2)", "(n+1)^(1/2)"])
def test_syntax_errors(text):
    with pytest.raises(TermSyntaxError):
        parse_term(text)


def test_syntax_error_position():
    with pytest.raises(TermSyntaxError) as exc:
        parse_term("vars: n, k\n\npoch(-k,n) * $")
    assert exc.value.line == 3


def test_shift_quotient_simple():
    t = parse_term("vars: n, z\npoch(1/2,n)/poch(1,n) * z^n")
    q = shift_quotient(t, "n")
    assert q == parse_ratfunc("z*(n+1/2)/(n+1)", t.ctx)


def test_shift_quotient_example_kernel(A):
    expected = parse_ratfunc("(1/64)*(n-k)*(n+1/2)^2*(42*n+47)/((n+1/2-k)^2*(n+1)*(42*n+5))",
                             A.ctx)
    assert shift_quotient(A, "n") == expected


def test_shift_quotient_constant():
    assert shift_quotient(parse_term("5"), "n") == 1


def test_eval_exact(A, B):
    assert eval_term_exact(A, {"n": 0, "k": 0}) == 15
    assert eval_term_exact(B, {"n": 1, "k": 1}) == 0
    assert eval_term_exact(A, {"n": 1, "k": 1}) == Fraction(-47, 21)


def test_termination_bounds(A, B):
    assert termination_bound(A, "n", {"k": 5}) == 6
    assert termination_bound(B, "n", {"k": 1}) == 1


def test_pole_inside_support():
    t = parse_term("poch(-k,n)/poch(-1,n)")
    with pytest.raises(PoleError):
        termination_bound(t, "n", {"k": 4})


def test_render_roundtrip(A, B):
    for t in (A, B, parse_term("vars: n, k, z\n(1-z)^k*poch(-k,n)*z^n*(1-z)^(-2*n)")):
        again = parse_term(render_term(t))
        assert again == t
        assert render_term(again) == render_term(t)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 12), st.integers(0, 12))
def test_shift_quotient_consistency(n, k):
    a = parse_term(A_TEXT)
    g0 = eval_term_exact(a, {"n": n, "k": k})
    g1 = eval_term_exact(a, {"n": n + 1, "k": k})
    gk = eval_term_exact(a, {"n": n, "k": k + 1})
    qn = shift_quotient(a, "n")
    qk = shift_quotient(a, "k")
    if g0:
        assert qn.evaluate({"n": n, "k": k}) == g1 / g0
        assert qk.evaluate({"n": n, "k": k}) == gk / g0
    else:
        assert n > k


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 15))
def test_termination_spot_check(k):
    b = parse_term(B_TEXT)
    N = termination_bound(b, "n", {"k": k})
    assert N is not None
    for n in range(N, N + 4):
        assert eval_term_exact(b, {"n": n, "k": k}) == 0
    if N > 0:
        # the first N terms are not all zero
        assert any(eval_term_exact(b, {"n": n, "k": k}) for n in range(N))


def test_theta_weight():
    t = parse_term("vars: n, z\npoch(1/2,n)^3/poch(1,n)^3 * z^n")
    w = apply_theta(t, 5, 42, Fraction(1, 64))
    assert w == parse_term("vars: n\n" + ANCHOR)
    plain = apply_theta(t, 1, 0, Fraction(1, 64))
    assert plain == parse_term("vars: n\npoch(1/2,n)^3/poch(1,n)^3 * (1/64)^n")
