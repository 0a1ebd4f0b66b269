"""Rigorous high-precision evaluation of convergent hypergeometric series."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from flint import fmpq_poly

from .errors import DivergenceError, DomainError, PoleError
from .exact import (AlgebraicConstant, BigFloat, agreement_digits, digits_to_bits,
                    pochhammer_exact, rational_power)
from .hyperterm import HyperTerm, _coeff_of, apply_theta
from .polyfield import constant_value, substitute, to_fmpq, to_fraction, univariate, used_names

MAX_TERMS = 200_000


@dataclass(frozen=True)
class EvalResult:
    value: BigFloat
    terms_used: int
    tail_bound: Fraction
    requested_digits: int

    def to_json(self) -> dict:
        return {
            "value": self.value.to_decimal(self.requested_digits),
            "terms_used": self.terms_used,
            "tail_bound": f"{float(self.tail_bound):.3e}",
            "requested_digits": self.requested_digits,
        }


@dataclass
class SeriesPlan:
    """A one-variable series t_n = prefactor * w(n) * h_n with h_0 = 1.

    ``ratio`` holds (base, power) pairs and a constant so that
    h_{n+1}/h_n = scale * prod (base + n)**power, all rational.
    """

    var: str
    prefactor_parts: list[tuple[Fraction, Fraction]]
    constant: Fraction
    weight: list[tuple[fmpq_poly, int]]
    pochs: list[tuple[Fraction, int]]
    scale: Fraction

    def prefactor(self, digits: int) -> BigFloat:
        bits = digits_to_bits(digits)
        v = BigFloat.from_rational(self.constant, bits)
        for base, e in self.prefactor_parts:
            if base < 0 and e.denominator != 1:
                raise DomainError("fractional power of a negative base")
            if base < 0:
                v = v.mul_rational(base ** int(e))
            else:
                v = v * rational_power(base, e, digits + 5)
        return v

    def prefactor_exact(self) -> AlgebraicConstant:
        """Prefactor as c*sqrt(d); half-integer exponents only."""
        out = AlgebraicConstant(self.constant, 1, 0)
        for base, e in self.prefactor_parts:
            if e.denominator == 1:
                out = out * (base ** int(e))
            else:
                out = out * AlgebraicConstant.power(base, e)
        return out

    def weight_at(self, n: int) -> Fraction:
        w = Fraction(1)
        for p, e in self.weight:
            v = to_fraction(p(n))
            if not v and e < 0:
                raise PoleError(f"weight factor vanishes at n={n}")
            w *= v ** e
        return w

    def ratio_at(self, n: int) -> Fraction:
        num, den = self.scale, Fraction(1)
        for a, e in self.pochs:
            v = a + n
            if e > 0:
                num *= v ** e
            else:
                den *= v ** -e
        if not den:
            raise PoleError(f"denominator Pochhammer vanishes at n={n}")
        return num / den

    def full_ratio(self) -> tuple[fmpq_poly, fmpq_poly]:
        """(P, Q) with t_{n+1}/t_n = P(n)/Q(n)."""
        x = fmpq_poly([0, 1])
        P = fmpq_poly([to_fmpq(self.scale)])
        Q = fmpq_poly([1])
        for a, e in self.pochs:
            f = x + to_fmpq(a)
            if e > 0:
                P *= f ** e
            else:
                Q *= f ** -e
        for p, e in self.weight:
            shifted = p(x + 1)
            if e > 0:
                P *= shifted ** e
                Q *= p ** e
            else:
                P *= p ** -e
                Q *= shifted ** -e
        g = P.gcd(Q)
        if g.degree() > 0:
            P, Q = P / g, Q / g
        return P, Q


def plan_series(term: HyperTerm, assignment: dict | None = None) -> SeriesPlan:
    """Split a kernel into prefactor, polynomial weight and hypergeometric part."""
    var = term.sum_var
    vals = {k: Fraction(v) for k, v in (assignment or {}).items() if k != var}
    missing = set(term.variables) - set(vals) - {var}
    for p in term.pochs:
        missing |= used_names(p.base) - set(vals) - {var}
    if missing:
        raise DomainError(f"unassigned variables: {sorted(missing)}")

    prefactor_parts: list[tuple[Fraction, Fraction]] = []
    constant = term.constant
    scale = Fraction(1)
    for x in term.exps:
        base = x.base if x.rational_base else constant_value(substitute(x.base, vals))
        if not base:
            raise DomainError("exponential base vanishes at the assignment")
        c = _coeff_of(x.exponent, var) if var in used_names(x.exponent) else Fraction(0)
        e0 = constant_value(substitute(x.exponent, {**vals, var: 0}))
        scale *= base ** int(c)
        if e0:
            prefactor_parts.append((base, e0))

    weight: list[tuple[fmpq_poly, int]] = []
    for f in term.polys:
        v = substitute(f.value, vals)
        if var in used_names(v):
            weight.append((univariate(v, var), f.power))
        else:
            c = constant_value(v)
            if not c and f.power < 0:
                raise PoleError(f"factor {f.value} vanishes at the assignment")
            constant *= c ** f.power

    pochs: list[tuple[Fraction, int]] = []
    for p in term.pochs:
        a = constant_value(substitute(p.base, vals))
        if p.run_var == var:
            pochs.append((a, p.power))
        else:
            idx = vals[p.run_var]
            if idx.denominator != 1 or idx < 0:
                raise DomainError("Pochhammer index must be a nonnegative integer")
            v = pochhammer_exact(a, int(idx))
            if not v and p.power < 0:
                raise PoleError(f"Pochhammer ({p.base})_{p.run_var} vanishes")
            constant *= v ** p.power
    return SeriesPlan(var, prefactor_parts, constant, weight, pochs, scale)


def _cauchy_bound(p: fmpq_poly) -> Fraction:
    """Every real root of p is below this value."""
    cs = [to_fraction(c) for c in p.coeffs()]
    lead = cs[-1]
    return 1 + max((abs(c / lead) for c in cs[:-1]), default=Fraction(0))


def ratio_analysis(P: fmpq_poly, Q: fmpq_poly) -> tuple[Fraction, Fraction, int]:
    """(rho, rho', n0): |P(n)/Q(n)| <= rho' < 1 for every integer n >= n0."""
    if P.degree() < 0:
        return Fraction(0), Fraction(1, 2), 0
    lp, lq = to_fraction(P.coeffs()[-1]), to_fraction(Q.coeffs()[-1])
    if P.degree() > Q.degree():
        raise DivergenceError("term ratio grows without bound")
    rho = abs(lp / lq) if P.degree() == Q.degree() else Fraction(0)
    if rho >= 1:
        raise DivergenceError(f"term ratio tends to {rho}, series does not converge geometrically")
    rho2 = (1 + rho) / 2 if rho else Fraction(1, 2)
    if lq < 0:
        P, Q = -P, -Q
    r = to_fmpq(rho2)
    bound = max(_cauchy_bound(Q), _cauchy_bound(r * Q - P), _cauchy_bound(r * Q + P))
    return rho, rho2, max(0, math.ceil(bound))


def _widen(x: BigFloat, err: Fraction) -> BigFloat:
    if not err:
        return x
    if x.exp >= 0:
        extra = math.ceil(err / (1 << x.exp))
    else:
        extra = math.ceil(err * (1 << -x.exp))
    return BigFloat(x.man, x.exp, x.rad + extra, x.prec)


def _sum_plan(plan: SeriesPlan, digits: int) -> EvalResult:
    if digits < 1:
        raise ValueError("digits must be at least 1")
    P, Q = plan.full_ratio()
    _, rho2, n0 = ratio_analysis(P, Q)
    pref = plan.prefactor(digits)
    target = Fraction(1, 10 ** digits)
    # absolute budget for the inner sum, scaled by an upper bound on |prefactor|
    pbound = max(pref.abs_upper(), Fraction(1, 10 ** 6))
    budget = target / (4 * pbound)
    prec = digits_to_bits(digits) + 64
    h = BigFloat.from_rational(1, prec)
    total = BigFloat.from_rational(0, prec)
    n = 0
    while True:
        t = h.mul_rational(plan.weight_at(n))
        if n >= n0:
            tail = t.abs_upper() / (1 - rho2)
            if tail + total.error_bound <= budget:
                break
        total = total + t
        h = h.mul_rational(plan.ratio_at(n))
        n += 1
        if h.man == 0 and h.rad == 0:
            tail = Fraction(0)
            break
        if n > MAX_TERMS:
            raise DivergenceError("term budget exhausted")
    inner = _widen(total, tail)
    value = inner * pref
    if value.error_bound > target:
        raise DomainError("precision budget exceeded; increase working precision")
    return EvalResult(value, n, tail * pbound, digits)


def eval_series(source, assignment: dict | None = None, digits: int = 60) -> EvalResult:
    """Sum a kernel (or catalog entry with ``.kernel``) over its first variable."""
    term = getattr(source, "kernel", source)
    return _sum_plan(plan_series(term, assignment), digits)


def eval_weighted_series(source, a, b, z0, digits: int = 60, assignment: dict | None = None,
                         zname: str = "z") -> EvalResult:
    """``sum (a + b*theta) G`` at ``z = z0``."""
    term = getattr(source, "kernel", source)
    return eval_series(apply_theta(term, a, b, z0, zname), assignment, digits)


def closed_form_value(closed, digits: int) -> BigFloat:
    if isinstance(closed, BigFloat):
        return closed
    if isinstance(closed, str):
        closed = AlgebraicConstant.parse(closed)
    return closed.to_bigfloat(digits + 5)


def verify_closed_form(entry, digits: int = 60, closed=None,
                       result: EvalResult | None = None) -> int:
    """Decimal digits to which the series value and its closed form agree."""
    if digits < 10:
        raise ValueError("verify_closed_form needs at least 10 digits")
    closed = closed if closed is not None else entry.closed_form
    res = result or eval_series(entry, None, digits)
    return agreement_digits(res.value, closed_form_value(closed, digits), cap=digits)
