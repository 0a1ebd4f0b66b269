"""Gosper's algorithm over Q(parameters).

The summation variable is the first variable of the polynomial context; all
other variables are transcendental parameters living in the coefficient field.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError
from .hyperterm import HyperTerm, shift_quotient
from .polyfield import (Poly, RatFunc, coefficients, constant_value, content_in, degree,
                        dispersion_set, exact_div, leading_in, linsolve_exact, primitive,
                        shift, to_fmpq)


@dataclass(frozen=True)
class GosperNormalForm:
    """``r(n) = a(n)/b(n) * c(n+1)/c(n)`` with gcd(a(n), b(n+j)) = 1 for j >= 0."""

    a: Poly
    b: Poly
    c: Poly
    var: str

    def quotient(self) -> RatFunc:
        c1 = shift(self.c, self.var, 1)
        return RatFunc(self.a * c1, self.b * self.c)


@dataclass(frozen=True)
class GosperCertificate:
    """R with ``q(n) R(n+1) - R(n) = 1``; then S = R*G satisfies S(n+1) - S(n) = G(n)."""

    R: RatFunc
    var: str


def gosper_normal_form(r: RatFunc, var: str) -> GosperNormalForm:
    if r.is_zero():
        raise DomainError("Gosper normal form of zero")
    f, g = r.num, r.den
    ctx = f.context()
    # n-free contents are field constants; keep them aside
    cf = content_in(f, var)
    cg = content_in(g, var)
    A = exact_div(f, cf)
    B = exact_div(g, cg)
    C = ctx.constant(1)
    for j in sorted(dispersion_set(A, B, var)):
        d = A.gcd(shift(B, var, j))
        if d.is_constant():
            continue
        A = exact_div(A, d)
        B = exact_div(B, shift(d, var, -j))
        for i in range(1, j + 1):
            C = C * shift(d, var, -i)
    lc = leading_in(C, var)
    if lc.is_constant():
        C = C * to_fmpq(1 / constant_value(lc))
    else:
        C = primitive(C)[1]
    z = RatFunc(cf, cg)
    a, b = z.num * A, z.den * B
    # move rational scalars into a so that b is primitive
    s, b = primitive(b)
    a = a * to_fmpq(1 / s)
    return GosperNormalForm(a, b, C, var)


def degree_bound(a: Poly, b1: Poly, rhs_degree: int, var: str) -> int:
    """Bound on deg x for ``a(n) x(n+1) - b1(n) x(n) = p(n)`` with deg p = rhs_degree."""
    da, db = degree(a, var), degree(b1, var)
    la, lb = leading_in(a, var), leading_in(b1, var)
    if da != db or la != lb:
        return rhs_degree - max(da, db)
    bound = rhs_degree - da + 1
    if da >= 1:
        ca = coefficients(a, var).get(da - 1)
        cb = coefficients(b1, var).get(da - 1)
        diff = (cb if cb is not None else a.context().constant(0)) - \
            (ca if ca is not None else a.context().constant(0))
        ratio = RatFunc(diff, la)
        if ratio.is_constant():
            v = ratio.constant_value()
            if v.denominator == 1 and v >= 0:
                bound = max(bound, int(v))
    return bound


def gosper_columns(a: Poly, b1: Poly, D: int, var: str) -> list[Poly]:
    """Polynomials multiplying x_0..x_D in ``a x(n+1) - b1 x(n)``."""
    ctx = a.context()
    n = ctx.gens()[ctx.names().index(var)]
    cols = []
    up = ctx.constant(1)
    pw = ctx.constant(1)
    for _ in range(D + 1):
        cols.append(a * up - b1 * pw)
        up = up * (n + 1)
        pw = pw * n
    return cols


def coefficient_rows(columns: list[Poly], var: str) -> list[list[Poly]]:
    """Linear system rows: coefficient of var**e in each column polynomial."""
    coeffs = [coefficients(c, var) for c in columns]
    top = max((max(c) for c in coeffs if c), default=-1)
    zero = columns[0].context().constant(0)
    rows = []
    for e in range(top + 1):
        row = [c.get(e, zero) for c in coeffs]
        if any(not x.is_zero() for x in row):
            rows.append(row)
    return rows


def assemble(coeffs: list, var: str, ctx) -> RatFunc:
    """Sum of coeffs[j] * var**j as a rational function."""
    n = ctx.gens()[ctx.names().index(var)]
    total = RatFunc(ctx.constant(0), normalized=True)
    pw = ctx.constant(1)
    for c in coeffs:
        if not c.is_zero():
            total = total + c * RatFunc(pw, normalized=True)
        pw = pw * n
    return total


def gosper_solve(term: HyperTerm, var: str | None = None) -> GosperCertificate | None:
    """Certificate R for the indefinite sum of ``term``, or None if not Gosper-summable."""
    var = var or term.sum_var
    q = shift_quotient(term, var)
    return gosper_solve_quotient(q, var)


def gosper_solve_quotient(q: RatFunc, var: str) -> GosperCertificate | None:
    nf = gosper_normal_form(q, var)
    a, b, c = nf.a, nf.b, nf.c
    b1 = shift(b, var, -1)
    D = degree_bound(a, b1, degree(c, var), var)
    if D < 0:
        return None
    cols = gosper_columns(a, b1, D, var)
    rows = coefficient_rows(cols + [c], var)
    matrix = [r[:-1] for r in rows]
    rhs = [r[-1] for r in rows]
    sol = linsolve_exact(matrix, rhs)
    if not sol.consistent:
        return None
    ctx = q.ctx
    x = assemble([RatFunc.from_value(ctx, v) for v in sol.particular], var, ctx)
    R = x * RatFunc(b1, c)
    return GosperCertificate(R, var)


def check_certificate(q: RatFunc, cert: GosperCertificate) -> bool:
    """Exact check of ``q(n) R(n+1) - R(n) = 1``."""
    R = cert.R
    return (q * R.shift(cert.var, 1) - R) == 1
