"""Creative telescoping: operators in the recurrence variable plus certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

from .errors import DomainError
from .gosper import (assemble, coefficient_rows, degree_bound, gosper_columns,
                     gosper_normal_form)
from .hyperterm import HyperTerm, partial_value, shift_quotient, termination_bound
from .polyfield import (Poly, RatFunc, degree, exact_div, linsolve_exact, parse_poly,
                        parse_ratfunc, poly_lcm, rational_content, shift, to_fmpq, to_fraction)


@dataclass
class Telescoper:
    """``sum_i coeffs[i](k) G(n, k+i) = F(n+1, k) - F(n, k)`` with F = certificate * G."""

    order: int
    coeffs: list[Poly]
    certificate: RatFunc
    sum_var: str
    rec_var: str
    variables: tuple[str, ...]

    def operator(self, shift_name: str = "K") -> str:
        parts = []
        for i, p in enumerate(self.coeffs):
            if p.is_zero():
                continue
            s = f"({p})"
            if i == 1:
                s += f"*{shift_name}"
            elif i > 1:
                s += f"*{shift_name}^{i}"
            parts.append(s)
        return " + ".join(parts)

    def __str__(self) -> str:
        return self.operator()

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "coefficients": [str(p) for p in self.coeffs],
            "certificate": str(self.certificate),
            "sum_var": self.sum_var,
            "rec_var": self.rec_var,
            "variables": list(self.variables),
        }


def telescoper_from_json(data: dict, term: HyperTerm) -> Telescoper:
    """Rebuild a telescoper (as written by ``to_json``) over the kernel's variables."""
    if list(data["variables"]) != list(term.variables):
        raise DomainError("telescoper and kernel declare different variables")
    coeffs = [parse_poly(c, term.ctx) for c in data["coefficients"]]
    if len(coeffs) != int(data["order"]) + 1:
        raise DomainError("coefficient count does not match the order")
    cert = parse_ratfunc(data["certificate"], term.ctx)
    return Telescoper(int(data["order"]), coeffs, cert, data["sum_var"], data["rec_var"],
                      term.variables)


@dataclass
class CertificateCheckReport:
    identity_holds: bool = False
    boundary_at_zero: bool = False
    tail_vanishes: bool = False
    residual: RatFunc | None = None
    details: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "identity_holds": self.identity_holds,
            "boundary_at_zero": self.boundary_at_zero,
            "tail_vanishes": self.tail_vanishes,
            "residual": None if self.residual is None else str(self.residual),
            "details": list(self.details),
        }


def _shift_products(term: HyperTerm, rec_var: str, order: int) -> list[RatFunc]:
    """sigma_i = G(n, k+i) / G(n, k) for i = 0..order."""
    rho = shift_quotient(term, rec_var)
    sig = [RatFunc(term.ctx.constant(1), normalized=True)]
    for i in range(1, order + 1):
        sig.append(sig[-1] * rho.shift(rec_var, i - 1))
    return sig


def normalize_operator(coeffs: list[RatFunc]) -> tuple[list[Poly], RatFunc]:
    """Primitive polynomial coefficient vector and the scale factor applied."""
    ctx = coeffs[0].ctx
    den = reduce(poly_lcm, (c.den for c in coeffs), ctx.constant(1))
    polys = [exact_div(c.num * den, c.den) for c in coeffs]
    g = None
    for p in polys:
        if not p.is_zero():
            g = p if g is None else g.gcd(p)
    polys = [exact_div(p, g) if not p.is_zero() else p for p in polys]
    cs = [rational_content(p) for p in polys if not p.is_zero()]
    num = reduce(math.gcd, (c.numerator for c in cs))
    dn = reduce(math.lcm, (c.denominator for c in cs))
    unit = Fraction(dn, num)
    lead = next(p for p in reversed(polys) if not p.is_zero())
    if to_fraction(lead.coeffs()[0]) * unit < 0:
        unit = -unit
    polys = [p * to_fmpq(unit) for p in polys]
    scale = RatFunc(den, g) * unit
    return polys, scale


def _try_order(term: HyperTerm, sum_var: str, rec_var: str, m: int) -> Telescoper | None:
    ctx = term.ctx
    sig = _shift_products(term, rec_var, m)
    V = reduce(poly_lcm, (s.den for s in sig), ctx.constant(1))
    U = [exact_div(s.num * V, s.den) for s in sig]
    q = shift_quotient(term, sum_var)
    rH = q * RatFunc(V, shift(V, sum_var, 1))
    nf = gosper_normal_form(rH, sum_var)
    a, b, c = nf.a, nf.b, nf.c
    b1 = shift(b, sum_var, -1)
    rhs_deg = max(degree(u, sum_var) for u in U) + degree(c, sum_var)
    D = degree_bound(a, b1, rhs_deg, sum_var)
    if D < 0:
        return None
    cols = gosper_columns(a, b1, D, sum_var) + [-(u * c) for u in U]
    rows = coefficient_rows(cols, sum_var)
    sol = linsolve_exact(rows, [ctx.constant(0)] * len(rows))
    nx = D + 1
    cands = []
    for vec in sol.nullspace:
        vec = [RatFunc.from_value(ctx, v) for v in vec]
        if all(v.is_zero() for v in vec[nx:]):
            continue
        polys, scale = normalize_operator(vec[nx:])
        xs = [v * scale for v in vec[:nx]]
        key = (sum(p.total_degree() for p in polys), str(polys))
        cands.append((key, polys, xs))
    if not cands:
        return None
    _, polys, xs = min(cands, key=lambda t: t[0])
    x = assemble(xs, sum_var, ctx)
    R = x * RatFunc(b1, c * V)
    return Telescoper(m, polys, R, sum_var, rec_var, term.variables)


def find_telescoper(term: HyperTerm, sum_var: str | None = None, rec_var: str | None = None,
                    max_order: int = 6) -> Telescoper | None:
    """Lowest-order telescoper up to ``max_order``, or None."""
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    sum_var = sum_var or term.sum_var
    rec_var = rec_var or term.rec_var
    if rec_var is None or rec_var == sum_var:
        raise DomainError("creative telescoping needs a separate recurrence variable")
    for m in range(1, max_order + 1):
        t = _try_order(term, sum_var, rec_var, m)
        if t is not None:
            return t
    return None


def verify_certificate(term: HyperTerm, t: Telescoper) -> CertificateCheckReport:
    """Symbolic check of the telescoping identity divided by G(n, k)."""
    report = CertificateCheckReport()
    rho = shift_quotient(term, t.rec_var)
    q = shift_quotient(term, t.sum_var)
    lhs = RatFunc(term.ctx.constant(0), normalized=True)
    sig = RatFunc(term.ctx.constant(1), normalized=True)
    for i, p in enumerate(t.coeffs):
        if i:
            sig = sig * rho.shift(t.rec_var, i - 1)
        lhs = lhs + sig * p
    R = t.certificate
    rhs = R.shift(t.sum_var, 1) * q - R
    report.residual = lhs - rhs
    report.identity_holds = report.residual.is_zero()
    if not report.identity_holds:
        report.details.append("telescoping identity fails")
    return report


def _f_value(term: HyperTerm, t: Telescoper, N: int) -> RatFunc:
    """F(N, k) up to a nonvanishing exponential factor."""
    return partial_value(term, t.sum_var, N) * t.certificate.substitute({t.sum_var: N})


def _vanishes_at(f: RatFunc, rec_var: str, k0: int) -> bool | None:
    """True/False if f(k0) is zero/nonzero; None at a pole."""
    try:
        return f.substitute({rec_var: k0}).is_zero()
    except DomainError:
        return None


def boundary_check(term: HyperTerm, t: Telescoper, k_range: tuple[int, int] = (0, 20),
                   report: CertificateCheckReport | None = None) -> CertificateCheckReport:
    """F(0, k) = 0 and F(N, k) = 0 beyond the termination bound for k in k_range."""
    report = report or CertificateCheckReport()
    lo, hi = k_range
    ks = range(lo, hi + 1)
    n, k = t.sum_var, t.rec_var

    try:
        f0 = _f_value(term, t, 0)
    except DomainError:
        f0 = None
    if f0 is not None and f0.is_zero():
        report.boundary_at_zero = True
    else:
        bad = [k0 for k0 in ks if f0 is None or _vanishes_at(f0, k, k0) is not True]
        report.boundary_at_zero = not bad
        if bad:
            report.details.append(f"F(0,{k}) nonzero or singular at {k}={bad[:5]}")

    bad = []
    for k0 in ks:
        try:
            bounds = [termination_bound(term, n, {k: k0 + i}) for i in range(t.order + 1)]
        except DomainError:
            bounds = [None]
        if any(b is None for b in bounds):
            bad.append(k0)
            continue
        M = max(bounds)
        ok = True
        for N in (M, M + 1):
            try:
                ok = ok and _vanishes_at(_f_value(term, t, N), k, k0) is True
            except DomainError:
                ok = False
        if not ok:
            bad.append(k0)
    report.tail_vanishes = not bad
    if bad:
        report.details.append(f"F(N,{k}) beyond the support nonzero or singular at {k}={bad[:5]}")
    return report
