"""Hypergeometric kernels: data model, DSL parser/renderer, shift quotients.

A kernel is a rational constant times Pochhammer symbols ``(base)_var``,
exponential factors ``base**exponent`` and polynomial factors.  Bases of
Pochhammer symbols are linear forms; exponents are integer linear forms.
Exponential bases are rationals or polynomials in the free parameters
(``z``), which keeps every shift quotient rational.

DSL::

    vars: n, k          # first name is the summation variable
    params: z           # optional; a declared ``z`` is always a parameter
    3 * (64/63)^k * poch(-k,n) / poch(1,n) * (1/64)^n * (42*n+5)
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

from flint import fmpq_mpoly

from .errors import (DomainError, NotHypergeometricError, PoleError, TermSyntaxError,
                     UndeclaredVariableError, ZeroBaseError)
from .exact import pochhammer_exact
from .polyfield import (Poly, RatFunc, coefficients, constant_value, primitive, ring, shift,
                        substitute, to_fmpq, used_names)

DEFAULT_VARIABLES = ("n", "k")


@dataclass(frozen=True, eq=False)
class PochFactor:
    base: Poly
    run_var: str
    power: int

    def key(self, order: Sequence[str]):
        return (order.index(self.run_var), str(self.base))

    def __eq__(self, other):
        return (isinstance(other, PochFactor) and self.run_var == other.run_var
                and self.power == other.power and self.base == other.base)


@dataclass(frozen=True, eq=False)
class ExpFactor:
    """``base ** exponent``; base is a nonzero Fraction or a parameter polynomial."""

    base: Fraction | Poly
    exponent: Poly

    @property
    def rational_base(self) -> bool:
        return not isinstance(self.base, fmpq_mpoly)

    def key(self):
        return (0 if self.rational_base else 1, str(self.base))

    def __eq__(self, other):
        return (isinstance(other, ExpFactor) and self.rational_base == other.rational_base
                and self.base == other.base and self.exponent == other.exponent)


@dataclass(frozen=True, eq=False)
class PolyFactor:
    value: Poly
    power: int

    def key(self):
        return str(self.value)

    def __eq__(self, other):
        return (isinstance(other, PolyFactor) and self.power == other.power
                and self.value == other.value)


@dataclass(frozen=True, eq=False)
class HyperTerm:
    """A kernel G(n, k[, z]) in canonical form (use :meth:`build`)."""

    variables: tuple[str, ...]
    params: tuple[str, ...]
    constant: Fraction
    pochs: tuple[PochFactor, ...] = ()
    exps: tuple[ExpFactor, ...] = ()
    polys: tuple[PolyFactor, ...] = ()
    ctx: object = field(default=None, repr=False)

    # -- construction --------------------------------------------------------

    @classmethod
    def build(cls, variables: Sequence[str], params: Iterable[str] = (), constant=1,
              pochs=(), exps=(), polys=()) -> "HyperTerm":
        variables = tuple(variables)
        params = tuple(p for p in variables if p in set(params) or p == "z")
        if not variables or variables[0] in params:
            raise DomainError("the first variable must be a discrete summation variable")
        ctx = ring(variables)
        constant = Fraction(constant)
        if not constant:
            raise ZeroBaseError("kernel is identically zero")
        discrete = [v for v in variables if v not in params]

        # Pochhammer symbols: merge equal (base, run_var)
        pmap: dict[tuple[str, str], list] = {}
        for p in pochs:
            if p.run_var not in discrete:
                raise DomainError(f"Pochhammer index {p.run_var} is not a discrete variable")
            if p.run_var in used_names(p.base):
                raise DomainError("Pochhammer base may not involve its own index")
            if p.base.total_degree() > 1:
                raise DomainError("Pochhammer bases must be linear forms")
            k = (p.run_var, str(p.base))
            if k in pmap:
                pmap[k][2] += p.power
            else:
                pmap[k] = [p.base, p.run_var, p.power]
        new_pochs = [PochFactor(b, v, e) for b, v, e in pmap.values() if e]

        # polynomial factors: primitive, positive leading coefficient, merged
        qmap: dict[str, list] = {}
        for f in polys:
            if f.value.is_zero():
                raise ZeroBaseError("polynomial factor is identically zero")
            if not f.power:
                continue
            if f.value.is_constant():
                constant *= constant_value(f.value) ** f.power
                continue
            c, prim = primitive(f.value)
            constant *= c ** f.power
            k = str(prim)
            if k in qmap:
                qmap[k][1] += f.power
            else:
                qmap[k] = [prim, f.power]
        new_polys = [PolyFactor(v, e) for v, e in qmap.values() if e]

        # exponential factors
        emap: dict[tuple, list] = {}
        for x in exps:
            base = x.base
            if isinstance(base, fmpq_mpoly):
                if base.is_zero():
                    raise ZeroBaseError("zero base in exponential factor")
                if used_names(base) - set(params):
                    raise DomainError("exponential bases may only involve parameters")
                if base.is_constant():
                    base = constant_value(base)
            else:
                base = Fraction(base)
                if not base:
                    raise ZeroBaseError("zero base in exponential factor")
            ex = x.exponent
            if used_names(ex) & set(params):
                raise DomainError("exponents may not involve parameters")
            if any(c.q != 1 for c in ex.coeffs()):
                raise DomainError("exponents must have integer coefficients")
            if ex.total_degree() > 1:
                raise DomainError("exponents must be linear forms")
            if not isinstance(base, fmpq_mpoly) and base == 1:
                continue
            k = (isinstance(base, fmpq_mpoly), str(base))
            if k in emap:
                emap[k][1] = emap[k][1] + ex
            else:
                emap[k] = [base, ex]
        new_exps = []
        for base, ex in emap.values():
            if ex.is_zero():
                continue
            if not ex.is_constant():
                new_exps.append(ExpFactor(base, ex))
                continue
            e = int(constant_value(ex))
            if not isinstance(base, fmpq_mpoly):
                constant *= base ** e
                continue
            c, prim = primitive(base)
            constant *= c ** e
            for i, f in enumerate(new_polys):
                if f.value == prim:
                    new_polys[i] = PolyFactor(prim, f.power + e)
                    break
            else:
                new_polys.append(PolyFactor(prim, e))
        new_polys = [f for f in new_polys if f.power]

        new_pochs.sort(key=lambda p: p.key(variables))
        new_exps.sort(key=ExpFactor.key)
        new_polys.sort(key=PolyFactor.key)
        return cls(variables, params, constant, tuple(new_pochs), tuple(new_exps),
                   tuple(new_polys), ctx)

    # -- basic accessors -------------------------------------------------------

    @property
    def sum_var(self) -> str:
        return self.variables[0]

    @property
    def discrete(self) -> tuple[str, ...]:
        return tuple(v for v in self.variables if v not in self.params)

    @property
    def rec_var(self) -> str | None:
        d = self.discrete
        return d[1] if len(d) > 1 else None

    def gen(self, name: str) -> Poly:
        return self.ctx.gens()[self.variables.index(name)]

    def __eq__(self, other):
        return (isinstance(other, HyperTerm) and self.variables == other.variables
                and self.params == other.params and self.constant == other.constant
                and self.pochs == other.pochs and self.exps == other.exps
                and self.polys == other.polys)

    __hash__ = None

    def __str__(self) -> str:
        return render_term(self)

    def scaled(self, c) -> "HyperTerm":
        return replace(self, constant=self.constant * Fraction(c))

    def times(self, other: "HyperTerm") -> "HyperTerm":
        if other.variables != self.variables:
            raise DomainError("product of kernels over different variables")
        return HyperTerm.build(self.variables, self.params, self.constant * other.constant,
                               self.pochs + other.pochs, self.exps + other.exps,
                               self.polys + other.polys)

    def with_variables(self, variables: Sequence[str], params: Iterable[str] = ()) -> "HyperTerm":
        """Re-express in a larger variable list (e.g. add an unused ``k``)."""
        ctx = ring(variables)
        from .polyfield import convert
        conv = lambda p: convert(p, ctx)
        return HyperTerm.build(
            variables, tuple(params) + self.params, self.constant,
            [PochFactor(conv(p.base), p.run_var, p.power) for p in self.pochs],
            [ExpFactor(x.base if x.rational_base else conv(x.base), conv(x.exponent))
             for x in self.exps],
            [PolyFactor(conv(f.value), f.power) for f in self.polys])

    # -- algebra -------------------------------------------------------------------

    def shift_quotient(self, name: str) -> RatFunc:
        return shift_quotient(self, name)

    def substitute(self, values: dict) -> "HyperTerm":
        """Replace variables by rationals.

        Valid when every exponent stays integral; the variables remain declared.
        """
        vals = {k: Fraction(v) for k, v in values.items()}
        constant = self.constant
        pochs = [PochFactor(substitute(p.base, vals), p.run_var, p.power) for p in self.pochs]
        for p in self.pochs:
            if p.run_var in vals:
                raise DomainError("cannot substitute a Pochhammer index symbolically")
        exps = []
        for x in self.exps:
            base = x.base
            if not x.rational_base:
                base = substitute(base, vals)
                if base.is_zero():
                    raise ZeroBaseError("exponential base vanishes after substitution")
                if base.is_constant():
                    base = constant_value(base)
            ex = substitute(x.exponent, vals)
            const_part = constant_value(_const_of(ex))
            if const_part.denominator != 1:
                raise DomainError("substitution makes an exponent non-integral")
            exps.append(ExpFactor(base, ex))
        polys = [PolyFactor(substitute(f.value, vals), f.power) for f in self.polys]
        for f in polys:
            if f.value.is_zero():
                raise PoleError("polynomial factor vanishes after substitution") if f.power < 0 \
                    else ZeroBaseError("kernel vanishes identically after substitution")
        return HyperTerm.build(self.variables, self.params, constant, pochs, exps, polys)


def _const_of(p: Poly) -> Poly:
    ctx = p.context()
    zero = (0,) * ctx.nvars()
    for m, c in zip(p.monoms(), p.coeffs()):
        if m == zero:
            return ctx.constant(c)
    return ctx.constant(0)


# ---------------------------------------------------------------------------
# shift quotients


def _pochhammer_ratio_poly(base: Poly, index: Poly, m: int) -> RatFunc:
    """(base + m)_index / (base)_index for integer m, as a rational function."""
    one = RatFunc(base.context().constant(1), normalized=True)
    r = one
    if m >= 0:
        for j in range(m):
            r = r * RatFunc(base + index + to_fmpq(j), base + to_fmpq(j))
    else:
        for j in range(1, -m + 1):
            r = r * RatFunc(base - to_fmpq(j), base + index - to_fmpq(j))
    return r


def shift_quotient(term: HyperTerm, name: str) -> RatFunc:
    """G(..., name+1, ...) / G(..., name, ...) as a normalized rational function."""
    if name not in term.discrete:
        raise DomainError(f"{name} is not a discrete variable of the kernel")
    ctx = term.ctx
    one = RatFunc(ctx.constant(1), normalized=True)
    result = one
    x = term.gen(name)

    # Pochhammer indices equal to `name`
    for p in term.pochs:
        if p.run_var == name:
            result = result * RatFunc(p.base + x) ** p.power

    # Pochhammer bases involving `name`: group by linear part, pair up integer offsets
    groups: dict[tuple[str, str], list[tuple[Poly, int]]] = {}
    for p in term.pochs:
        c = _coeff_of(p.base, name)
        if not c:
            continue
        shifted = shift(p.base, name, 1)
        for base, mult in ((shifted, p.power), (p.base, -p.power)):
            c0 = constant_value(_const_of(base))
            lin = base - _const_of(base)
            key = (p.run_var, str(lin), c0 - (c0.numerator // c0.denominator))
            groups.setdefault(key, []).append((base, mult))
    for (run_var, _, _), items in groups.items():
        if sum(m for _, m in items) != 0:
            raise NotHypergeometricError(
                f"Pochhammer factors do not pair under the shift of {name}")
        consts = [constant_value(_const_of(b)) for b, _ in items]
        ref = min(consts)
        ref_base = items[consts.index(ref)][0]
        index = term.gen(run_var)
        for (b, mult), c in zip(items, consts):
            off = c - ref
            if off.denominator != 1:
                raise NotHypergeometricError(
                    f"Pochhammer bases differ by a non-integer under the shift of {name}")
            if off:
                result = result * _pochhammer_ratio_poly(ref_base, index, int(off)) ** mult

    for e in term.exps:
        c = _coeff_of(e.exponent, name)
        if not c:
            continue
        c = int(c)
        if e.rational_base:
            result = result * RatFunc(ctx.constant(to_fmpq(e.base ** c)), normalized=True)
        else:
            result = result * RatFunc(e.base) ** c

    for f in term.polys:
        if name in used_names(f.value):
            result = result * (RatFunc(shift(f.value, name, 1), f.value)) ** f.power
    return result


def _coeff_of(p: Poly, name: str) -> Fraction:
    cs = coefficients(p, name)
    c = cs.get(1)
    if c is None:
        return Fraction(0)
    return constant_value(c)


# ---------------------------------------------------------------------------
# exact evaluation


def _linear_value(p: Poly, values: dict) -> Fraction:
    return constant_value(substitute(p, values))


def eval_term_exact(term: HyperTerm, assignment: dict) -> Fraction:
    """Exact value at a point assigning every variable a rational."""
    vals = {k: Fraction(v) for k, v in assignment.items()}
    missing = set(term.variables) - set(vals)
    if missing:
        raise DomainError(f"unassigned variables: {sorted(missing)}")
    for v in term.discrete:
        if vals[v].denominator != 1:
            raise DomainError(f"discrete variable {v} needs an integer value")
    num = term.constant
    den = Fraction(1)
    for f in term.polys:
        v = _linear_value(f.value, vals)
        if f.power > 0:
            num *= v ** f.power
        else:
            if not v:
                raise PoleError(f"polynomial factor {f.value} vanishes")
            den *= v ** -f.power
    for p in term.pochs:
        a = _linear_value(p.base, vals)
        n = int(vals[p.run_var])
        if n < 0:
            raise DomainError("negative Pochhammer index")
        v = pochhammer_exact(a, n)
        if p.power > 0:
            num *= v ** p.power
        else:
            if not v:
                raise PoleError(f"denominator Pochhammer ({p.base})_{p.run_var} vanishes")
            den *= v ** -p.power
    for x in term.exps:
        e = _linear_value(x.exponent, vals)
        base = x.base if x.rational_base else _linear_value(x.base, vals)
        if e.denominator != 1:
            raise DomainError("fractional exponent")
        if not base:
            raise PoleError("exponential base vanishes") if e < 0 else DomainError("zero base")
        num *= base ** int(e)
    return num / den


def eval_term_params(term: HyperTerm, assignment: dict) -> RatFunc:
    """Exact value with the free parameters left symbolic (a rational function)."""
    vals = {k: Fraction(v) for k, v in assignment.items()}
    missing = set(term.discrete) - set(vals)
    if missing:
        raise DomainError(f"unassigned variables: {sorted(missing)}")
    ctx = term.ctx
    r = RatFunc(ctx.constant(to_fmpq(term.constant)), normalized=True)
    for f in term.polys:
        v = substitute(f.value, vals)
        if v.is_zero():
            if f.power < 0:
                raise PoleError(f"polynomial factor {f.value} vanishes")
            return RatFunc(ctx.constant(0), normalized=True)
        r = r * RatFunc(v) ** f.power
    for p in term.pochs:
        a = substitute(p.base, vals)
        n = int(vals[p.run_var])
        prod = ctx.constant(1)
        for j in range(n):
            prod = prod * (a + to_fmpq(j))
        if prod.is_zero():
            if p.power < 0:
                raise PoleError(f"denominator Pochhammer ({p.base})_{p.run_var} vanishes")
            return RatFunc(ctx.constant(0), normalized=True)
        r = r * RatFunc(prod) ** p.power
    for x in term.exps:
        e = _linear_value(x.exponent, vals)
        if e.denominator != 1:
            raise DomainError("fractional exponent")
        if x.rational_base:
            r = r * (x.base ** int(e))
        else:
            r = r * RatFunc(substitute(x.base, vals)) ** int(e)
    return r


def partial_value(term: HyperTerm, name: str, value: int) -> RatFunc:
    """G at ``name = value`` divided by its exponential factors at ``name = 0``.

    The result is a rational function of the remaining variables; the omitted
    factor never vanishes, so zeros and poles of G at fixed ``name`` are
    exactly those of the returned function.
    """
    ctx = term.ctx
    vals = {name: Fraction(value)}
    r = RatFunc(ctx.constant(to_fmpq(term.constant)), normalized=True)
    for f in term.polys:
        v = substitute(f.value, vals)
        if v.is_zero():
            if f.power < 0:
                _raise_pole()
            return RatFunc(ctx.constant(0), normalized=True)
        r = r * RatFunc(v) ** f.power
    for p in term.pochs:
        if p.run_var == name:
            prod = ctx.constant(1)
            for j in range(value):
                prod = prod * (p.base + to_fmpq(j))
            if prod.is_zero():
                if p.power < 0:
                    _raise_pole()
                return RatFunc(ctx.constant(0), normalized=True)
            r = r * RatFunc(prod) ** p.power
        elif name in used_names(p.base):
            raise DomainError("partial_value needs Pochhammer bases free of the fixed variable")
    for x in term.exps:
        c = int(_coeff_of(x.exponent, name))
        if not c:
            continue
        if x.rational_base:
            r = r * (x.base ** (c * value))
        else:
            r = r * RatFunc(x.base) ** (c * value)
    return r


def _raise_pole():
    raise PoleError("denominator factor vanishes")


def termination_bound(term: HyperTerm, sum_var: str | None = None,
                      assignment: dict | None = None) -> int | None:
    """Least N with G = 0 for all sum_var >= N, or None if nothing terminates.

    Also checks that no denominator factor vanishes on ``0 <= sum_var < N``.
    """
    sum_var = sum_var or term.sum_var
    vals = {k: Fraction(v) for k, v in (assignment or {}).items()}
    bound = None
    for p in term.pochs:
        if p.run_var != sum_var or p.power < 0:
            continue
        a = substitute(p.base, vals)
        if not a.is_constant():
            raise DomainError(f"Pochhammer base {p.base} is not determined by the assignment")
        a = constant_value(a)
        if a.denominator == 1 and a <= 0:
            n = int(-a) + 1
            bound = n if bound is None else min(bound, n)
    if bound is None:
        return None
    for p in term.pochs:
        if p.run_var != sum_var or p.power > 0:
            continue
        a = constant_value(substitute(p.base, vals))
        if a.denominator == 1 and a <= 0 and -a < bound - 1:
            raise PoleError(f"denominator Pochhammer ({p.base})_{sum_var} vanishes "
                            f"inside the support 0..{bound - 1}")
    for f in term.polys:
        if f.power > 0:
            continue
        v = substitute(f.value, vals)
        if used_names(v) - {sum_var}:
            continue
        for n in range(bound):
            if substitute(v, {sum_var: n}).is_zero():
                raise PoleError(f"polynomial factor {f.value} vanishes at {sum_var}={n}")
    return bound


def theta_log_derivative(term: HyperTerm, zname: str = "z") -> RatFunc:
    """``z d/dz log G`` as a rational function (Pochhammer bases must be z-free)."""
    ctx = term.ctx
    z = term.gen(zname)
    L = RatFunc(ctx.constant(0), normalized=True)
    for p in term.pochs:
        if zname in used_names(p.base):
            raise DomainError(f"Pochhammer base {p.base} depends on {zname}")
    for x in term.exps:
        if not x.rational_base and zname in used_names(x.base):
            L = L + RatFunc(x.exponent) * RatFunc(z * x.base.derivative(zname), x.base)
    for f in term.polys:
        if zname in used_names(f.value):
            L = L + RatFunc(z * f.value.derivative(zname), f.value) * f.power
    return L


def apply_theta(term: HyperTerm, a, b, z0, zname: str = "z") -> HyperTerm:
    """``(a + b*theta) G`` at ``z = z0``, as a kernel in the remaining variables."""
    weight = (theta_log_derivative(term, zname) * Fraction(b) + Fraction(a))
    weight = weight.substitute({zname: Fraction(z0)})
    if weight.is_zero():
        raise ZeroBaseError("weighted kernel vanishes identically")
    base = term.substitute({zname: Fraction(z0)})
    out = HyperTerm.build(base.variables, base.params, base.constant, base.pochs, base.exps,
                          base.polys + (PolyFactor(weight.num, 1), PolyFactor(weight.den, -1)))
    rest = tuple(v for v in term.variables if v != zname)
    return out.with_variables(rest, tuple(p for p in term.params if p != zname))


# ---------------------------------------------------------------------------
# DSL


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[()*/^+\-,]))")


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(lines: list[tuple[int, str]]) -> list[_Tok]:
    toks = []
    for lineno, text in lines:
        pos = 0
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
                continue
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise TermSyntaxError(f"unexpected character {text[pos]!r}", lineno, pos + 1)
            kind = m.lastgroup
            start = m.start(kind)
            toks.append(_Tok(kind, m.group(kind), lineno, start + 1))
            pos = m.end()
    end_line = lines[-1][0] if lines else 1
    toks.append(_Tok("end", "", end_line, len(lines[-1][1]) + 1 if lines else 1))
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok], variables: tuple[str, ...], params: tuple[str, ...]):
        self.toks = toks
        self.i = 0
        self.variables = variables
        self.params = params
        self.ctx = ring(variables)

    # token helpers
    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise TermSyntaxError(msg, tok.line, tok.col)

    def expect(self, text: str) -> _Tok:
        t = self.peek()
        if t.text != text:
            self.error(f"expected {text!r}, found {t.text or 'end of input'!r}")
        return self.next()

    def is_op(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind == "op" and t.text == text

    def var_gen(self, tok: _Tok) -> Poly:
        if tok.text not in self.variables:
            raise UndeclaredVariableError(f"undeclared variable {tok.text!r}", tok.line, tok.col)
        return self.ctx.gens()[self.variables.index(tok.text)]

    # grammar
    def parse(self):
        acc = _Product()
        self.expr(acc, 1)
        if self.peek().kind != "end":
            self.error(f"unexpected {self.peek().text!r}")
        return acc

    def expr(self, acc: "_Product", sign: int):
        self.factor(acc, sign)
        while self.is_op("*") or self.is_op("/"):
            op = self.next().text
            self.factor(acc, sign if op == "*" else -sign)

    def factor(self, acc: "_Product", sign: int):
        neg = False
        if self.is_op("-"):
            self.next()
            neg = True
        start = self.peek()
        atom = self.atom()
        exponent = self.ctx.constant(1)
        if self.is_op("^"):
            self.next()
            exponent = self.exponent()
        if neg:
            acc.constant *= -1
        acc.add(atom, exponent, sign, start, self)

    def rational(self) -> Fraction:
        t = self.next()
        if t.kind != "num":
            self.error("expected a number", t)
        val = Fraction(int(t.text))
        if self.is_op("/") and self.peek(1).kind == "num":
            self.next()
            d = int(self.next().text)
            if d == 0:
                self.error("zero denominator")
            val /= d
        return val

    def atom(self):
        t = self.peek()
        if t.kind == "num":
            return ("const", self.rational())
        if t.kind == "id" and t.text == "poch":
            self.next()
            self.expect("(")
            base = self.linform()
            self.expect(",")
            idx = self.next()
            if idx.kind != "id":
                self.error("expected a variable name", idx)
            self.var_gen(idx)
            if idx.text in used_names(base):
                self.error("Pochhammer base may not involve its own index", idx)
            self.expect(")")
            return ("poch", (base, idx.text))
        if t.kind == "id":
            self.next()
            return ("lin", self.var_gen(t))
        if self.is_op("("):
            save = self.i
            self.next()
            try:
                lin = self.linform()
                if self.is_op(")"):
                    self.next()
                    if lin.is_constant():
                        return ("const", constant_value(lin))
                    return ("lin", lin)
            except UndeclaredVariableError:
                raise
            except TermSyntaxError:
                pass
            self.i = save
            self.next()
            inner = _Product()
            self.expr(inner, 1)
            self.expect(")")
            return ("group", inner)
        self.error(f"unexpected {t.text or 'end of input'!r}")

    def linform(self) -> Poly:
        """Signed sum of terms ``c``, ``c*v``, ``v``, ``v/d``, ``c*v/d``."""
        total = self.ctx.constant(0)
        first = True
        while True:
            sign = 1
            if self.is_op("+") or self.is_op("-"):
                sign = -1 if self.next().text == "-" else 1
            elif not first:
                break
            total = total + self.linterm() * to_fmpq(sign)
            first = False
            if not (self.is_op("+") or self.is_op("-")):
                break
        return total

    def linterm(self) -> Poly:
        t = self.peek()
        if t.kind == "num":
            c = self.rational()
            if self.is_op("*") and self.peek(1).kind == "id" and self.peek(1).text != "poch":
                self.next()
                v = self.var_gen(self.next())
                if self.is_op("/") and self.peek(1).kind == "num":
                    self.next()
                    c /= int(self.next().text)
                return v * to_fmpq(c)
            return self.ctx.constant(to_fmpq(c))
        if t.kind == "id" and t.text != "poch":
            self.next()
            v = self.var_gen(t)
            if self.is_op("/") and self.peek(1).kind == "num":
                self.next()
                return v * to_fmpq(Fraction(1, int(self.next().text)))
            return v
        self.error("expected a linear form")

    def exponent(self) -> Poly:
        if self.is_op("("):
            self.next()
            e = self.intlinear()
            self.expect(")")
            return e
        return self.intlinear()

    def intlinear(self) -> Poly:
        total = self.ctx.constant(0)
        first = True
        while True:
            sign = 1
            if self.is_op("+") or self.is_op("-"):
                sign = -1 if self.next().text == "-" else 1
            elif not first:
                break
            t = self.peek()
            if t.kind == "num":
                c = int(self.next().text)
                # "2*n" continues the exponent; "3*z" or "3*n^2" starts a new factor
                if (self.is_op("*") and self.peek(1).kind == "id"
                        and self.peek(1).text in self.variables
                        and self.peek(1).text not in self.params
                        and not self.is_op("^", 2)):
                    self.next()
                    total = total + self.var_gen(self.next()) * (sign * c)
                else:
                    total = total + self.ctx.constant(sign * c)
            elif t.kind == "id" and t.text != "poch":
                self.next()
                total = total + self.var_gen(t) * sign
            else:
                self.error("expected an integer linear exponent")
            first = False
            if not (self.is_op("+") or self.is_op("-")):
                break
            # only continue when the next token starts another exponent term
            nxt = self.peek(1)
            if not (nxt.kind == "num" or (nxt.kind == "id" and nxt.text in self.variables)):
                break
        return total


class _Product:
    def __init__(self):
        self.constant = Fraction(1)
        self.pochs: list[PochFactor] = []
        self.exps: list[ExpFactor] = []
        self.polys: list[PolyFactor] = []

    def add(self, atom, exponent: Poly, sign: int, tok: _Tok, parser: _Parser):
        kind, val = atom
        const_exp = exponent.is_constant()
        e = int(constant_value(exponent)) if const_exp else None
        if kind == "const":
            if const_exp:
                if not val and e * sign < 0:
                    raise ZeroBaseError("division by zero", tok.line, tok.col)
                if not val:
                    raise ZeroBaseError("kernel is identically zero", tok.line, tok.col)
                self.constant *= val ** (e * sign)
            else:
                if not val:
                    raise ZeroBaseError("zero base in exponential factor", tok.line, tok.col)
                self.exps.append(ExpFactor(val, exponent * sign))
        elif kind == "lin":
            if val.is_zero():
                raise ZeroBaseError("zero base", tok.line, tok.col)
            if const_exp:
                self.polys.append(PolyFactor(val, e * sign))
            else:
                if used_names(val) - set(parser.params):
                    raise TermSyntaxError("variable exponent on a base involving a discrete "
                                          "variable", tok.line, tok.col)
                self.exps.append(ExpFactor(val, exponent * sign))
        elif kind == "poch":
            if not const_exp:
                raise TermSyntaxError("Pochhammer powers must be integers", tok.line, tok.col)
            base, run_var = val
            self.pochs.append(PochFactor(base, run_var, e * sign))
        else:
            if not const_exp:
                raise TermSyntaxError("a parenthesized product needs an integer power",
                                      tok.line, tok.col)
            p = e * sign
            if val.constant == 0:
                raise ZeroBaseError("kernel is identically zero", tok.line, tok.col)
            self.constant *= val.constant ** p
            self.pochs += [PochFactor(f.base, f.run_var, f.power * p) for f in val.pochs]
            self.exps += [ExpFactor(f.base, f.exponent * p) for f in val.exps]
            self.polys += [PolyFactor(f.value, f.power * p) for f in val.polys]


_HEADER = re.compile(r"^\s*(vars|params)\s*:\s*(.*)$")


def parse_term(text: str, variables: Sequence[str] | None = None,
               params: Sequence[str] = ()) -> HyperTerm:
    """Parse DSL text into a canonical :class:`HyperTerm`.

    A ``vars:`` header overrides ``variables``; without either the
    variables default to ``n, k``.
    """
    body: list[tuple[int, str]] = []
    header_vars = None
    header_params: list[str] = []
    for lineno, raw in enumerate(text.splitlines() or [""], start=1):
        line = raw.split("#", 1)[0]
        m = _HEADER.match(line)
        if m and not body:
            names = [s.strip() for s in m.group(2).split(",") if s.strip()]
            for nm in names:
                if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", nm) or nm == "poch":
                    raise TermSyntaxError(f"bad variable name {nm!r}", lineno, 1)
            if m.group(1) == "vars":
                header_vars = names
            else:
                header_params = names
            continue
        if line.strip():
            body.append((lineno, line))
    if not body:
        raise TermSyntaxError("empty kernel expression", 1, 1)
    if header_vars is not None:
        variables = tuple(header_vars) + tuple(p for p in header_params if p not in header_vars)
        params = tuple(header_params)
    else:
        variables = tuple(variables or DEFAULT_VARIABLES)
    if len(set(variables)) != len(variables):
        raise TermSyntaxError("duplicate variable in header", 1, 1)
    params = tuple(p for p in variables if p in set(params) or p == "z")
    parser = _Parser(_tokenize(body), variables, params)
    prod = parser.parse()
    try:
        return HyperTerm.build(variables, params, prod.constant, prod.pochs, prod.exps, prod.polys)
    except TermSyntaxError:
        raise
    except DomainError as exc:
        tok = body[0]
        raise TermSyntaxError(str(exc), tok[0], 1) from exc


# rendering


def _fmt_rat(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def render_linear(p: Poly, variables: Sequence[str]) -> str:
    """Linear form as DSL text, variables in declaration order then constant."""
    if p.total_degree() > 1:
        raise DomainError(f"{p} is not a linear form")
    parts = []
    for v in variables:
        c = _coeff_of(p, v) if v in used_names(p) else Fraction(0)
        if not c:
            continue
        mag = abs(c)
        if mag == 1:
            s = v
        elif mag.denominator == 1:
            s = f"{mag.numerator}*{v}"
        else:
            s = f"{_fmt_rat(mag)}*{v}"
        parts.append(("-" if c < 0 else "+", s))
    c0 = constant_value(_const_of(p))
    if c0 or not parts:
        parts.append(("-" if c0 < 0 else "+", _fmt_rat(abs(c0))))
    out = ""
    for i, (sg, s) in enumerate(parts):
        if i == 0:
            out = ("-" if sg == "-" else "") + s
        else:
            out += sg + s
    return out


def _render_exponent(e: Poly, variables) -> str:
    s = render_linear(e, variables)
    if re.fullmatch(r"\d+|[A-Za-z_][A-Za-z_0-9]*", s):
        return s
    return f"({s})"


def render_term(term: HyperTerm) -> str:
    """Canonical DSL text; parsing it reproduces the same kernel."""
    v = term.variables
    header = "vars: " + ", ".join(v)
    extra = [p for p in term.params if p != "z"]
    if extra:
        header += "\nparams: " + ", ".join(extra)
    factors = []
    for p in term.pochs:
        s = f"poch({render_linear(p.base, v)},{p.run_var})"
        factors.append((s, p.power))
    for x in term.exps:
        base = f"({_fmt_rat(x.base)})" if x.rational_base else f"({render_linear(x.base, v)})"
        factors.append((f"{base}^{_render_exponent(x.exponent, v)}", 1))
    for f in term.polys:
        factors.append((f"({render_linear(f.value, v)})", f.power))
    num = [s if e == 1 else f"{s}^{e}" for s, e in factors if e > 0]
    den = [s if e == -1 else f"{s}^{-e}" for s, e in factors if e < 0]
    c = term.constant
    head = _fmt_rat(c)
    if c.denominator != 1 or c < 0:
        head = f"({head})"
    lead = [head] if (c != 1 or not num) else []
    body = " * ".join(lead + num)
    if den:
        body += " / (" + " * ".join(den) + ")"
    return header + "\n" + body
