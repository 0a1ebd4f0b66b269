"""Exact multivariate polynomials over Q and their fraction fields.

Polynomials are ``flint.fmpq_mpoly`` values in a lexicographic context whose
variable order is the declaration order (summation variable first).  This
module adds the normalizations, shift/substitution helpers, dispersion sets,
the rational-function type and an exact linear solver on top.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

from flint import fmpq, fmpq_mpoly, fmpq_mpoly_ctx, fmpq_poly

from .errors import DomainError

Poly = fmpq_mpoly


def ring(names: Sequence[str]) -> fmpq_mpoly_ctx:
    """Polynomial context over Q in ``names`` (lex order, first name largest)."""
    names = tuple(names) or ("_",)
    return fmpq_mpoly_ctx.get(names, "lex")


def to_fraction(c) -> Fraction:
    return Fraction(int(c.p), int(c.q))


def to_fmpq(x) -> fmpq:
    x = Fraction(x)
    return fmpq(x.numerator, x.denominator)


def const(ctx: fmpq_mpoly_ctx, value) -> Poly:
    return ctx.constant(to_fmpq(value))


def var(ctx: fmpq_mpoly_ctx, name: str) -> Poly:
    return ctx.gens()[ctx.names().index(name)]


def is_constant(p: Poly) -> bool:
    return p.is_constant()


def constant_value(p: Poly) -> Fraction:
    if not p.is_constant():
        raise DomainError(f"{p} is not constant")
    return Fraction(0) if p.is_zero() else to_fraction(p.coeffs()[0])


def leading_coefficient(p: Poly) -> Fraction:
    """Coefficient of the lex-largest monomial."""
    return to_fraction(p.coeffs()[0])


def rational_content(p: Poly) -> Fraction:
    """Positive rational c with p/c integral and primitive."""
    cs = [to_fraction(c) for c in p.coeffs()]
    if not cs:
        return Fraction(0)
    g = reduce(math.gcd, (c.numerator for c in cs))
    l = reduce(math.lcm, (c.denominator for c in cs))
    return Fraction(abs(g), l)


def primitive(p: Poly) -> tuple[Fraction, Poly]:
    """Split ``p = c * q`` with q integral, content 1 and positive leading coefficient."""
    if p.is_zero():
        return Fraction(0), p
    c = rational_content(p)
    if leading_coefficient(p) < 0:
        c = -c
    return c, p * to_fmpq(1 / c)


def poly_gcd(p: Poly, q: Poly) -> Poly:
    """gcd normalized to be primitive with positive leading coefficient."""
    if p.is_zero() and q.is_zero():
        return p
    return primitive(p.gcd(q))[1]


def poly_lcm(p: Poly, q: Poly) -> Poly:
    return exact_div(p * q, p.gcd(q))


def exact_div(p: Poly, q: Poly) -> Poly:
    quo, rem = divmod(p, q)
    if not rem.is_zero():
        raise DomainError("inexact polynomial division")
    return quo


def degree(p: Poly, name: str) -> int:
    """Degree in one variable; -1 for the zero polynomial."""
    if p.is_zero():
        return -1
    i = p.context().names().index(name)
    return max(m[i] for m in p.monoms())


def coefficients(p: Poly, name: str) -> dict[int, Poly]:
    """Coefficients of p viewed as a polynomial in ``name``."""
    ctx = p.context()
    i = ctx.names().index(name)
    buckets: dict[int, dict] = {}
    for m, c in zip(p.monoms(), p.coeffs()):
        rest = m[:i] + (0,) + m[i + 1:]
        buckets.setdefault(m[i], {})[rest] = c
    return {e: ctx.from_dict(d) for e, d in buckets.items()}


def leading_in(p: Poly, name: str) -> Poly:
    cs = coefficients(p, name)
    return cs[max(cs)]


def content_in(p: Poly, name: str) -> Poly:
    """gcd of the coefficients of p as a polynomial in ``name`` (free of ``name``)."""
    g = None
    for c in coefficients(p, name).values():
        g = c if g is None else g.gcd(c)
        if g.is_constant():
            break
    return primitive(g)[1] if g is not None else g


def shift(p: Poly, name: str, amount=1) -> Poly:
    """p with ``name`` replaced by ``name + amount``."""
    ctx = p.context()
    gens = list(ctx.gens())
    i = ctx.names().index(name)
    if isinstance(amount, fmpq_mpoly):
        gens[i] = gens[i] + amount
    else:
        gens[i] = gens[i] + to_fmpq(amount)
    return p.compose(*gens, ctx=ctx)


def substitute(p: Poly, values: dict) -> Poly:
    """Substitute rationals (or same-context polynomials) for variables."""
    if not values:
        return p
    rational = {k: to_fmpq(v) for k, v in values.items() if not isinstance(v, fmpq_mpoly)}
    if rational:
        p = p.subs(rational)
    polys = {k: v for k, v in values.items() if isinstance(v, fmpq_mpoly)}
    if polys:
        ctx = p.context()
        gens = [polys.get(nm, g) for nm, g in zip(ctx.names(), ctx.gens())]
        p = p.compose(*gens, ctx=ctx)
    return p


def convert(p: Poly, ctx: fmpq_mpoly_ctx) -> Poly:
    """Move p into a context whose names include all names p uses."""
    if p.context() is ctx:
        return p
    src = p.context().names()
    dst = ctx.names()
    idx = []
    for nm, used in zip(src, _used_vars(p)):
        if nm in dst:
            idx.append(dst.index(nm))
        elif used:
            raise DomainError(f"variable {nm} missing from target context")
        else:
            idx.append(None)
    d = {}
    for m, c in zip(p.monoms(), p.coeffs()):
        e = [0] * len(dst)
        for j, x in zip(idx, m):
            if j is not None:
                e[j] = x
        d[tuple(e)] = c
    return ctx.from_dict(d)


def _used_vars(p: Poly) -> list[bool]:
    used = [False] * p.context().nvars()
    for m in p.monoms():
        for i, x in enumerate(m):
            if x:
                used[i] = True
    return used


def used_names(p: Poly) -> set[str]:
    return {nm for nm, u in zip(p.context().names(), _used_vars(p)) if u}


def univariate(p: Poly, name: str) -> fmpq_poly:
    """p as a univariate fmpq_poly; p must not involve other variables."""
    extra = used_names(p) - {name}
    if extra:
        raise DomainError(f"polynomial involves {sorted(extra)}, expected only {name}")
    cs = coefficients(p, name)
    if not cs:
        return fmpq_poly([])
    dense = [fmpq(0)] * (max(cs) + 1)
    for e, c in cs.items():
        dense[e] = c.coeffs()[0] if not c.is_zero() else fmpq(0)
    return fmpq_poly(dense)


def integer_roots(p: Poly, name: str) -> list[int]:
    """Integers r such that p vanishes identically in the other variables at name=r."""
    if p.is_zero():
        raise DomainError("zero polynomial has every root")
    ctx = p.context()
    i = ctx.names().index(name)
    groups: dict[tuple, dict[int, fmpq]] = {}
    for m, c in zip(p.monoms(), p.coeffs()):
        rest = m[:i] + m[i + 1:]
        groups.setdefault(rest, {})[m[i]] = c
    g = None
    for coeffs in groups.values():
        dense = [fmpq(0)] * (max(coeffs) + 1)
        for e, c in coeffs.items():
            dense[e] = c
        u = fmpq_poly(dense)
        g = u if g is None else g.gcd(u)
        if g.degree() <= 0:
            return []
    roots = []
    for r, _mult in g.roots():
        r = Fraction(int(r.p), int(r.q))
        if r.denominator == 1:
            roots.append(int(r))
    return sorted(roots)


def dispersion_set(p: Poly, q: Poly, name: str) -> set[int]:
    """All j >= 0 such that p(name) and q(name + j) have a nonconstant common factor.

    Coefficients may involve the other variables of the context, which are
    treated as transcendental parameters.
    """
    if p.is_zero() or q.is_zero():
        raise DomainError("dispersion of a zero polynomial")
    if degree(p, name) < 1 or degree(q, name) < 1:
        return set()
    ctx = p.context()
    j_name = _fresh_name(ctx.names(), "j")
    ctx2 = ring(ctx.names() + (j_name,))
    p2 = convert(p, ctx2)
    gens = list(ctx2.gens())
    i = ctx2.names().index(name)
    gens[i] = gens[i] + gens[-1]
    q2 = convert(q, ctx2).compose(*gens, ctx=ctx2)
    res = p2.resultant(q2, name)
    if res.is_zero():
        raise DomainError("resultant vanished identically; inputs share a shift-invariant factor")
    return {r for r in integer_roots(res, j_name) if r >= 0}


def _fresh_name(names: Iterable[str], base: str) -> str:
    names = set(names)
    cand = base
    i = 0
    while cand in names:
        i += 1
        cand = f"{base}{i}"
    return cand


class RatFunc:
    """Element of Q(vars) kept in lowest terms.

    The denominator is primitive over Z with a positive leading coefficient,
    so equal functions have identical numerator and denominator.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None, *, normalized: bool = False):
        if den is None:
            den = num.context().constant(1)
        if den.is_zero():
            raise ZeroDivisionError("RatFunc with zero denominator")
        if normalized:
            self.num, self.den = num, den
            return
        if num.is_zero():
            self.num, self.den = num, num.context().constant(1)
            return
        if not den.is_constant():
            g = num.gcd(den)
            if not g.is_constant():
                num = exact_div(num, g)
                den = exact_div(den, g)
        c, den = primitive(den)
        if c != 1:
            num = num * to_fmpq(1 / c)
        self.num, self.den = num, den

    # construction helpers ---------------------------------------------------

    @classmethod
    def from_value(cls, ctx: fmpq_mpoly_ctx, x) -> "RatFunc":
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, fmpq_mpoly):
            return cls(x, normalized=True)
        return cls(ctx.constant(to_fmpq(x)), normalized=True)

    @property
    def ctx(self) -> fmpq_mpoly_ctx:
        return self.num.context()

    def _lift(self, other) -> "RatFunc":
        if isinstance(other, RatFunc):
            if other.ctx is not self.ctx:
                raise TypeError("arithmetic between rational functions over different fields")
            return other
        if isinstance(other, fmpq_mpoly):
            if other.context() is not self.ctx:
                raise TypeError("arithmetic between rational functions over different fields")
            return RatFunc(other, normalized=True)
        if isinstance(other, (int, Fraction)):
            return RatFunc(self.ctx.constant(to_fmpq(other)), normalized=True)
        return NotImplemented

    # arithmetic ---------------------------------------------------------------

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, normalized=True)

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        if self.is_zero() or o.is_zero():
            return RatFunc(self.ctx.constant(0), normalized=True)
        # cross-cancel before multiplying to keep sizes down
        g1 = self.num.gcd(o.den)
        g2 = o.num.gcd(self.den)
        a, d = exact_div(self.num, g1), exact_div(o.den, g1)
        b, c = exact_div(o.num, g2), exact_div(self.den, g2)
        num, den = a * b, c * d
        k, den = primitive(den)
        return RatFunc(num * to_fmpq(1 / k), den, normalized=True)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return RatFunc(self.num ** e, self.den ** e, normalized=True)

    def __eq__(self, other):
        o = self._lift(other) if not isinstance(other, RatFunc) else other
        if o is NotImplemented:
            return False
        return self.ctx is o.ctx and self.num == o.num and self.den == o.den

    __hash__ = None

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        return constant_value(self.num) / constant_value(self.den)

    # substitution ---------------------------------------------------------------

    def shift(self, name: str, amount=1) -> "RatFunc":
        return RatFunc(shift(self.num, name, amount), shift(self.den, name, amount), normalized=True)

    def substitute(self, values: dict) -> "RatFunc":
        num, den = substitute(self.num, values), substitute(self.den, values)
        if den.is_zero():
            raise DomainError("denominator vanishes under substitution")
        return RatFunc(num, den)

    def evaluate(self, values: dict) -> Fraction:
        """Value at a point where every variable is assigned a rational."""
        r = self.substitute(values)
        return r.constant_value()

    def convert(self, ctx: fmpq_mpoly_ctx) -> "RatFunc":
        return RatFunc(convert(self.num, ctx), convert(self.den, ctx), normalized=True)

    def total_degree(self) -> int:
        return max(self.num.total_degree(), self.den.total_degree())

    def __repr__(self) -> str:
        return f"RatFunc({self})"

    def __str__(self) -> str:
        if self.den.is_one():
            return str(self.num)
        return f"({self.num})/({self.den})"


# ---------------------------------------------------------------------------
# exact linear algebra


@dataclass
class LinearSolution:
    """Particular solution (None when inconsistent) plus homogeneous basis."""

    particular: list | None
    nullspace: list[list]

    @property
    def consistent(self) -> bool:
        return self.particular is not None


def _field_of(entries) -> fmpq_mpoly_ctx | None:
    ctx = None
    for e in entries:
        if isinstance(e, (RatFunc, fmpq_mpoly)):
            c = e.ctx if isinstance(e, RatFunc) else e.context()
            if ctx is None:
                ctx = c
            elif c is not ctx:
                raise TypeError("linsolve_exact: entries from different coefficient fields")
        elif not isinstance(e, (int, Fraction)):
            raise TypeError(f"linsolve_exact: unsupported entry type {type(e).__name__}")
    return ctx


_Q = None


def _rational_ctx():
    global _Q
    if _Q is None:
        _Q = ring(("_",))
    return _Q


def _pivot_key(p: Poly) -> tuple[int, int]:
    return (p.total_degree(), len(p))


def _row_primitive(row: list[Poly]) -> list[Poly]:
    g = None
    for e in row:
        if e.is_zero():
            continue
        g = e if g is None else g.gcd(e)
        if g.is_constant():
            break
    if g is None:
        return row
    if g.is_constant():
        cs = [rational_content(e) for e in row if not e.is_zero()]
        num = reduce(math.gcd, (c.numerator for c in cs))
        den = reduce(math.lcm, (c.denominator for c in cs))
        f = to_fmpq(Fraction(den, num))
        return [e * f for e in row]
    return [exact_div(e, g) if not e.is_zero() else e for e in row]


def row_echelon_polys(rows: list[list[Poly]], ncols: int) -> tuple[list[list[Poly]], list[int]]:
    """Fraction-free Gauss-Jordan elimination on polynomial rows.

    Pivots are chosen per column by lowest total degree, then fewest terms.
    Returns the reduced rows (one per pivot) and their pivot columns.
    """
    rows = [_row_primitive(r) for r in rows if any(not e.is_zero() for e in r)]
    pivots: list[int] = []
    rank = 0
    for col in range(ncols):
        cands = [i for i in range(rank, len(rows)) if not rows[i][col].is_zero()]
        if not cands:
            continue
        best = min(cands, key=lambda i: (_pivot_key(rows[i][col]), i))
        rows[rank], rows[best] = rows[best], rows[rank]
        prow = rows[rank]
        pv = prow[col]
        for i in range(len(rows)):
            if i == rank or rows[i][col].is_zero():
                continue
            f = rows[i][col]
            g = pv.gcd(f)
            a, b = exact_div(pv, g), exact_div(f, g)
            new = [a * x - b * y for x, y in zip(rows[i], prow)]
            rows[i] = _row_primitive(new)
        pivots.append(col)
        rank += 1
    zero_rows = [r for r in rows[rank:]]
    return rows[:rank] + zero_rows, pivots


def linsolve_exact(matrix: Sequence[Sequence], rhs: Sequence) -> LinearSolution:
    """Solve ``matrix @ x = rhs`` exactly over Q or a rational function field.

    Entries may be ints, Fractions, polynomials or RatFuncs; all non-rational
    entries must share one context.  Results are Fractions over Q and RatFuncs
    otherwise.
    """
    nrows = len(matrix)
    if len(rhs) != nrows:
        raise ValueError("rhs length does not match matrix")
    ncols = len(matrix[0]) if nrows else 0
    if any(len(r) != ncols for r in matrix):
        raise ValueError("ragged matrix")
    ctx = _field_of([e for r in matrix for e in r] + list(rhs))
    over_q = ctx is None
    if over_q:
        ctx = _rational_ctx()
    # clear denominators row by row
    prows = []
    for r, b in zip(matrix, rhs):
        ents = [RatFunc.from_value(ctx, e) for e in list(r) + [b]]
        den = reduce(poly_lcm, (e.den for e in ents), ctx.constant(1))
        prows.append([exact_div(e.num * den, e.den) for e in ents])
    red, pivots = row_echelon_polys(prows, ncols)
    rank = len(pivots)
    for r in red[rank:]:
        if not r[ncols].is_zero():
            return LinearSolution(None, [])

    def out(x: RatFunc):
        return x.constant_value() if over_q else x

    zero = RatFunc(ctx.constant(0), normalized=True)
    particular = [zero] * ncols
    for row, col in zip(red, pivots):
        particular[col] = RatFunc(row[ncols], row[col])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [zero] * ncols
        v[f] = RatFunc(ctx.constant(1), normalized=True)
        for row, col in zip(red, pivots):
            if not row[f].is_zero():
                v[col] = RatFunc(-row[f], row[col])
        basis.append([out(x) for x in v])
    return LinearSolution([out(x) for x in particular], basis)


# ---------------------------------------------------------------------------
# parsing of printed polynomials and rational functions

_AST_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
            ast.Div: operator.truediv}


def parse_ratfunc(text: str, ctx: fmpq_mpoly_ctx) -> RatFunc:
    """Read back the printed form of a polynomial or RatFunc (``^`` or ``**`` powers)."""
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise DomainError(f"cannot parse rational function {text!r}") from exc
    names = ctx.names()

    def walk(node) -> RatFunc:
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return RatFunc(ctx.constant(node.value), normalized=True)
        if isinstance(node, ast.Name) and node.id in names:
            return RatFunc(ctx.gens()[names.index(node.id)], normalized=True)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = walk(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                e = node.right
                if not (isinstance(e, ast.Constant) and isinstance(e.value, int)):
                    raise DomainError("exponents must be integer literals")
                return walk(node.left) ** e.value
            op = _AST_OPS.get(type(node.op))
            if op is not None:
                return op(walk(node.left), walk(node.right))
        raise DomainError(f"unsupported syntax in {text!r}")

    return walk(tree)


def parse_poly(text: str, ctx: fmpq_mpoly_ctx) -> Poly:
    r = parse_ratfunc(text, ctx)
    if not r.den.is_one():
        raise DomainError(f"{text!r} is not a polynomial")
    return r.num
