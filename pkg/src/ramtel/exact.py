"""Exact rationals, error-tracked binary floats, and constant oracles.

Rationals are plain :class:`fractions.Fraction` values.  :class:`BigFloat`
stores ``man * 2**exp`` together with an integer radius ``rad`` in the same
units, so the true value lies in ``[(man - rad) * 2**exp, (man + rad) * 2**exp]``.
Every operation widens the radius conservatively.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import DomainError

Rational = Union[int, Fraction]

LOG2_10 = math.log2(10)
GUARD_DIGITS = 10


def pochhammer_exact(a: Rational, n: int) -> Fraction:
    """Rising factorial ``a (a+1) ... (a+n-1)``; the empty product is 1."""
    if n < 0:
        raise DomainError("pochhammer_exact needs n >= 0")
    a = Fraction(a)
    result = Fraction(1)
    for j in range(n):
        result *= a + j
        if not result:
            break
    return result


def digits_to_bits(digits: int) -> int:
    return int(math.ceil((digits + GUARD_DIGITS) * LOG2_10)) + 8


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _floor_log10_inverse(x: Fraction) -> int:
    """Largest integer d with ``x <= 10**-d`` (x > 0)."""
    num, den = x.numerator, x.denominator

    def ok(d: int) -> bool:
        return num * 10**d <= den if d >= 0 else num <= den * 10**(-d)

    d = len(str(den)) - len(str(num))
    while not ok(d):
        d -= 1
    while ok(d + 1):
        d += 1
    return d


@dataclass(frozen=True)
class BigFloat:
    """Binary float with a rigorous absolute error bound.

    ``prec`` is the mantissa width (bits) results are rounded to.
    """

    man: int
    exp: int
    rad: int = 0
    prec: int = 256

    # construction -------------------------------------------------------

    @classmethod
    def from_rational(cls, x: Rational, prec: int = 256) -> "BigFloat":
        x = Fraction(x)
        if not x:
            return cls(0, 0, 0, prec)
        p, q = x.numerator, x.denominator
        if q & (q - 1) == 0 and abs(p).bit_length() <= prec:
            return cls(p, -(q.bit_length() - 1), 0, prec)
        shift = prec - (abs(p).bit_length() - q.bit_length()) + 1
        if shift >= 0:
            m, r = divmod(p << shift, q)
        else:
            m, r = divmod(p, q << -shift)
        return cls(m, -shift, 1 if r else 0, prec)

    @classmethod
    def coerce(cls, x, prec: int = 256) -> "BigFloat":
        if isinstance(x, BigFloat):
            return x
        return cls.from_rational(x, prec)

    # accessors ------------------------------------------------------------

    @property
    def mid(self) -> Fraction:
        return _scaled(self.man, self.exp)

    @property
    def error_bound(self) -> Fraction:
        return _scaled(self.rad, self.exp)

    def lower(self) -> Fraction:
        return _scaled(self.man - self.rad, self.exp)

    def upper(self) -> Fraction:
        return _scaled(self.man + self.rad, self.exp)

    def abs_upper(self) -> Fraction:
        return _scaled(abs(self.man) + self.rad, self.exp)

    def contains(self, x: Rational) -> bool:
        return self.lower() <= Fraction(x) <= self.upper()

    def certified_digits(self) -> int:
        """Decimal digits d with ``error_bound <= 10**-d``."""
        if not self.rad:
            return 10**9
        return _floor_log10_inverse(self.error_bound)

    # arithmetic -----------------------------------------------------------

    def _round(self, prec: int | None = None) -> "BigFloat":
        prec = prec or self.prec
        bl = abs(self.man).bit_length()
        if bl <= prec:
            return BigFloat(self.man, self.exp, self.rad, prec)
        s = bl - prec
        half = 1 << (s - 1)
        man = (self.man + half) >> s
        rad = _ceil_div(self.rad, 1 << s) + 1
        return BigFloat(man, self.exp + s, rad, prec)

    def __neg__(self) -> "BigFloat":
        return BigFloat(-self.man, self.exp, self.rad, self.prec)

    def __abs__(self) -> "BigFloat":
        return BigFloat(abs(self.man), self.exp, self.rad, self.prec)

    def __add__(self, other) -> "BigFloat":
        if not isinstance(other, BigFloat):
            other = BigFloat.from_rational(other, self.prec)
        prec = max(self.prec, other.prec)
        if not other.man and not other.rad:
            return self
        if not self.man and not self.rad:
            return BigFloat(other.man, other.exp, other.rad, prec)
        e = min(self.exp, other.exp)
        a, b = self.exp - e, other.exp - e
        res = BigFloat((self.man << a) + (other.man << b),
                       e, (self.rad << a) + (other.rad << b), prec)
        return res._round()

    __radd__ = __add__

    def __sub__(self, other) -> "BigFloat":
        return self + (-BigFloat.coerce(other, self.prec))

    def __rsub__(self, other) -> "BigFloat":
        return BigFloat.coerce(other, self.prec) - self

    def __mul__(self, other) -> "BigFloat":
        if isinstance(other, (int, Fraction)):
            return self.mul_rational(other)
        prec = max(self.prec, other.prec)
        man = self.man * other.man
        rad = abs(self.man) * other.rad + abs(other.man) * self.rad + self.rad * other.rad
        return BigFloat(man, self.exp + other.exp, rad, prec)._round()

    __rmul__ = __mul__

    def mul_rational(self, x: Rational) -> "BigFloat":
        x = Fraction(x)
        p, q = x.numerator, x.denominator
        if q == 1:
            return BigFloat(self.man * p, self.exp, self.rad * abs(p), self.prec)._round()
        # enough fraction bits that the quotient carries a full mantissa
        shift = max(q.bit_length(), self.prec + q.bit_length() - abs(self.man * p).bit_length()) + 2
        m, r = divmod((self.man * p) << shift, q)
        rad = _ceil_div((self.rad * abs(p)) << shift, q) + (1 if r else 0)
        return BigFloat(m, self.exp - shift, rad, self.prec)._round()

    def __truediv__(self, other) -> "BigFloat":
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("BigFloat division by zero")
            return self.mul_rational(1 / Fraction(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "BigFloat":
        return BigFloat.coerce(other, self.prec) * self.reciprocal()

    def reciprocal(self) -> "BigFloat":
        """1/x, valid when the enclosure excludes zero."""
        if abs(self.man) <= self.rad:
            raise DomainError("reciprocal of an interval containing zero")
        prec = self.prec
        # mantissa of 1/man at 2*prec bits, then account for the radius
        shift = prec + abs(self.man).bit_length() + 2
        m, r = divmod(1 << shift, self.man)
        lo = abs(self.man) - self.rad
        # |1/x - 1/mid| <= rad / (|mid| * lo)  in units of 2**-exp
        err_num = self.rad << shift
        err_den = abs(self.man) * lo
        rad = _ceil_div(err_num, err_den) + 1
        return BigFloat(m, -shift - self.exp, rad, prec)._round()

    def __lt__(self, other) -> bool:
        return self.upper() < BigFloat.coerce(other).lower()

    def __gt__(self, other) -> bool:
        return self.lower() > BigFloat.coerce(other).upper()

    def with_prec(self, prec: int) -> "BigFloat":
        return BigFloat(self.man, self.exp, self.rad, prec)._round()

    # output ---------------------------------------------------------------

    def to_decimal(self, digits: int) -> str:
        """Round-to-nearest decimal string with ``digits`` fractional digits."""
        v = self.mid
        scaled = v * 10**digits
        n = math.floor(scaled + Fraction(1, 2))
        sign = "-" if n < 0 else ""
        s = str(abs(n)).rjust(digits + 1, "0")
        if digits:
            return f"{sign}{s[:-digits]}.{s[-digits:]}"
        return sign + s

    def __str__(self) -> str:
        d = max(1, min(self.certified_digits(), 60))
        return self.to_decimal(d)

    def __float__(self) -> float:
        return float(self.mid)


def _scaled(m: int, e: int) -> Fraction:
    if e >= 0:
        return Fraction(m << e)
    return Fraction(m, 1 << -e)


def agreement_digits(x: BigFloat, y: BigFloat | Rational, cap: int | None = None) -> int:
    """Digits d such that ``|x - y| <= 10**-d`` is certain (0 if none)."""
    if not isinstance(y, BigFloat):
        gap = abs(x.mid - Fraction(y)) + x.error_bound
    else:
        gap = abs(x.mid - y.mid) + x.error_bound + y.error_bound
    d = 10**9 if not gap else _floor_log10_inverse(gap)
    d = max(d, 0)
    return min(d, cap) if cap is not None else d


# ---------------------------------------------------------------------------
# constant oracles


def _atan_inv(m: int, one: int) -> tuple[int, int]:
    """Fixed-point arctan(1/m) scaled by ``one`` and its error in ulps."""
    total = 0
    power = one // m
    m2 = m * m
    k = 0
    terms = 0
    while power:
        term = power // (2 * k + 1)
        total += term if k % 2 == 0 else -term
        power //= m2
        k += 1
        terms += 1
    # two floor divisions per term, plus an alternating tail below one ulp
    return total, 2 * terms + 2


def pi_reference(digits: int) -> BigFloat:
    """pi from Machin's formula 16 atan(1/5) - 4 atan(1/239)."""
    if digits < 1:
        raise DomainError("digits must be positive")
    bits = digits_to_bits(digits)
    one = 1 << bits
    a, ea = _atan_inv(5, one)
    b, eb = _atan_inv(239, one)
    return BigFloat(16 * a - 4 * b, -bits, 16 * ea + 4 * eb, bits)._round()


def _isqrt_floor_ceil(n: int) -> tuple[int, int]:
    r = math.isqrt(n)
    return r, r if r * r == n else r + 1


def sqrt_bigfloat(x, digits: int) -> BigFloat:
    """Square root with a rigorous bound; raises on a certainly negative input."""
    bits = digits_to_bits(digits)
    x = BigFloat.coerce(x, bits)
    if x.man + x.rad < 0:
        raise DomainError("square root of a negative value")
    # bring x to exponent -2*bits so sqrt lands at exponent -bits
    target = -2 * bits
    shift = x.exp - target
    if shift >= 0:
        m, r = x.man << shift, x.rad << shift
    else:
        s = -shift
        m = x.man >> s
        r = _ceil_div(x.rad, 1 << s) + 1
    root, root_hi = _isqrt_floor_ceil(max(m, 0))
    lo = m - r
    if lo > 0:
        lo_root, _ = _isqrt_floor_ceil(lo)
        # |sqrt(a) - sqrt(b)| <= |a - b| / sqrt(min)
        err = _ceil_div(r + max(0, -m), max(lo_root, 1)) + 1
    else:
        _, hi_root = _isqrt_floor_ceil(m + r)
        err = hi_root + 1
    return BigFloat(root, -bits, err + (root_hi - root), bits)._round()


def _iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0."""
    if n < 2:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def rational_power(base: Rational, exponent: Rational, digits: int) -> BigFloat:
    """``base ** exponent`` for rational base > 0 and rational exponent."""
    base, exponent = Fraction(base), Fraction(exponent)
    bits = digits_to_bits(digits)
    if exponent.denominator == 1:
        return BigFloat.from_rational(base ** exponent.numerator, bits)
    if base <= 0:
        raise DomainError("fractional power of a nonpositive base")
    q = exponent.denominator
    val = base ** exponent.numerator
    # floor(val * 2**(q*bits)) then integer q-th root
    num = (val.numerator << (q * bits)) // val.denominator
    r = _iroot(num, q)
    # truncation of num loses < 1 unit, hence < 1 ulp after the root
    return BigFloat(r, -bits, 2, bits)._round()


# ---------------------------------------------------------------------------
# closed forms (p/q) * sqrt(d) * pi**e


def _squarefree_split(d: int) -> tuple[int, int]:
    """Return (s, f) with d = s**2 * f and f square-free."""
    s, f = 1, 1
    p = 2
    while p * p <= d:
        while d % (p * p) == 0:
            d //= p * p
            s *= p
        if d % p == 0:
            d //= p
            f *= p
        p += 1
    return s, f * d


@dataclass(frozen=True)
class AlgebraicConstant:
    """The value ``rational * sqrt(radicand) * pi**pi_power``."""

    rational: Fraction
    radicand: int = 1
    pi_power: int = -1

    def __post_init__(self):
        if self.radicand < 1:
            raise DomainError("radicand must be positive")
        if self.pi_power not in (-1, 0, 1):
            raise DomainError("pi_power must be -1, 0 or 1")
        s, f = _squarefree_split(self.radicand)
        object.__setattr__(self, "rational", Fraction(self.rational) * s)
        object.__setattr__(self, "radicand", f)

    @classmethod
    def power(cls, base: Rational, exponent: Rational) -> "AlgebraicConstant":
        """``base ** exponent`` for a positive rational base and a half-integer exponent."""
        base, exponent = Fraction(base), Fraction(exponent)
        if base <= 0:
            raise DomainError("power of a nonpositive base")
        if exponent.denominator not in (1, 2):
            raise DomainError("only half-integer exponents have a square-root form")
        if exponent.denominator == 1:
            return cls(base ** int(exponent), 1, 0)
        j = (exponent.numerator - 1) // 2
        return cls(base ** j / base.denominator, base.numerator * base.denominator, 0)

    def __mul__(self, other) -> "AlgebraicConstant":
        if not isinstance(other, AlgebraicConstant):
            other = AlgebraicConstant(Fraction(other), 1, 0)
        return AlgebraicConstant(self.rational * other.rational, self.radicand * other.radicand,
                                 self.pi_power + other.pi_power)

    __rmul__ = __mul__

    def inverse(self) -> "AlgebraicConstant":
        if not self.rational:
            raise ZeroDivisionError("inverse of zero")
        return AlgebraicConstant(1 / (self.rational * self.radicand), self.radicand,
                                 -self.pi_power)

    def __truediv__(self, other) -> "AlgebraicConstant":
        if not isinstance(other, AlgebraicConstant):
            other = AlgebraicConstant(Fraction(other), 1, 0)
        return self * other.inverse()

    def to_bigfloat(self, digits: int) -> BigFloat:
        bits = digits_to_bits(digits)
        v = BigFloat.from_rational(self.rational, bits)
        if self.radicand != 1:
            v = v * sqrt_bigfloat(self.radicand, digits + 5)
        if self.pi_power == -1:
            v = v / pi_reference(digits + 5)
        elif self.pi_power == 1:
            v = v * pi_reference(digits + 5)
        return v

    def __str__(self) -> str:
        p, q = self.rational.numerator, self.rational.denominator
        parts = []
        if p != 1 or (self.radicand == 1 and self.pi_power != 1):
            parts.append(str(p))
        if self.radicand != 1:
            parts.append(f"sqrt({self.radicand})")
        if self.pi_power == 1:
            parts.append("pi")
        num = "*".join(parts) if parts else "1"
        den = []
        if q != 1:
            den.append(str(q))
        if self.pi_power == -1:
            den.append("pi")
        if not den:
            return num
        d = den[0] if len(den) == 1 else "(" + "*".join(den) + ")"
        return f"{num}/{d}"

    _PATTERN = re.compile(
        r"^\s*(?P<sign>-)?\s*(?P<p>\d+)?\s*\*?\s*(?:sqrt\((?P<d>\d+)\))?\s*"
        r"(?:/\s*(?:(?P<q>\d+)|\(\s*(?P<q2>\d+)\s*\*\s*pi\s*\)|(?P<pi>pi)))?\s*$"
    )

    @classmethod
    def parse(cls, text: str) -> "AlgebraicConstant":
        """Parse forms like ``16/pi``, ``9*sqrt(7)/pi``, ``85*sqrt(255)/(54*pi)``."""
        m = cls._PATTERN.match(text)
        if not m or (m["p"] is None and m["d"] is None):
            raise ValueError(f"cannot parse closed form {text!r}")
        p = int(m["p"] or 1)
        if m["sign"]:
            p = -p
        q = int(m["q"] or m["q2"] or 1)
        pi_power = -1 if (m["pi"] or m["q2"]) else 0
        return cls(Fraction(p, q), int(m["d"] or 1), pi_power)

    def to_json(self) -> dict:
        return {"rational": f"{self.rational.numerator}/{self.rational.denominator}",
                "radicand": self.radicand, "piPower": self.pi_power, "text": str(self)}
