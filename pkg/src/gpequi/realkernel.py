"""Symbolic real constants and rigorous interval enclosures.

Constants are small expression trees over a closed atom set: rationals,
square roots of rationals, pi, logarithms of rationals and truncated
Liouville numbers.  Enclosures are fixed-point intervals ``[lo, hi] / 2**scale``
with integer endpoints, so every operation is exact integer arithmetic
followed by outward rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

LADDER_START = 128
DEFAULT_MAX_BITS = 16384
LIOUVILLE_MAX_TERMS = 6


class DivisorStraddlesZero(ArithmeticError):
    pass


class Unresolved(ArithmeticError):
    """A floor or comparison could not be decided at the current precision."""


Number = Union[int, Fraction]


def _floor_div(a: int, b: int) -> int:
    return a // b


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _ceil_shift(a: int, k: int) -> int:
    return -((-a) >> k)


# ---------------------------------------------------------------------------
# intervals


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo_m, hi_m] / 2**scale``; ``prec`` records the request."""

    lo_m: int
    hi_m: int
    scale: int
    prec: int = 0

    def __post_init__(self):
        if self.lo_m > self.hi_m:
            raise ValueError("empty interval")

    @classmethod
    def exact(cls, x: Number, scale: int) -> "Interval":
        x = Fraction(x)
        num = x.numerator << scale
        return cls(_floor_div(num, x.denominator), _ceil_div(num, x.denominator), scale, scale)

    @property
    def lo(self) -> Fraction:
        return Fraction(self.lo_m, 1 << self.scale)

    @property
    def hi(self) -> Fraction:
        return Fraction(self.hi_m, 1 << self.scale)

    @property
    def width(self) -> Fraction:
        return Fraction(self.hi_m - self.lo_m, 1 << self.scale)

    def mid(self) -> float:
        return (self.lo_m + self.hi_m) / (1 << (self.scale + 1))

    def __float__(self) -> float:
        return self.mid()

    def contains(self, x: Number) -> bool:
        x = Fraction(x)
        return self.lo <= x <= self.hi

    def is_point(self) -> bool:
        return self.lo_m == self.hi_m

    def _rescale(self, scale: int) -> tuple[int, int]:
        d = scale - self.scale
        if d >= 0:
            return self.lo_m << d, self.hi_m << d
        return self.lo_m >> -d, _ceil_shift(self.hi_m, -d)

    def rescaled(self, scale: int) -> "Interval":
        lo, hi = self._rescale(scale)
        return Interval(lo, hi, scale, self.prec)

    def _coerce(self, other) -> "Interval":
        if isinstance(other, Interval):
            return other
        if isinstance(other, (int, Fraction)):
            return Interval.exact(other, self.scale)
        return NotImplemented

    def __neg__(self) -> "Interval":
        return Interval(-self.hi_m, -self.lo_m, self.scale, self.prec)

    def __add__(self, other):
        if isinstance(other, int):
            return Interval(self.lo_m + (other << self.scale), self.hi_m + (other << self.scale), self.scale, self.prec)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        s = max(self.scale, other.scale)
        a, b = self._rescale(s)
        c, d = other._rescale(s)
        return Interval(a + c, b + d, s, min(self.prec, other.prec) or max(self.prec, other.prec))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            a, b = self.lo_m * other, self.hi_m * other
            return Interval(min(a, b), max(a, b), self.scale, self.prec)
        if isinstance(other, Fraction):
            p, q = other.numerator, other.denominator
            a, b = self.lo_m * p, self.hi_m * p
            lo, hi = min(a, b), max(a, b)
            return Interval(_floor_div(lo, q), _ceil_div(hi, q), self.scale, self.prec)
        if not isinstance(other, Interval):
            return NotImplemented
        s = max(self.scale, other.scale)
        a, b = self._rescale(s)
        c, d = other._rescale(s)
        prods = (a * c, a * d, b * c, b * d)
        return Interval(min(prods) >> s, _ceil_shift(max(prods), s), s,
                        min(self.prec, other.prec) or max(self.prec, other.prec))

    __rmul__ = __mul__

    def reciprocal(self) -> "Interval":
        if self.lo_m <= 0 <= self.hi_m:
            raise DivisorStraddlesZero("divisor enclosure contains 0")
        one = 1 << (2 * self.scale)
        return Interval(_floor_div(one, self.hi_m), _ceil_div(one, self.lo_m), self.scale, self.prec)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError
            return self * (1 / Fraction(other))
        if not isinstance(other, Interval):
            return NotImplemented
        s = max(self.scale, other.scale)
        return self.rescaled(s) * other.rescaled(s).reciprocal()

    def __rtruediv__(self, other):
        return self.rescaled(self.scale).reciprocal() * other

    def __pow__(self, k: int) -> "Interval":
        if k < 1:
            raise ValueError("exponent must be positive")
        if k % 2 == 1 or self.lo_m >= 0:
            lo, hi = self.lo_m, self.hi_m
        elif self.hi_m <= 0:
            lo, hi = -self.hi_m, -self.lo_m
        else:
            lo, hi = 0, max(-self.lo_m, self.hi_m)
        s = self.scale
        shift = s * (k - 1)
        return Interval(lo ** k >> shift, _ceil_shift(hi ** k, shift), s, self.prec)

    def floor(self) -> int:
        a = self.lo_m >> self.scale
        if a != self.hi_m >> self.scale:
            raise Unresolved("floor not resolved")
        return a

    def frac(self) -> "Interval":
        k = self.floor()
        return Interval(self.lo_m - (k << self.scale), self.hi_m - (k << self.scale), self.scale, self.prec)

    def sign(self) -> int:
        """Certified sign; raises Unresolved if 0 lies inside a proper interval."""
        if self.lo_m > 0:
            return 1
        if self.hi_m < 0:
            return -1
        if self.lo_m == 0 == self.hi_m:
            return 0
        raise Unresolved("sign not resolved")

    def __repr__(self) -> str:
        return f"Interval([{float(self.lo):.17g}, {float(self.hi):.17g}], scale={self.scale})"


# ---------------------------------------------------------------------------
# constants


class RealConst:
    """Base class of the constant expression tree."""

    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return add(self, neg(_lift(other)))

    def __rsub__(self, other):
        return add(_lift(other), neg(self))

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __truediv__(self, other):
        return div(self, _lift(other))

    def __rtruediv__(self, other):
        return div(_lift(other), self)

    def __neg__(self):
        return neg(self)

    def __float__(self) -> float:
        return eval_interval(self, 64).mid()


@dataclass(frozen=True, eq=True)
class Rational(RealConst):
    value: Fraction


@dataclass(frozen=True, eq=True)
class Sqrt(RealConst):
    radicand: Fraction


@dataclass(frozen=True, eq=True)
class Pi(RealConst):
    pass


@dataclass(frozen=True, eq=True)
class Log(RealConst):
    arg: Fraction


@dataclass(frozen=True, eq=True)
class Liouville(RealConst):
    terms: int


@dataclass(frozen=True, eq=True)
class CAdd(RealConst):
    terms: tuple


@dataclass(frozen=True, eq=True)
class CMul(RealConst):
    factors: tuple


@dataclass(frozen=True, eq=True)
class CNeg(RealConst):
    x: RealConst


@dataclass(frozen=True, eq=True)
class CDiv(RealConst):
    num: RealConst
    den: RealConst
    cert_bits: int = 0


def _lift(x) -> RealConst:
    if isinstance(x, RealConst):
        return x
    if isinstance(x, (int, Fraction)):
        return Rational(Fraction(x))
    raise TypeError(f"cannot use {type(x).__name__} as a real constant")


def rational(p, q=1) -> Rational:
    return Rational(Fraction(p) / Fraction(q))


def _rational_sqrt(r: Fraction) -> Fraction | None:
    a, b = math.isqrt(r.numerator), math.isqrt(r.denominator)
    if a * a == r.numerator and b * b == r.denominator:
        return Fraction(a, b)
    return None


def sqrt(r) -> RealConst:
    r = Fraction(r)
    if r < 0:
        raise ValueError("sqrt of a negative rational")
    root = _rational_sqrt(r)
    if root is not None:
        return Rational(root)
    return Sqrt(r)


def pi() -> Pi:
    return Pi()


def log(r) -> RealConst:
    r = Fraction(r)
    if r <= 0:
        raise ValueError("log of a nonpositive rational")
    if r == 1:
        return Rational(Fraction(0))
    return Log(r)


def liouville(J: int) -> Liouville:
    if not 1 <= J <= LIOUVILLE_MAX_TERMS:
        raise ValueError(f"liouville truncation must satisfy 1 <= J <= {LIOUVILLE_MAX_TERMS}")
    return Liouville(J)


def liouville_value(J: int) -> Fraction:
    return sum((Fraction(1, 10 ** math.factorial(j)) for j in range(1, J + 1)), Fraction(0))


def add(*xs: RealConst) -> RealConst:
    return CAdd(tuple(xs)) if len(xs) != 1 else xs[0]


def mul(*xs: RealConst) -> RealConst:
    return CMul(tuple(xs)) if len(xs) != 1 else xs[0]


def neg(x: RealConst) -> RealConst:
    if isinstance(x, Rational):
        return Rational(-x.value)
    return CNeg(x)


def div(num: RealConst, den: RealConst, max_bits: int = DEFAULT_MAX_BITS) -> CDiv:
    """Quotient node; certifies at construction that the divisor is nonzero."""
    p = 64
    while True:
        try:
            eval_interval(den, p).reciprocal()
            return CDiv(num, den, p)
        except DivisorStraddlesZero:
            if p >= max_bits:
                raise
            p *= 2


def as_exact_rational(c: RealConst) -> Fraction | None:
    if isinstance(c, Rational):
        return c.value
    if isinstance(c, Liouville):
        return liouville_value(c.terms)
    if isinstance(c, Sqrt):
        return _rational_sqrt(c.radicand)
    if isinstance(c, Log):
        return Fraction(0) if c.arg == 1 else None
    if isinstance(c, Pi):
        return None
    if isinstance(c, CNeg):
        v = as_exact_rational(c.x)
        return None if v is None else -v
    if isinstance(c, (CAdd, CMul)):
        vals = [as_exact_rational(t) for t in (c.terms if isinstance(c, CAdd) else c.factors)]
        if any(v is None for v in vals):
            return None
        if isinstance(c, CAdd):
            return sum(vals, Fraction(0))
        out = Fraction(1)
        for v in vals:
            out *= v
        return out
    if isinstance(c, CDiv):
        a, b = as_exact_rational(c.num), as_exact_rational(c.den)
        if a is None or b is None:
            return None
        return a / b
    raise TypeError(f"unknown constant node {c!r}")


# ---------------------------------------------------------------------------
# series with explicit error accounting


def _atan_inv(x: int, s: int) -> tuple[int, int]:
    """atan(1/x) * 2**s as (approximation, error bound in ulps), x >= 2."""
    power = (1 << s) // x
    x2 = x * x
    total, k, sign = 0, 0, 1
    while power:
        total += sign * (power // (2 * k + 1))
        power //= x2
        sign = -sign
        k += 1
    return total, 2 * k + 1


@lru_cache(maxsize=64)
def _pi_fixed(s: int) -> tuple[int, int]:
    g = s + 16
    a, ea = _atan_inv(5, g)
    b, eb = _atan_inv(239, g)
    val = 16 * a - 4 * b
    err = 16 * ea + 4 * eb
    return (val - err) >> 16, _ceil_shift(val + err, 16)


def _atanh_rational(t: Fraction, s: int) -> tuple[int, int]:
    """atanh(t) * 2**s as (approximation, error bound in ulps), |t| <= 1/3."""
    sign = -1 if t < 0 else 1
    a, b = abs(t.numerator), t.denominator
    a2, b2 = a * a, b * b
    power = (a << s) // b
    total, j = 0, 0
    while power:
        total += power // (2 * j + 1)
        power = power * a2 // b2
        j += 1
    return sign * total, 3 * j + 3


@lru_cache(maxsize=64)
def _log2_fixed(s: int) -> tuple[int, int]:
    g = s + 16
    v, e = _atanh_rational(Fraction(1, 3), g)
    return (2 * v - 2 * e) >> 16, _ceil_shift(2 * v + 2 * e, 16)


def _log_fixed(r: Fraction, s: int) -> tuple[int, int]:
    # r = 2**k * m with m in [2/3, 4/3]
    k = r.numerator.bit_length() - r.denominator.bit_length()
    m = r / (Fraction(2) ** k)
    while m > Fraction(4, 3):
        m /= 2
        k += 1
    while m < Fraction(2, 3):
        m *= 2
        k -= 1
    g = s + 16 + max(0, abs(k).bit_length())
    t = (m - 1) / (m + 1)
    v, e = _atanh_rational(t, g)
    lo, hi = 2 * v - 2 * e, 2 * v + 2 * e
    if k:
        l2lo, l2hi = _log2_fixed(g)
        if k > 0:
            lo, hi = lo + k * l2lo, hi + k * l2hi
        else:
            lo, hi = lo + k * l2hi, hi + k * l2lo
    d = g - s
    return lo >> d, _ceil_shift(hi, d)


def _approx_bits(c: RealConst) -> int:
    """Rough binary exponent of |c| (upper bound, for guard-bit sizing)."""
    iv = _fixed(c, 24)
    m = max(abs(iv[0]), abs(iv[1]), 1)
    return max(0, m.bit_length() - 24)


@lru_cache(maxsize=4096)
def _fixed(c: RealConst, s: int) -> tuple[int, int]:
    """Enclosure of c as integers (lo, hi) with c in [lo, hi] / 2**s."""
    if isinstance(c, (Rational, Liouville)):
        v = as_exact_rational(c)
        num = v.numerator << s
        return _floor_div(num, v.denominator), _ceil_div(num, v.denominator)
    if isinstance(c, Sqrt):
        r = c.radicand
        x = r.numerator << (2 * s)
        lo = math.isqrt(_floor_div(x, r.denominator))
        hi = math.isqrt(_ceil_div(x, r.denominator))
        if hi * hi * r.denominator != x:
            hi += 1
        return lo, hi
    if isinstance(c, Pi):
        return _pi_fixed(s)
    if isinstance(c, Log):
        return _log_fixed(c.arg, s)
    if isinstance(c, CNeg):
        lo, hi = _fixed(c.x, s)
        return -hi, -lo
    if isinstance(c, CAdd):
        g = len(c.terms).bit_length() + 2
        lo = hi = 0
        for t in c.terms:
            a, b = _fixed(t, s + g)
            lo += a
            hi += b
        return lo >> g, _ceil_shift(hi, g)
    if isinstance(c, CMul):
        g = 4 + len(c.factors).bit_length() + sum(_approx_bits(f) for f in c.factors)
        w = s + g
        acc = Interval(1 << w, 1 << w, w)
        for f in c.factors:
            a, b = _fixed(f, w)
            acc = acc * Interval(a, b, w)
        return acc.lo_m >> g, _ceil_shift(acc.hi_m, g)
    if isinstance(c, CDiv):
        g = 8
        while True:
            w = s + g
            den = Interval(*_fixed(c.den, w), w)
            if den.lo_m > 0 or den.hi_m < 0:
                mag = min(abs(den.lo_m), abs(den.hi_m))
                # guard bits needed so that the quotient error stays below an ulp
                need = 2 * max(0, w - mag.bit_length() + 1) + _approx_bits(c.num) + 8
                if need <= g:
                    num = Interval(*_fixed(c.num, w), w)
                    q = num / den
                    return q.lo_m >> g, _ceil_shift(q.hi_m, g)
                g = need
            else:
                if w > 4 * DEFAULT_MAX_BITS:
                    raise DivisorStraddlesZero("divisor enclosure contains 0")
                g = 2 * g
    raise TypeError(f"unknown constant node {c!r}")


def fixed_enclosure(c: RealConst, scale: int) -> Interval:
    """Enclosure of c at absolute resolution 2**-scale."""
    return Interval(*_fixed(c, scale), scale, scale)


def _magnitude_exponent(c: RealConst) -> int | None:
    """e with 2**(e-1) <= |c| < 2**(e+1), or None when c looks like zero."""
    s = 32
    while s <= 4 * DEFAULT_MAX_BITS:
        lo, hi = _fixed(c, s)
        if lo > 0 or hi < 0:
            m = min(abs(lo), abs(hi))
            if m >= 4:
                return m.bit_length() - s
        s *= 2
    return None


def eval_interval(c: RealConst, p: int) -> Interval:
    """Enclosure of c whose width is about 2**-p relative to |c|."""
    if p < 32:
        raise ValueError("precision must be at least 32 bits")
    if isinstance(c, CDiv):
        den = _fixed(c.den, p)
        if den[0] <= 0 <= den[1]:
            raise DivisorStraddlesZero(f"divisor enclosure contains 0 at {p} bits")
    exact = as_exact_rational(c)
    if exact is not None:
        return Interval.exact(exact, p + 8 + max(0, -_exponent_of(exact)))
    e = _magnitude_exponent(c)
    s = p + 8 + (max(0, -e) if e is not None else 0)
    lo, hi = _fixed(c, s)
    return Interval(lo, hi, s, p)


def _exponent_of(v: Fraction) -> int:
    if v == 0:
        return 0
    return abs(v.numerator).bit_length() - v.denominator.bit_length()


# ---------------------------------------------------------------------------
# rendering in the expression literal syntax


def _render_fraction(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def render_const(c: RealConst) -> str:
    if isinstance(c, Rational):
        s = _render_fraction(c.value)
        return f"({s})" if ("/" in s or c.value < 0) else s
    if isinstance(c, Sqrt):
        return f"sqrt({_render_fraction(c.radicand)})"
    if isinstance(c, Pi):
        return "pi"
    if isinstance(c, Log):
        return f"log({_render_fraction(c.arg)})"
    if isinstance(c, Liouville):
        return f"liouville({c.terms})"
    if isinstance(c, CNeg):
        return f"(-{render_const(c.x)})"
    if isinstance(c, CAdd):
        return "(" + " + ".join(render_const(t) for t in c.terms) + ")"
    if isinstance(c, CMul):
        return "(" + "*".join(render_const(t) for t in c.factors) + ")"
    if isinstance(c, CDiv):
        return f"({render_const(c.num)}/{render_const(c.den)})"
    raise TypeError(f"unknown constant node {c!r}")


# ---------------------------------------------------------------------------
# rational-linear structure


def _squarefree_split(n: int) -> tuple[int, int]:
    """n = a**2 * b with b squarefree; returns (a, b)."""
    a, b, p = 1, 1, 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
            a *= p
        if n % p == 0:
            n //= p
            b *= p
        p += 1
    return a, b * n


def _prime_factors(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


# A linear form maps a monomial key to its rational coefficient.  A key is a
# sorted tuple of (atom, exponent) pairs; atoms are ("sqrt", m) with m
# squarefree, ("pi",) and ("log", prime).  Square roots appear with exponent 1.
LinearForm = dict


class NotLinearizable(ValueError):
    pass


def _key_mul(k1: tuple, k2: tuple) -> tuple[Fraction, tuple]:
    exps: dict = {}
    for atom, e in k1 + k2:
        exps[atom] = exps.get(atom, 0) + e
    coef = Fraction(1)
    radical = 1
    items = []
    for atom, e in exps.items():
        if atom[0] == "sqrt":
            radical *= atom[1] ** e
        elif e:
            items.append((atom, e))
    if radical > 1:
        a, b = _squarefree_split(radical)
        coef *= a
        if b > 1:
            items.append((("sqrt", b), 1))
    return coef, tuple(sorted(items))


def linear_form(c: RealConst) -> LinearForm:
    """Express c as a rational combination of independent monomials.

    Distinct keys are treated as linearly independent over the rationals.
    That is a theorem for squarefree radicals and logs of primes and a
    declared assumption for mixed products with pi.
    """
    if isinstance(c, (Rational, Liouville)):
        v = as_exact_rational(c)
        return {(): v} if v else {}
    if isinstance(c, Sqrt):
        r = c.radicand
        a, b = _squarefree_split(r.numerator * r.denominator)
        coef = Fraction(a, r.denominator)
        return {((("sqrt", b), 1),): coef} if b > 1 else {(): coef}
    if isinstance(c, Pi):
        return {((("pi",), 1),): Fraction(1)}
    if isinstance(c, Log):
        out: LinearForm = {}
        for p, e in _prime_factors(c.arg.numerator).items():
            out[((("log", p), 1),)] = out.get(((("log", p), 1),), 0) + e
        for p, e in _prime_factors(c.arg.denominator).items():
            out[((("log", p), 1),)] = out.get(((("log", p), 1),), 0) - e
        return {k: Fraction(v) for k, v in out.items() if v}
    if isinstance(c, CNeg):
        return {k: -v for k, v in linear_form(c.x).items()}
    if isinstance(c, CAdd):
        out = {}
        for t in c.terms:
            for k, v in linear_form(t).items():
                out[k] = out.get(k, 0) + v
        return {k: v for k, v in out.items() if v}
    if isinstance(c, CMul):
        acc: LinearForm = {(): Fraction(1)}
        for f in c.factors:
            nxt: LinearForm = {}
            for k1, v1 in acc.items():
                for k2, v2 in linear_form(f).items():
                    coef, key = _key_mul(k1, k2)
                    nxt[key] = nxt.get(key, 0) + v1 * v2 * coef
            acc = {k: v for k, v in nxt.items() if v}
        return acc
    if isinstance(c, CDiv):
        den = linear_form(c.den)
        if len(den) != 1:
            raise NotLinearizable("division by a non-monomial constant")
        (key, v), = den.items()
        inv_key = []
        coef = 1 / v
        for atom, e in key:
            if atom[0] == "sqrt":
                # 1/sqrt(b) = sqrt(b)/b
                coef /= atom[1]
                inv_key.append((atom, 1))
            else:
                raise NotLinearizable("division by a transcendental monomial")
        out = {}
        for k, w in linear_form(c.num).items():
            cf, key2 = _key_mul(k, tuple(sorted(inv_key)))
            out[key2] = out.get(key2, 0) + w * coef * cf
        return {k: v for k, v in out.items() if v}
    raise TypeError(f"unknown constant node {c!r}")


def _monomial_const(key: tuple) -> RealConst | None:
    parts: list[RealConst] = []
    for atom, e in key:
        if atom[0] == "sqrt":
            base: RealConst = Sqrt(Fraction(atom[1]))
        elif atom[0] == "pi":
            base = Pi()
        else:
            base = Log(Fraction(atom[1]))
        parts.extend([base] * e)
    if not parts:
        return None
    return parts[0] if len(parts) == 1 else CMul(tuple(parts))


def simplify(c: RealConst) -> RealConst:
    """Rebuild c from its linear form; returns c unchanged if that fails."""
    try:
        form = linear_form(c)
    except NotLinearizable:
        return c
    terms: list[RealConst] = []
    for key in sorted(form, key=lambda k: (len(k), repr(k))):
        coef, mono = form[key], _monomial_const(key)
        if mono is None:
            terms.append(Rational(coef))
        elif coef == 1:
            terms.append(mono)
        elif coef == -1:
            terms.append(CNeg(mono))
        else:
            terms.append(CMul((Rational(coef), mono)))
    if not terms:
        return Rational(Fraction(0))
    return terms[0] if len(terms) == 1 else CAdd(tuple(terms))
