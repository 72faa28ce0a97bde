"""Write q(n) = sum_i b_i(n) n^i with bounded generalized polynomials b_i.

Supported fragment: sums and products of constants, n, fractional parts of
anything, and integer parts of bracket-free polynomials.  An integer part is
rewritten as [u] = u - {u}; an integer part whose argument contains brackets
is outside the fragment.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .. import realkernel as rk
from .ast import Add, Const, FracPart, GPExpr, IntPart, Mul, Neg, Pow, Var, has_brackets
from .evaluate import DEFAULT, PrecisionConfig, evaluate


@dataclass(frozen=True)
class Unsupported:
    reason: str

    def __bool__(self) -> bool:
        return False


class _Outside(Exception):
    pass


# a monomial is (coefficient, degree, bounded factors); coefficients are
# Fractions when rational, RealConst otherwise


def _cmul(a, b):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a * b
    if isinstance(a, Fraction) and a == 1:
        return b
    if isinstance(b, Fraction) and b == 1:
        return a
    return rk.mul(_as_const(a), _as_const(b))


def _cadd(a, b):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a + b
    return rk.add(_as_const(a), _as_const(b))


def _as_const(a) -> rk.RealConst:
    return rk.Rational(a) if isinstance(a, Fraction) else a


def _is_zero(a) -> bool:
    if isinstance(a, Fraction):
        return a == 0
    try:
        return not rk.linear_form(a)
    except rk.NotLinearizable:
        return False


def _expand(q: GPExpr) -> list:
    if isinstance(q, Const):
        v = rk.as_exact_rational(q.c)
        return [(v if v is not None else q.c, 0, ())]
    if isinstance(q, Var):
        return [(Fraction(1), 1, ())]
    if isinstance(q, Neg):
        return [(_cmul(Fraction(-1), c), d, fs) for c, d, fs in _expand(q.child)]
    if isinstance(q, Add):
        out = []
        for ch in q.children:
            out.extend(_expand(ch))
        return out
    if isinstance(q, Mul):
        acc = [(Fraction(1), 0, ())]
        for ch in q.children:
            acc = _product(acc, _expand(ch))
        return acc
    if isinstance(q, Pow):
        base = _expand(q.child)
        acc = base
        for _ in range(q.k - 1):
            acc = _product(acc, base)
        return acc
    if isinstance(q, FracPart):
        return [(Fraction(1), 0, (q,))]
    if isinstance(q, IntPart):
        if has_brackets(q.child):
            raise _Outside("integer part of an expression containing brackets")
        return _expand(q.child) + [(Fraction(-1), 0, (FracPart(q.child),))]
    raise TypeError(f"unknown node {q!r}")


def _product(xs: list, ys: list) -> list:
    return [(_cmul(c1, c2), d1 + d2, f1 + f2) for c1, d1, f1 in xs for c2, d2, f2 in ys]


def _term_expr(coef, factors: tuple) -> GPExpr:
    if not isinstance(coef, Fraction):
        coef = rk.simplify(coef)
        exact = rk.as_exact_rational(coef)
        coef = exact if exact is not None else coef
    if not factors:
        return Const(_as_const(coef))
    body = factors[0] if len(factors) == 1 else Mul(factors)
    if isinstance(coef, Fraction) and coef == 1:
        return body
    if isinstance(coef, Fraction) and coef == -1:
        return Neg(body)
    return Mul((Const(_as_const(coef)),) + tuple(factors))


def _sample_check(q: GPExpr, parts: list, cfg: PrecisionConfig) -> None:
    rebuilt = Add(tuple(Mul((b, Pow(Var(), i))) if i else b for i, b in parts)) if parts else Const(rk.Rational(Fraction(0)))
    for n in list(range(-25, 26)) + [97, -131, 1009, 12345]:
        a, b = evaluate(q, n, cfg), evaluate(rebuilt, n, cfg)
        d = a - b
        if isinstance(d, rk.Interval):
            if not d.contains(0):
                raise AssertionError(f"decomposition mismatch at n={n}")
        elif d != 0:
            raise AssertionError(f"decomposition mismatch at n={n}")


def poly_growth_decompose(q: GPExpr, cfg: PrecisionConfig = DEFAULT, check: bool = True):
    """List of (i, b_i) by decreasing degree, or an ``Unsupported`` value."""
    try:
        monos = _expand(q)
    except _Outside as exc:
        return Unsupported(str(exc))
    by_degree: dict[int, dict[tuple, object]] = {}
    for coef, deg, factors in monos:
        slot = by_degree.setdefault(deg, {})
        slot[factors] = _cadd(slot[factors], coef) if factors in slot else coef
    parts = []
    for deg in sorted(by_degree, reverse=True):
        terms = [_term_expr(c, fs) for fs, c in by_degree[deg].items() if not _is_zero(c)]
        if not terms:
            continue
        parts.append((deg, terms[0] if len(terms) == 1 else Add(tuple(terms))))
    if check:
        _sample_check(q, parts, cfg)
    return parts
