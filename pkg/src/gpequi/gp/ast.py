"""Expression trees for generalized polynomials in one integer variable n."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .. import realkernel as rk
from ..realkernel import RealConst


class GPExpr:
    """Base class; operators build trees so that fixtures read naturally."""

    def __add__(self, other):
        return Add((self, lift(other)))

    def __radd__(self, other):
        return Add((lift(other), self))

    def __sub__(self, other):
        return Add((self, Neg(lift(other))))

    def __rsub__(self, other):
        return Add((lift(other), Neg(self)))

    def __mul__(self, other):
        return Mul((self, lift(other)))

    def __rmul__(self, other):
        return Mul((lift(other), self))

    def __neg__(self):
        return Neg(self)

    def __pow__(self, k: int):
        return Pow(self, k)

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Const(GPExpr):
    c: RealConst


@dataclass(frozen=True)
class Var(GPExpr):
    pass


@dataclass(frozen=True)
class Add(GPExpr):
    children: tuple


@dataclass(frozen=True)
class Mul(GPExpr):
    children: tuple


@dataclass(frozen=True)
class Neg(GPExpr):
    child: GPExpr


@dataclass(frozen=True)
class Pow(GPExpr):
    child: GPExpr
    k: int

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise ValueError("Pow exponent must be a positive integer")


@dataclass(frozen=True)
class IntPart(GPExpr):
    child: GPExpr


@dataclass(frozen=True)
class FracPart(GPExpr):
    child: GPExpr


N = Var()


def lift(x) -> GPExpr:
    if isinstance(x, GPExpr):
        return x
    if isinstance(x, RealConst):
        return Const(x)
    if isinstance(x, (int, Fraction)):
        return Const(rk.Rational(Fraction(x)))
    raise TypeError(f"cannot use {type(x).__name__} in a generalized polynomial")


def const(x) -> Const:
    return lift(x) if isinstance(x, (int, Fraction, RealConst)) else Const(x)


def floor(x) -> IntPart:
    return IntPart(lift(x))


def frac(x) -> FracPart:
    return FracPart(lift(x))


def children(q: GPExpr) -> tuple:
    if isinstance(q, (Add, Mul)):
        return q.children
    if isinstance(q, (Neg, Pow, IntPart, FracPart)):
        return (q.child,)
    return ()


def has_brackets(q: GPExpr) -> bool:
    if isinstance(q, (IntPart, FracPart)):
        return True
    return any(has_brackets(c) for c in children(q))


def constants(q: GPExpr):
    if isinstance(q, Const):
        yield q.c
    for c in children(q):
        yield from constants(c)


def complexity(q: GPExpr) -> int:
    """Bracket-nesting weight: +1 per bracket, additive over products, max over sums."""
    if isinstance(q, (Const, Var)):
        return 0
    if isinstance(q, (IntPart, FracPart)):
        return complexity(q.child) + 1
    if isinstance(q, Neg):
        return complexity(q.child)
    if isinstance(q, Pow):
        return q.k * complexity(q.child)
    if isinstance(q, Mul):
        return sum(complexity(c) for c in q.children)
    if isinstance(q, Add):
        return max(complexity(c) for c in q.children)
    raise TypeError(f"unknown node {q!r}")


def dist_to_Z_expr(x: GPExpr) -> GPExpr:
    """||x|| written as {x}(1 - [2{x}]) + (1 - {x})[2{x}]."""
    fx = FracPart(x)
    gate = IntPart(Mul((lift(2), fx)))
    return Add((Mul((fx, Add((lift(1), Neg(gate))))), Mul((Add((lift(1), Neg(fx))), gate))))


def substitute(q: GPExpr, x: GPExpr) -> GPExpr:
    """Replace the variable n by the expression x."""
    if isinstance(q, Var):
        return x
    if isinstance(q, Const):
        return q
    if isinstance(q, Add):
        return Add(tuple(substitute(c, x) for c in q.children))
    if isinstance(q, Mul):
        return Mul(tuple(substitute(c, x) for c in q.children))
    if isinstance(q, Neg):
        return Neg(substitute(q.child, x))
    if isinstance(q, Pow):
        return Pow(substitute(q.child, x), q.k)
    if isinstance(q, IntPart):
        return IntPart(substitute(q.child, x))
    if isinstance(q, FracPart):
        return FracPart(substitute(q.child, x))
    raise TypeError(f"unknown node {q!r}")


# ---------------------------------------------------------------------------
# rendering

_PREC_ADD, _PREC_MUL, _PREC_POW = 1, 2, 3


def _render(q: GPExpr, ctx: int) -> str:
    if isinstance(q, Var):
        return "n"
    if isinstance(q, Const):
        s = rk.render_const(q.c)
        return s
    if isinstance(q, IntPart):
        return "[" + _render(q.child, 0) + "]"
    if isinstance(q, FracPart):
        return "{" + _render(q.child, 0) + "}"
    if isinstance(q, Neg):
        s = "-" + _render(q.child, _PREC_MUL)
        return f"({s})" if ctx > 0 else s
    if isinstance(q, Pow):
        return _render(q.child, _PREC_POW + 1) + "^" + str(q.k)
    if isinstance(q, Mul):
        s = "*".join(_render(c, _PREC_MUL) for c in q.children)
        return f"({s})" if ctx > _PREC_MUL else s
    if isinstance(q, Add):
        parts = []
        for i, c in enumerate(q.children):
            if isinstance(c, Neg) and i > 0:
                parts.append(" - " + _render(c.child, _PREC_MUL))
            else:
                parts.append((" + " if i else "") + _render(c, _PREC_ADD))
        s = "".join(parts)
        return f"({s})" if ctx > _PREC_ADD else s
    raise TypeError(f"unknown node {q!r}")


def render(q: GPExpr) -> str:
    return _render(q, 0)
