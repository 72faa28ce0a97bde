"""Recursive-descent parser for the expression language.

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := '-' unary | factor
    factor := base ('^' nat)?
    base   := number | const | 'n' | '(' expr ')' | '[' expr ']' | '{' expr '}'
    const  := 'sqrt' '(' rational ')' | 'pi' | 'log' '(' rational ')' | 'liouville' '(' nat ')'

Multiplication must be written explicitly.  A divisor must be a constant
(no n, no brackets); ``a/b`` between numbers yields an exact rational.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .. import realkernel as rk
from .ast import Add, Const, FracPart, GPExpr, IntPart, Mul, Neg, Pow, Var, children, has_brackets

GRAMMAR = __doc__


class ParseError(SyntaxError):
    def __init__(self, msg: str, text: str, pos: int):
        super().__init__(f"{msg} at position {pos}: {text[:pos]}<HERE>{text[pos:]}")
        self.pos = pos


class UnknownConstant(ParseError):
    pass


_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z_]\w*)|(.))")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1) is not None:
            out.append(("num", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            out.append(("id", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            if not m.group(3).isspace():
                out.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, op: str):
        t = self.take()
        if t[1] != op:
            raise ParseError(f"expected '{op}'", self.text, t[2])
        return t

    def parse(self) -> GPExpr:
        e = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected '{t[1]}'", self.text, t[2])
        return e

    def expr(self) -> GPExpr:
        terms = [self.term()]
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            t = self.term()
            terms.append(t if op == "+" else Neg(t))
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def term(self) -> GPExpr:
        factors = [self.unary()]
        while self.peek()[1] in ("*", "/"):
            _, op, pos = self.take()
            f = self.unary()
            if op == "*":
                factors.append(f)
                continue
            den = _as_constant(f)
            if den is None:
                raise ParseError("divisor must be a constant", self.text, pos)
            b = rk.as_exact_rational(den)
            if b == 0:
                raise ParseError("division by zero", self.text, pos)
            prev = factors[-1]
            if b is not None:
                if isinstance(prev, Const) and isinstance(prev.c, rk.Rational):
                    factors[-1] = Const(rk.Rational(prev.c.value / b))
                else:
                    factors.append(Const(rk.Rational(1 / b)))
                continue
            num = _as_constant(prev)
            try:
                if num is not None:
                    factors[-1] = Const(rk.div(num, den))
                else:
                    factors.append(Const(rk.div(rk.Rational(Fraction(1)), den)))
            except rk.DivisorStraddlesZero:
                raise ParseError("division by zero", self.text, pos) from None
        return factors[0] if len(factors) == 1 else Mul(tuple(factors))

    def unary(self) -> GPExpr:
        if self.peek()[1] == "-":
            self.take()
            inner = self.unary()
            if isinstance(inner, Const) and isinstance(inner.c, rk.Rational):
                return Const(rk.Rational(-inner.c.value))
            return Neg(inner)
        return self.factor()

    def factor(self) -> GPExpr:
        b = self.base()
        if self.peek()[1] == "^":
            self.take()
            t = self.take()
            if t[0] != "num" or not t[1].isdigit() or int(t[1]) < 1:
                raise ParseError("exponent must be a positive integer", self.text, t[2])
            return Pow(b, int(t[1]))
        return b

    def rational(self) -> Fraction:
        neg = False
        if self.peek()[1] == "-":
            self.take()
            neg = True
        t = self.take()
        if t[0] != "num":
            raise ParseError("expected a rational literal", self.text, t[2])
        v = Fraction(t[1])
        if self.peek()[1] == "/":
            self.take()
            d = self.take()
            if d[0] != "num":
                raise ParseError("expected a denominator", self.text, d[2])
            if Fraction(d[1]) == 0:
                raise ParseError("zero denominator", self.text, d[2])
            v /= Fraction(d[1])
        return -v if neg else v

    def base(self) -> GPExpr:
        kind, val, pos = self.take()
        if kind == "num":
            return Const(rk.Rational(Fraction(val)))
        if kind == "id":
            if val == "n":
                return Var()
            if val == "pi":
                return Const(rk.pi())
            if val in ("sqrt", "log"):
                self.expect("(")
                r = self.rational()
                self.expect(")")
                try:
                    return Const(rk.sqrt(r) if val == "sqrt" else rk.log(r))
                except ValueError as exc:
                    raise ParseError(str(exc), self.text, pos) from None
            if val == "liouville":
                self.expect("(")
                t = self.take()
                if t[0] != "num" or not t[1].isdigit():
                    raise ParseError("expected a positive integer", self.text, t[2])
                self.expect(")")
                try:
                    return Const(rk.liouville(int(t[1])))
                except ValueError as exc:
                    raise ParseError(str(exc), self.text, t[2]) from None
            raise UnknownConstant(f"unknown constant '{val}'", self.text, pos)
        if val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if val == "[":
            e = self.expr()
            self.expect("]")
            return IntPart(e)
        if val == "{":
            e = self.expr()
            self.expect("}")
            return FracPart(e)
        if kind == "end":
            raise ParseError("unexpected end of input", self.text, pos)
        raise ParseError(f"unexpected '{val}'", self.text, pos)


def _has_var(q: GPExpr) -> bool:
    if isinstance(q, Var):
        return True
    return any(_has_var(c) for c in children(q))


def _as_constant(q: GPExpr) -> rk.RealConst | None:
    """Fold a bracket-free, n-free subtree into a RealConst."""
    if _has_var(q) or has_brackets(q):
        return None
    if isinstance(q, Const):
        return q.c
    if isinstance(q, Neg):
        return rk.neg(_as_constant(q.child))
    if isinstance(q, Add):
        return rk.add(*[_as_constant(c) for c in q.children])
    if isinstance(q, Mul):
        return rk.mul(*[_as_constant(c) for c in q.children])
    if isinstance(q, Pow):
        c = _as_constant(q.child)
        return rk.mul(*([c] * q.k))
    return None


def parse(text: str) -> GPExpr:
    return _Parser(text).parse()


def parse_const(text: str) -> rk.RealConst:
    """Parse a literal such as ``2 - sqrt(2)`` into a RealConst."""
    e = parse(text)
    c = _as_constant(e)
    if c is None:
        raise ParseError("expected a constant literal", text, 0)
    return c
