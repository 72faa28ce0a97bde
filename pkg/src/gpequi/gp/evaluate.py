"""Rigorous evaluation of generalized polynomials.

Each expression is compiled once per working scale F into nested closures.
A subtree whose constants are all rational (this includes every bracket,
because a resolved floor is an integer) evaluates exactly with ints and
Fractions.  Other subtrees evaluate to integer pairs (lo, hi) meaning
[lo, hi] / 2**F.  A floor that cannot be decided raises ``Unresolved`` and
the caller retries at twice the scale, up to ``max_bits``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .. import realkernel as rk
from ..realkernel import Interval, Unresolved
from .ast import Add, Const, FracPart, GPExpr, IntPart, Mul, Neg, Pow, Var

GPValue = Union[int, Fraction, Interval]


class PrecisionExhausted(ArithmeticError):
    def __init__(self, n, bits):
        super().__init__(f"could not resolve a floor at n={n} within {bits} bits")
        self.n = n
        self.bits = bits


@dataclass(frozen=True)
class PrecisionConfig:
    start_bits: int = rk.LADDER_START
    max_bits: int = rk.DEFAULT_MAX_BITS

    @classmethod
    def from_env(cls, **overrides) -> "PrecisionConfig":
        cfg = cls(**overrides)
        env = os.environ.get("GPEQUI_MAX_BITS")
        if env:
            cfg = cls(cfg.start_bits, int(env))
        return cfg

    def ladder(self):
        b = self.start_bits
        while b <= self.max_bits:
            yield b
            b *= 2


DEFAULT = PrecisionConfig()


def _ceil_shift(a: int, k: int) -> int:
    return -((-a) >> k)


def _to_iv(v, F: int) -> tuple[int, int]:
    if isinstance(v, int):
        x = v << F
        return x, x
    num = v.numerator << F
    d = v.denominator
    return num // d, -((-num) // d)


def _compile(q: GPExpr, F: int):
    """Return (exact, fn) where fn(n) is an int/Fraction if exact else (lo, hi)."""
    if isinstance(q, Var):
        return True, lambda n: n
    if isinstance(q, Const):
        v = rk.as_exact_rational(q.c)
        if v is not None:
            v = int(v) if v.denominator == 1 else v
            return True, lambda n: v
        iv = rk.fixed_enclosure(q.c, F)
        pair = (iv.lo_m, iv.hi_m)
        return False, lambda n: pair
    if isinstance(q, Neg):
        ex, f = _compile(q.child, F)
        if ex:
            return True, lambda n: -f(n)

        def neg(n):
            lo, hi = f(n)
            return -hi, -lo
        return False, neg
    if isinstance(q, Add):
        parts = [_compile(c, F) for c in q.children]
        exact_fs = [f for ex, f in parts if ex]
        real_fs = [f for ex, f in parts if not ex]
        if not real_fs:
            if len(exact_fs) == 2:
                f0, f1 = exact_fs
                return True, lambda n: f0(n) + f1(n)
            return True, lambda n: sum(f(n) for f in exact_fs)

        def add(n):
            lo = hi = 0
            for f in real_fs:
                a, b = f(n)
                lo += a
                hi += b
            if exact_fs:
                e = sum(f(n) for f in exact_fs)
                if e:
                    a, b = _to_iv(e, F)
                    lo += a
                    hi += b
            return lo, hi
        return False, add
    if isinstance(q, Mul):
        parts = [_compile(c, F) for c in q.children]
        exact_fs = [f for ex, f in parts if ex]
        real_fs = [f for ex, f in parts if not ex]
        if not real_fs:
            if len(exact_fs) == 2:
                f0, f1 = exact_fs
                return True, lambda n: f0(n) * f1(n)

            def emul(n):
                acc = 1
                for f in exact_fs:
                    acc = acc * f(n)
                return acc
            return True, emul

        def rmul(n):
            it = iter(real_fs)
            lo, hi = next(it)(n)
            for f in it:
                c, d = f(n)
                if lo >= 0 and c >= 0:
                    lo, hi = (lo * c) >> F, _ceil_shift(hi * d, F)
                else:
                    p = (lo * c, lo * d, hi * c, hi * d)
                    lo, hi = min(p) >> F, _ceil_shift(max(p), F)
            for f in exact_fs:
                e = f(n)
                if isinstance(e, int):
                    if e >= 0:
                        lo, hi = lo * e, hi * e
                    else:
                        lo, hi = hi * e, lo * e
                else:
                    p, r = e.numerator, e.denominator
                    if p >= 0:
                        lo, hi = (lo * p) // r, -((-hi * p) // r)
                    else:
                        lo, hi = (hi * p) // r, -((-lo * p) // r)
            return lo, hi
        return False, rmul
    if isinstance(q, Pow):
        ex, f = _compile(q.child, F)
        k = q.k
        if ex:
            return True, lambda n: f(n) ** k
        shift = F * (k - 1)

        def pw(n):
            lo, hi = f(n)
            if k % 2 == 0 and lo < 0:
                if hi <= 0:
                    lo, hi = -hi, -lo
                else:
                    lo, hi = 0, max(-lo, hi)
            return (lo ** k) >> shift, _ceil_shift(hi ** k, shift)
        return False, pw
    if isinstance(q, IntPart):
        ex, f = _compile(q.child, F)
        if ex:
            return True, lambda n: math.floor(f(n))

        def fl(n):
            lo, hi = f(n)
            a = lo >> F
            if a != hi >> F:
                raise Unresolved
            return a
        return True, fl
    if isinstance(q, FracPart):
        ex, f = _compile(q.child, F)
        if ex:
            def efrac(n):
                v = f(n)
                return v - math.floor(v)
            return True, efrac

        def fr(n):
            lo, hi = f(n)
            a = lo >> F
            if a != hi >> F:
                raise Unresolved
            s = a << F
            return lo - s, hi - s
        return False, fr
    raise TypeError(f"unknown node {q!r}")


@lru_cache(maxsize=512)
def compiled(q: GPExpr, F: int):
    return _compile(q, F)


def eval_at_scale(q: GPExpr, n: int, F: int) -> GPValue:
    """One evaluation at working scale F; raises Unresolved if a floor is undecided."""
    ex, f = compiled(q, F)
    v = f(n)
    if ex:
        return v
    return Interval(v[0], v[1], F, F)


def evaluate(q: GPExpr, n: int, cfg: PrecisionConfig = DEFAULT) -> GPValue:
    for F in cfg.ladder():
        try:
            return eval_at_scale(q, n, F)
        except Unresolved:
            continue
    raise PrecisionExhausted(n, cfg.max_bits)


def decide(q: GPExpr, n: int, test: Callable[[GPValue, int], object], cfg: PrecisionConfig = DEFAULT):
    """Evaluate q(n) and apply test(value, F), refining until it does not raise Unresolved."""
    for F in cfg.ladder():
        try:
            return test(eval_at_scale(q, n, F), F)
        except Unresolved:
            continue
    raise PrecisionExhausted(n, cfg.max_bits)


def _eval_chunk(args):
    q, ns, cfg = args
    return [evaluate(q, n, cfg) for n in ns]


def eval_range(q: GPExpr, M: int, N: int, cfg: PrecisionConfig = DEFAULT, workers: int = 1) -> list:
    """q(M), ..., q(N) in order; parallel chunks are merged in index order."""
    if M > N:
        raise ValueError("empty range: M > N")
    if workers <= 1 or N - M < 2000:
        return [evaluate(q, n, cfg) for n in range(M, N + 1)]
    bounds = np.linspace(M, N + 1, workers * 4 + 1).astype(int)
    chunks = [(q, range(int(a), int(b)), cfg) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(workers) as pool:
        out = []
        for part in pool.map(_eval_chunk, chunks):
            out.extend(part)
    return out


# ---------------------------------------------------------------------------
# helpers on values


def to_float(v: GPValue) -> float:
    if isinstance(v, Interval):
        return v.mid()
    return float(v)


def is_exact(v: GPValue) -> bool:
    return not isinstance(v, Interval)


def compare(v: GPValue, c, F: int) -> int:
    """Certified sign of v - c for a RealConst or rational c; raises Unresolved."""
    if isinstance(c, rk.RealConst):
        exact_c = rk.as_exact_rational(c)
    else:
        exact_c = Fraction(c)
    if not isinstance(v, Interval) and exact_c is not None:
        d = v - exact_c
        return (d > 0) - (d < 0)
    iv = v if isinstance(v, Interval) else Interval.exact(v, F)
    civ = Interval.exact(exact_c, F) if exact_c is not None else rk.fixed_enclosure(c, F)
    return (iv - civ).sign()


def frac_value(v: GPValue) -> GPValue:
    if isinstance(v, Interval):
        return v.frac()
    return v - math.floor(v)


def dist_to_Z(v: GPValue) -> GPValue:
    """||v|| for an exact value or interval (interval may need refinement)."""
    f = frac_value(v)
    if isinstance(f, Interval):
        half = Fraction(1, 2)
        if f.hi <= half:
            return f
        if f.lo >= half:
            return 1 - f
        raise Unresolved
    return min(f, 1 - f)


def frac_scaled(q: GPExpr, lam=None) -> GPExpr:
    """The expression {q * lam} (or {q} when lam is None)."""
    if lam is None:
        return FracPart(q)
    lam_expr = lam if isinstance(lam, GPExpr) else Const(lam if isinstance(lam, rk.RealConst) else rk.Rational(Fraction(lam)))
    return FracPart(Mul((q, lam_expr)))


def frac_array(q: GPExpr, ns: Iterable[int], lam=None, cfg: PrecisionConfig = DEFAULT) -> np.ndarray:
    """Float64 array of {q(n) * lam} over ns, each floor rigorously resolved."""
    e = frac_scaled(q, lam)
    ns = list(ns)
    out = np.empty(len(ns), dtype=np.float64)
    F0 = cfg.start_bits
    ex, f = compiled(e, F0)
    scale_div = 1 << (F0 + 1)
    for i, n in enumerate(ns):
        try:
            v = f(n)
            if ex:
                out[i] = float(v)
            else:
                out[i] = (v[0] + v[1]) / scale_div
        except Unresolved:
            out[i] = to_float(evaluate(e, n, cfg))
    # midpoints of enclosures hugging 1 can round up to 1.0 in float64
    np.minimum(out, np.nextafter(1.0, 0.0), out=out)
    return out


def values_array(q: GPExpr, ns: Sequence[int], cfg: PrecisionConfig = DEFAULT) -> list:
    return [evaluate(q, n, cfg) for n in ns]


# ---------------------------------------------------------------------------
# exact fallback for points that sit on a boundary


def const_sign(c: rk.RealConst, cfg: PrecisionConfig = DEFAULT) -> int:
    """Sign of a constant: exact zero test on its linear form, then intervals."""
    v = rk.as_exact_rational(c)
    if v is not None:
        return (v > 0) - (v < 0)
    try:
        if not rk.linear_form(c):
            return 0
    except rk.NotLinearizable:
        pass
    for p in cfg.ladder():
        try:
            return rk.eval_interval(c, p).sign()
        except Unresolved:
            continue
    raise PrecisionExhausted(None, cfg.max_bits)


def const_floor(c: rk.RealConst, cfg: PrecisionConfig = DEFAULT) -> int:
    v = rk.as_exact_rational(c)
    if v is not None:
        return math.floor(v)
    for p in cfg.ladder():
        try:
            return rk.eval_interval(c, p).floor()
        except Unresolved:
            continue
    # an irrational constant cannot be an integer, so only rational forms reach here
    try:
        lf = rk.linear_form(c)
    except rk.NotLinearizable:
        lf = None
    if lf is not None and set(lf) <= {()}:
        return math.floor(lf.get((), Fraction(0)))
    raise PrecisionExhausted(None, cfg.max_bits)


def exact_value(q: GPExpr, n: int, cfg: PrecisionConfig = DEFAULT) -> rk.RealConst:
    """q(n) folded into a RealConst, resolving every floor exactly."""
    if isinstance(q, Var):
        return rk.Rational(Fraction(n))
    if isinstance(q, Const):
        return q.c
    if isinstance(q, Neg):
        return rk.neg(exact_value(q.child, n, cfg))
    if isinstance(q, Add):
        return rk.simplify(rk.add(*[exact_value(c, n, cfg) for c in q.children]))
    if isinstance(q, Mul):
        return rk.simplify(rk.mul(*[exact_value(c, n, cfg) for c in q.children]))
    if isinstance(q, Pow):
        c = exact_value(q.child, n, cfg)
        return rk.simplify(rk.mul(*([c] * q.k)))
    if isinstance(q, (IntPart, FracPart)):
        c = exact_value(q.child, n, cfg)
        k = rk.Rational(Fraction(const_floor(c, cfg)))
        return k if isinstance(q, IntPart) else rk.simplify(rk.add(c, rk.neg(k)))
    raise TypeError(f"unknown node {q!r}")
