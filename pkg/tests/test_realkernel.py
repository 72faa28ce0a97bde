from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from gpequi import realkernel as rk

mpmath.mp.prec = 2400


def contains(iv: rk.Interval, x: mpmath.mpf) -> bool:
    lo = mpmath.mpf(iv.lo.numerator) / iv.lo.denominator
    hi = mpmath.mpf(iv.hi.numerator) / iv.hi.denominator
    return lo <= x <= hi


def mp_value(c: rk.RealConst):
    if isinstance(c, rk.Rational):
        return mpmath.mpf(c.value.numerator) / c.value.denominator
    if isinstance(c, rk.Sqrt):
        return mpmath.sqrt(mpmath.mpf(c.radicand.numerator) / c.radicand.denominator)
    if isinstance(c, rk.Pi):
        return mpmath.pi
    if isinstance(c, rk.Log):
        return mpmath.log(mpmath.mpf(c.arg.numerator) / c.arg.denominator)
    if isinstance(c, rk.CAdd):
        return mpmath.fsum(mp_value(t) for t in c.terms)
    if isinstance(c, rk.CMul):
        return mpmath.fprod(mp_value(t) for t in c.factors)
    if isinstance(c, rk.CNeg):
        return -mp_value(c.x)
    if isinstance(c, rk.CDiv):
        return mp_value(c.num) / mp_value(c.den)
    raise TypeError(c)


def test_rational_third():
    iv = rk.eval_interval(rk.rational(1, 3), 64)
    assert iv.contains(Fraction(1, 3))
    assert iv.width <= Fraction(1, 2 ** 60)


def test_sqrt2_against_mpmath():
    iv = rk.eval_interval(rk.sqrt(2), 128)
    assert contains(iv, mpmath.sqrt(2))
    assert iv.width < Fraction(1, 2 ** 120)


def test_liouville_exact():
    assert rk.liouville_value(3) == Fraction(110001, 10 ** 6)
    assert rk.as_exact_rational(rk.liouville(3)) == Fraction(110001, 10 ** 6)
    assert rk.eval_interval(rk.liouville(3), 64).contains(Fraction(110001, 10 ** 6))
    assert rk.as_exact_rational(rk.liouville(2)) == Fraction(11, 100)
    with pytest.raises(ValueError):
        rk.liouville(rk.LIOUVILLE_MAX_TERMS + 1)


def test_exact_rational_detection():
    assert rk.as_exact_rational(rk.div(rk.sqrt(4), rk.rational(2))) == 1
    assert rk.as_exact_rational(rk.sqrt(2)) is None
    assert isinstance(rk.sqrt(Fraction(9, 4)), rk.Rational)


def test_pi_and_log_tail_bounds():
    for p in (64, 256, 1024):
        assert contains(rk.eval_interval(rk.pi(), p), mpmath.pi)
        assert contains(rk.eval_interval(rk.log(2), p), mpmath.log(2))
        assert contains(rk.eval_interval(rk.log(Fraction(7, 3)), p), mpmath.log(mpmath.mpf(7) / 3))


def test_divisor_straddling_zero():
    zero_ish = rk.add(rk.sqrt(2), rk.neg(rk.sqrt(2)))
    with pytest.raises((rk.DivisorStraddlesZero, ZeroDivisionError, ValueError)):
        rk.eval_interval(rk.div(rk.rational(1), zero_ish), 64)


def test_monotone_refinement():
    c = rk.add(rk.pi(), rk.sqrt(3))
    a, b = rk.eval_interval(c, 64), rk.eval_interval(c, 256)
    assert a.lo <= b.lo and b.hi <= a.hi


def test_linear_form_zero_test():
    c = rk.add(rk.mul(rk.sqrt(8), rk.rational(1, 2)), rk.neg(rk.sqrt(2)))
    assert not rk.linear_form(c)
    assert rk.linear_form(rk.sqrt(12)) == {(("sqrt", 3), 1): Fraction(2)} or rk.linear_form(rk.sqrt(12))


atoms = st.one_of(
    st.fractions(min_value=-20, max_value=20, max_denominator=50).map(rk.Rational),
    st.integers(2, 30).map(rk.sqrt),
    st.just(rk.pi()),
    st.integers(2, 30).map(rk.log),
)


@st.composite
def const_trees(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return draw(atoms)
    a, b = draw(const_trees(depth=depth - 1)), draw(const_trees(depth=depth - 1))
    op = draw(st.sampled_from(["add", "mul", "neg"]))
    if op == "add":
        return rk.add(a, b)
    if op == "mul":
        return rk.mul(a, b)
    return rk.neg(a)


@settings(max_examples=150, deadline=None)
@given(const_trees())
def test_arithmetic_soundness(c):
    iv = rk.eval_interval(c, 96)
    assert contains(iv, mp_value(c))
    exact = rk.as_exact_rational(c)
    if exact is not None:
        assert iv.contains(exact)


@settings(max_examples=100, deadline=None)
@given(const_trees(depth=2), st.integers(2, 30))
def test_division_soundness(c, r):
    d = rk.div(c, rk.add(rk.sqrt(r), rk.rational(1)))
    assert contains(rk.eval_interval(d, 96), mp_value(d))
