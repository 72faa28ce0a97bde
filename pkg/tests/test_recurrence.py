from fractions import Fraction

import pytest

from gpequi import realkernel as rk
from gpequi.gp.parser import parse
from gpequi.recurrence import (NonIntegerValue, ToralTarget, intersective_scan, integer_roots,
                               floor_scaling_check, floor_scaling_clause, parse_poly_coefficients,
                               classify_real_polynomial, simultaneous_smallness, toral_recurrence_density)


def test_target_validation():
    t = ToralTarget.make([rk.sqrt(2)], 0.1)
    assert t.d == 1 and t.eps == Fraction(1, 10)
    for eps in (0, Fraction(1, 2), -1):
        with pytest.raises(ValueError):
            ToralTarget.make([rk.sqrt(2)], eps)
    with pytest.raises(ValueError):
        ToralTarget.make([], Fraction(1, 10))


def test_square_return_density():
    rep = simultaneous_smallness(parse("n^2"), [rk.sqrt(2)], Fraction(1, 10), 20_000)
    assert abs(rep["value"] - 0.2) < 0.02


def test_integer_valued_required():
    t = ToralTarget.make([rk.sqrt(2)], Fraction(1, 10))
    with pytest.raises(NonIntegerValue):
        toral_recurrence_density(parse("sqrt(2)*n"), t, 10)
    rep = toral_recurrence_density(parse("[sqrt(11)*n + 2]"), ToralTarget.make([rk.div(rk.rational(1), rk.sqrt(11))], Fraction(3, 10)), 2000)
    assert rep["count"] == 0


def test_lemma_hand_cases():
    assert floor_scaling_clause(Fraction(2, 5), 2) == (True, True)
    assert floor_scaling_clause(Fraction(3, 2), 2) == (False, False)
    rep = floor_scaling_check(trials=2000)
    assert rep["clause1_failures"] == 0 and rep["clause2_failures"] == 0


def test_intersective():
    assert integer_roots([-12, 4, 1]) == [-6, 2]
    assert intersective_scan([1, 0, 1], 100) == {"intersective": False, "proof": "no root modulo s",
                                                 "failing_modulus": 3, "s_max": 100}
    assert intersective_scan([-12, 4, 1])["intersective"]


def test_polynomial_dichotomy():
    assert classify_real_polynomial(parse_poly_coefficients("sqrt(2)*n^2 + sqrt(3)*n")).case == "CaseA"
    v = classify_real_polynomial(parse_poly_coefficients("sqrt(2)*(n^2 + 4*n - 12)"))
    assert v.case == "CaseB"
    assert v.detail["q0"] == [-12, 4, 1] and 2 in v.detail["witness_mod_4"]
    assert classify_real_polynomial(parse_poly_coefficients("sqrt(11)*n + 2")).case == "Neither"


def test_parse_poly_coefficients():
    cs = parse_poly_coefficients("3*n^2 - 1/2")
    assert [rk.as_exact_rational(c) for c in cs] == [Fraction(-1, 2), 0, 3]
    with pytest.raises(ValueError):
        parse_poly_coefficients("[n*sqrt(2)]")
