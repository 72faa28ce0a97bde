from fractions import Fraction

import pytest

from gpequi import realkernel as rk
from gpequi.gp.ast import complexity, dist_to_Z_expr, lift, render
from gpequi.gp.decompose import Unsupported, poly_growth_decompose
from gpequi.gp.evaluate import (PrecisionConfig, PrecisionExhausted, eval_range, evaluate, exact_value,
                                frac_array, to_float)
from gpequi.gp.parser import ParseError, parse


def value(text: str, n: int = 0):
    return evaluate(parse(text), n)


def test_simple_floors():
    assert value("[sqrt(2)*n^2]", 3) == 12
    assert value("[sqrt(11) + 2]") == 5
    assert value("{3/2}") == Fraction(1, 2)
    assert value("[-1/2]") == -1
    assert value("[sqrt(2)*n]", -1) == -2


def test_u_values():
    u = parse("[(n+1)*sqrt(2)] - [n*sqrt(2)] - [sqrt(2)]")
    assert evaluate(u, 1) == 0
    assert evaluate(u, 2) == 1
    assert {evaluate(u, n) for n in range(-200, 201)} == {0, 1}


def test_interval_value_contains_truth():
    v = value("sqrt(2)*n + {pi*n}", 5)
    assert abs(to_float(v) - (5 * 2 ** 0.5 + (5 * 3.141592653589793) % 1)) < 1e-12


@pytest.mark.parametrize("text", [
    "[sqrt(2)*n]*{sqrt(3)*n}^2 - 7/3",
    "{sqrt(5)*n^2*{sqrt(7)*n}}",
    "-(n + log(3))*[pi*n]",
    "liouville(3)*n",
])
def test_render_round_trip(text):
    q = parse(text)
    assert parse(render(q)) == q
    for n in (-3, 0, 4, 17):
        a, b = evaluate(q, n), evaluate(parse(render(q)), n)
        assert to_float(a) == to_float(b)


@pytest.mark.parametrize("bad", ["n/n", "[n", "sqrt(n)", "2 n", "foo(2)", "n/[n]", "n^-1"])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse(bad)


def test_complexity_examples():
    assert complexity(parse("sqrt(2)*n^3")) == 0
    assert complexity(parse("{sqrt(2)*n}")) == 1
    assert complexity(parse("{sqrt(2)*n}*{sqrt(3)*n}")) == 2
    assert complexity(parse("{sqrt(5)*n*{sqrt(2)*n}}^3 + {n*sqrt(3)}")) == 6
    assert complexity(parse("[{sqrt(2)*n}*{sqrt(3)*n}]")) == 3


@pytest.mark.parametrize("x, d", [(Fraction(3, 10), Fraction(3, 10)), (Fraction(7, 10), Fraction(3, 10)),
                                  (Fraction(1, 2), Fraction(1, 2)), (Fraction(-13, 10), Fraction(3, 10)),
                                  (Fraction(4), Fraction(0))])
def test_distance_formula(x, d):
    assert evaluate(dist_to_Z_expr(lift(x)), 0) == d


def test_decompose_difference_of_floors():
    parts = poly_growth_decompose(parse("[sqrt(3)*n] - [sqrt(2)*n]"))
    assert [deg for deg, _ in parts] == [1, 0]
    assert abs(to_float(evaluate(parts[0][1], 10)) - (3 ** 0.5 - 2 ** 0.5)) < 1e-15
    rest = parse("{sqrt(2)*n} - {sqrt(3)*n}")
    for n in (1, 10, 1000):
        assert abs(to_float(evaluate(parts[1][1], n)) - to_float(evaluate(rest, n))) < 1e-15


def test_decompose_already_split():
    parts = poly_growth_decompose(parse("{sqrt(2)*n}*n^2 + 3*{sqrt(2)*n}"))
    assert [deg for deg, _ in parts] == [2, 0]


def test_decompose_unsupported():
    assert isinstance(poly_growth_decompose(parse("{sqrt(2)*{sqrt(3)*n}*n}*[n*{sqrt(5)*n}]")), Unsupported)


def test_eval_range_deterministic():
    q = parse("{sqrt(2)*n^2}*[pi*n]")
    a = eval_range(q, -50, 50)
    b = eval_range(q, -50, 50)
    assert [to_float(v) for v in a] == [to_float(v) for v in b]
    with pytest.raises(ValueError):
        eval_range(q, 5, 1)


def test_exact_boundary_resolved():
    # {sqrt(2)*n - sqrt(2)*n} is 0 exactly; intervals alone never decide it
    q = parse("[sqrt(2)*n - sqrt(2)*n]")
    small = PrecisionConfig(64, 256)
    with pytest.raises(PrecisionExhausted):
        evaluate(q, 3, small)
    assert rk.as_exact_rational(rk.simplify(exact_value(q, 3, small))) == 0


def test_frac_array_range():
    x = frac_array(parse("sqrt(2)*n"), range(1, 1001))
    assert x.min() >= 0 and x.max() < 1
    assert abs(x[0] - (2 ** 0.5 - 1)) < 1e-15
