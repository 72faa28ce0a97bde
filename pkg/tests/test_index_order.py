import random
from fractions import Fraction

import pytest

from gpequi.gp.evaluate import evaluate
from gpequi.gp.ast import FracPart, Mul
from gpequi.gp.parser import parse
from gpequi.index_order import (Atom, Bracket, InvalidIndex, PolySystem, PreconditionViolated, UnknownAtom, basic_gp,
                                cmp_index, depth, is_valid, less, letters, mul_frac, parse_index,
                                validate_index)

a, b, c = letters("abc")


def rand_index(rng: random.Random, atoms, max_depth: int):
    """Random valid index of depth <= max_depth, by rejection."""
    while True:
        x = _draw(rng, atoms, max_depth)
        if is_valid(x):
            return x


def _draw(rng, atoms, d):
    if d == 0 or rng.random() < 0.35:
        return rng.choice(atoms)
    gamma = _draw(rng, atoms, d - 1)
    beta = _draw(rng, atoms, d - 1)
    return Bracket(gamma, rng.randint(1, 3), beta)


def random_indices(count: int, seed: int = 0, max_depth: int = 4):
    rng = random.Random(seed)
    return [rand_index(rng, [a, b, c], max_depth) for _ in range(count)]


def test_atoms_below_brackets():
    assert less(a, b) and less(b, c)
    assert less(c, Bracket(b, 1, a))


def test_ordering_examples():
    m, m1, m2 = 3, 1, 2
    assert less(c, Bracket(b, m, a))
    assert less(Bracket(b, m1, a), Bracket(c, m2, a))
    assert less(Bracket(c, m1, a), Bracket(c, m2, b))


def test_validity():
    assert is_valid(Bracket(b, 2, a))
    assert not is_valid(Bracket(a, 1, b))
    assert not is_valid(Bracket(a, 1, a))
    assert is_valid(Bracket(Bracket(c, 1, a), 1, b))
    assert not is_valid(Bracket(Bracket(c, 1, b), 1, a))
    assert not validate_index(Bracket(a, 1, b), [a, b, c])
    with pytest.raises(UnknownAtom):
        validate_index(Bracket(Atom("z", 9), 1, a), [a, b, c])
    with pytest.raises(InvalidIndex):
        basic_gp(Bracket(a, 1, b), system())


def test_parse_index():
    x = parse_index("[[c,a],2b]", [a, b, c])
    assert x == Bracket(Bracket(c, 1, a), 2, b)
    assert str(x) == "[[c,a],2b]"
    assert depth(x) >= 2


def test_trichotomy_and_transitivity():
    xs = random_indices(3000, seed=1)
    rng = random.Random(2)
    for _ in range(10_000):
        x, y = rng.choice(xs), rng.choice(xs)
        s, t = cmp_index(x, y), cmp_index(y, x)
        assert s == -t
        assert (s == 0) == (x == y)
    for _ in range(10_000):
        x, y, z = rng.choice(xs), rng.choice(xs), rng.choice(xs)
        if cmp_index(x, y) <= 0 and cmp_index(y, z) <= 0:
            assert cmp_index(x, z) <= 0


def system():
    return PolySystem.build([("a", parse("sqrt(2)*n")), ("b", parse("sqrt(3)*n")), ("c", parse("sqrt(5)*n^2"))],
                            "sqrt2 n, sqrt3 n, sqrt5 n^2 are independent modulo Q[n] + R")


def test_basic_gp_example():
    P = system()
    x = Bracket(Bracket(c, 1, a), 2, b)
    q = basic_gp(x, P)
    for n in (1, 2, 7):
        expect = evaluate(parse("sqrt(5)*n^2*{sqrt(2)*n}*{sqrt(3)*n}^2"), n)
        assert abs((evaluate(q, n) - expect).mid()) < 1e-30


def test_mul_frac_cases():
    assert mul_frac(b, a) == Bracket(b, 1, a)
    assert mul_frac(Bracket(c, 1, a), a) == Bracket(c, 2, a)
    assert mul_frac(Bracket(c, 1, a), b) == Bracket(Bracket(c, 1, a), 1, b)
    with pytest.raises(PreconditionViolated):
        mul_frac(a, b)


def test_mul_frac_soundness():
    P = system()
    xs = random_indices(400, seed=5, max_depth=3)
    rng = random.Random(6)
    pairs = 0
    while pairs < 40:
        a1, a2 = rng.choice(xs), rng.choice(xs)
        if not less(a2, a1):
            continue
        try:
            prod = mul_frac(a1, a2)
        except InvalidIndex:
            continue
        pairs += 1
        lhs = basic_gp(prod, P)
        rhs = Mul((basic_gp(a1, P), FracPart(basic_gp(a2, P))))
        for n in range(1, 51):
            d = evaluate(lhs, n) - evaluate(rhs, n)
            assert d.contains(0) if hasattr(d, "contains") else d == 0
