import math
import random

import pytest

from gpequi.gp.parser import parse
from gpequi.primes import (SIEVE_CAP, is_prime, lambda_prime, lambda_w_trick, prime_avg_vs_lambda_avg,
                           primorial, primorials, residues_coprime, sieve, table, w_trick_compare)


def test_prime_counts():
    t = sieve(1000)
    assert t.pi(1) == 0 and t.pi(10) == 4 and t.pi(100) == 25 and t.pi(1000) == 168


def test_sieve_matches_miller_rabin():
    t = table(300_000)
    rng = random.Random(0)
    for n in rng.sample(range(300_001), 3000):
        assert (n in t) == is_prime(n)
    assert list(t.primes(30)) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_sieve_cap():
    with pytest.raises(ValueError):
        sieve(SIEVE_CAP + 1)


def test_large_primes():
    assert is_prime(2 ** 61 - 1)
    assert not is_prime(3215031751)  # strong pseudoprime to bases 2, 3, 5, 7


def test_lambda_prime():
    assert lambda_prime(4) == 0
    assert lambda_prime(2) == pytest.approx(math.log(2), abs=1e-15)
    assert lambda_prime(7) == pytest.approx(math.log(7), abs=1e-15)


def test_residues_and_primorials():
    assert residues_coprime(6) == ([1, 5], 2)
    assert residues_coprime(2) == ([1], 1)
    assert residues_coprime(30)[1] == 8
    assert primorials((1, 2, 3, 4, 5)) == [1, 2, 6, 6, 30]
    assert primorial(7) == 210
    assert lambda_w_trick(6, 1, 1) == pytest.approx(2 / 6 * math.log(7))


def test_zero_phase_gap():
    N = 10_000
    rep = prime_avg_vs_lambda_avg(parse("0"), N)
    theta = math.fsum(math.log(p) for p in table(N).primes(N).tolist())
    assert rep["prime_average"]["re"] == pytest.approx(1.0)
    assert rep["gap"] == pytest.approx(abs(1 - theta / N), abs=1e-12)


def test_w_trick_small():
    rep = w_trick_compare(parse("sqrt(2)*n"), 6, 2000)
    assert rep["phi_W"] == 2 and rep["gap"] < 0.1
