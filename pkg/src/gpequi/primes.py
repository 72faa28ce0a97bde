"""Primes, the modified von Mangoldt weight and W-trick averages.

Bulk weights log p are float64 ``np.log`` values: they multiply unimodular
terms and never feed a floor.  The scalar ``lambda_prime`` goes through the
interval kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import realkernel as rk
from .distribution import DistReport, histogram, star_discrepancy_1d, weyl_sum
from .gp.ast import FracPart, GPExpr, Mul
from .gp.evaluate import DEFAULT, PrecisionConfig, compare, decide, frac_array
from .gp.parser import parse

SIEVE_CAP = 10 ** 8
SEGMENT = 1 << 18


@dataclass(frozen=True)
class PrimeTable:
    limit: int
    is_prime: np.ndarray      # bool, index 0..limit
    prefix: np.ndarray        # prefix[n] = pi(n)

    def pi(self, n: int) -> int:
        if n < 2:
            return 0
        if n > self.limit:
            raise ValueError(f"table only reaches {self.limit}")
        return int(self.prefix[n])

    def primes(self, upto: int | None = None) -> np.ndarray:
        upto = self.limit if upto is None else min(upto, self.limit)
        return np.flatnonzero(self.is_prime[: upto + 1]).astype(np.int64)

    def __contains__(self, n: int) -> bool:
        return 0 <= n <= self.limit and bool(self.is_prime[n])


def sieve(N: int) -> PrimeTable:
    """Segmented sieve of Eratosthenes on [0, N]."""
    if N > SIEVE_CAP:
        raise ValueError(f"sieve limit {N} exceeds the cap {SIEVE_CAP}")
    N = max(N, 1)
    r = math.isqrt(N)
    small = np.ones(r + 1, dtype=bool)
    small[:2] = False
    for p in range(2, math.isqrt(r) + 1):
        if small[p]:
            small[p * p:: p] = False
    base = np.flatnonzero(small)
    out = np.zeros(N + 1, dtype=bool)
    for lo in range(0, N + 1, SEGMENT):
        hi = min(lo + SEGMENT, N + 1)
        seg = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            start = max(p * p, ((lo + p - 1) // p) * p)
            if start >= hi:
                continue
            seg[start - lo:: p] = False
        out[lo:hi] = seg
    out[:2] = False
    return PrimeTable(N, out, np.cumsum(out, dtype=np.int64))


_TABLE_CACHE: dict = {}


def table(N: int) -> PrimeTable:
    """Cached sieve covering at least [0, N]."""
    for lim, t in _TABLE_CACHE.items():
        if lim >= N:
            return t
    t = sieve(N)
    _TABLE_CACHE.clear()
    _TABLE_CACHE[N] = t
    return t


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def lambda_prime(n: int, bits: int = 64) -> float:
    """Lambda'(n) = 1_P(n) log n."""
    if not is_prime(n):
        return 0.0
    return rk.eval_interval(rk.log(Fraction(n)), bits).mid()


def residues_coprime(W: int) -> tuple[list[int], int]:
    """R(W) = {1 <= r <= W : gcd(r, W) = 1} and phi(W) = |R(W)|."""
    if W < 1:
        raise ValueError("W must be positive")
    R = [r for r in range(1, W + 1) if math.gcd(r, W) == 1]
    return R, len(R)


def primorial(m: int) -> int:
    """Product of the primes <= m; the empty product 1 for m < 2."""
    return math.prod(p for p in range(2, m + 1) if is_prime(p))


def primorials(ms: Sequence[int] = (1, 2, 3, 4, 5)) -> list[int]:
    return [primorial(m) for m in ms]


def lambda_w_trick(W: int, r: int, n: int) -> float:
    _, phi = residues_coprime(W)
    return phi / W * lambda_prime(W * n + r)


# ---------------------------------------------------------------------------
# averages


def _e_sum(x: np.ndarray, weights: np.ndarray | None = None) -> complex:
    """sum w_i e(x_i) with exactly rounded component sums."""
    t = x * (2 * math.pi)
    c, s = np.cos(t), np.sin(t)
    if weights is not None:
        c, s = c * weights, s * weights
    return complex(math.fsum(c.tolist()), math.fsum(s.tolist()))


def prime_average(q: GPExpr, N: int, cfg: PrecisionConfig = DEFAULT) -> complex:
    """(1/pi(N)) sum_{p <= N} e(q(p))."""
    ps = table(N).primes(N)
    return _e_sum(frac_array(q, ps.tolist(), None, cfg)) / len(ps)


def lambda_average(q: GPExpr, N: int, cfg: PrecisionConfig = DEFAULT) -> complex:
    """(1/N) sum_{n <= N} Lambda'(n) e(q(n)); only primes contribute."""
    ps = table(N).primes(N)
    return _e_sum(frac_array(q, ps.tolist(), None, cfg), np.log(ps.astype(np.float64))) / N


def _cx(z: complex) -> dict:
    return {"re": z.real, "im": z.imag, "abs": abs(z)}


def prime_avg_vs_lambda_avg(q: GPExpr, N: int, cfg: PrecisionConfig = DEFAULT) -> dict:
    a = prime_average(q, N, cfg)
    b = lambda_average(q, N, cfg)
    return {"N": N, "pi_N": table(N).pi(N), "prime_average": _cx(a), "lambda_average": _cx(b),
            "gap": abs(a - b)}


def w_trick_compare(q: GPExpr, W: int, N: int, cfg: PrecisionConfig = DEFAULT) -> dict:
    """|(1/NW) sum_{n <= NW} Lambda'(n) e(q(n)) - (1/phi(W)) sum_r (1/N) sum_{n <= N} e(q(Wn+r))|."""
    lhs = lambda_average(q, N * W, cfg)
    R, phi = residues_coprime(W)
    total = 0j
    for r in R:
        total += _e_sum(frac_array(q, [W * n + r for n in range(1, N + 1)], None, cfg)) / N
    rhs = total / phi
    return {"W": W, "N": N, "phi_W": phi, "lambda_side": _cx(lhs), "progression_side": _cx(rhs),
            "gap": abs(lhs - rhs)}


def w_trick_scan(q: GPExpr, N: int, ms: Sequence[int] = (1, 2, 3, 4, 5), cfg: PrecisionConfig = DEFAULT) -> dict:
    """Gap for each primorial W = prod_{p <= m} p; reports the best witness."""
    rows = []
    seen = set()
    for m in ms:
        W = primorial(m)
        if W in seen:
            continue
        seen.add(W)
        rows.append({"m": m, **w_trick_compare(q, W, N, cfg)})
    best = min(rows, key=lambda r: r["gap"])
    return {"N": N, "rows": rows, "best_W": best["W"], "best_gap": best["gap"]}


def prime_points(q: GPExpr, lam, N: int, lo: int = 2, cfg: PrecisionConfig = DEFAULT) -> np.ndarray:
    ps = table(N).primes(N)
    ps = ps[ps >= lo]
    return frac_array(q, ps.tolist(), lam, cfg)


def prime_seq_stats(q: GPExpr, lam, N: int, lo: int = 2, hs: Sequence[int] = (1, 2, 3), bins: int = 10,
                    cfg: PrecisionConfig = DEFAULT) -> DistReport:
    """u.d. statistics of {q(p) lam} over primes lo <= p <= N."""
    x = prime_points(q, lam, N, lo, cfg)
    weyl = {}
    for h in hs:
        w = weyl_sum(x, h)
        weyl[h] = _cx(w)
    return DistReport(N=N, window={"primes_from": lo, "primes_to": N, "count": int(x.size)}, weyl=weyl,
                      star_discrepancy=star_discrepancy_1d(x), histogram=histogram(x, bins))


def cauchy_check_prime_avg(q: GPExpr, Ns: Sequence[int] = (10 ** 4, 10 ** 5, 10 ** 6), slack: float = 2.0,
                           cfg: PrecisionConfig = DEFAULT) -> dict:
    """Prime averages along the N-ladder and whether successive gaps shrink (within slack)."""
    Ns = sorted(Ns)
    table(Ns[-1])
    avgs = [prime_average(q, N, cfg) for N in Ns]
    gaps = [abs(b - a) for a, b in zip(avgs, avgs[1:])]
    shrink = all(g2 <= slack * g1 for g1, g2 in zip(gaps, gaps[1:]))
    return {"Ns": list(Ns), "averages": [_cx(a) for a in avgs], "gaps": gaps, "slack": slack,
            "shrinking": shrink}


# ---------------------------------------------------------------------------
# the two explicit examples separating n-averages from prime averages


def split_example_first() -> tuple[GPExpr, rk.RealConst]:
    """q(n) = sqrt3 n^2 + sqrt3 {n sqrt2} with lam = 1/(2 sqrt3)."""
    return parse("sqrt(3)*n^2 + sqrt(3)*{n*sqrt(2)}"), rk.div(rk.Rational(Fraction(1)), rk.mul(rk.Rational(Fraction(2)), rk.sqrt(3)))


def split_example_second() -> tuple[GPExpr, rk.RealConst]:
    """q(n) = sqrt2 n^4 + (n - 2[n/2]) (sqrt2/2) {sqrt2 n} + (sqrt2/2) {sqrt2 n}, lam = 1/sqrt2."""
    q = parse("sqrt(2)*n^4 + (n - 2*[n/2])*(sqrt(2)/2)*(sqrt(2)*n - [sqrt(2)*n]) + (sqrt(2)/2)*(sqrt(2)*n - [sqrt(2)*n])")
    return q, rk.div(rk.Rational(Fraction(1)), rk.sqrt(2))


def upper_half_check(N: int = 10 ** 5, cfg: PrecisionConfig = DEFAULT) -> dict:
    """Certify {q(p) lam} in [1/2, 1) for primes 3..N and {q(2) lam} < 1/2 for the first example."""
    q, lam = split_example_first()
    e = FracPart(Mul((q, lam_expr(lam))))
    half = Fraction(1, 2)
    exceptions = []
    ps = table(N).primes(N)
    for p in ps.tolist():
        upper = decide(e, p, lambda v, F: compare(v, half, F) >= 0, cfg)
        if p == 2:
            if upper:
                exceptions.append(p)
        elif not upper:
            exceptions.append(p)
    return {"N": N, "primes_checked": int(ps.size), "exceptions": exceptions,
            "p2_below_half": 2 not in exceptions, "pass": not exceptions}


def lam_expr(lam) -> GPExpr:
    from .gp.ast import Const
    return Const(lam)


def half_mass_check(N: int = 10 ** 6, N_primes: int | None = None, cfg: PrecisionConfig = DEFAULT) -> dict:
    """Mass of {q(n)/sqrt2} in [0, 1/2) over n <= N, and D* of {q(p)/sqrt2} over primes 3..N."""
    q, lam = split_example_second()
    x = frac_array(q, range(1, N + 1), lam, cfg)
    mass = float(np.count_nonzero(x < 0.5) / x.size)
    xp = prime_points(q, lam, N_primes or N, lo=3, cfg=cfg)
    return {"N": N, "mass_below_half": mass, "prime_count": int(xp.size),
            "prime_star_discrepancy": star_discrepancy_1d(xp), "histogram": histogram(x, 10)}
