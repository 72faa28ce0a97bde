"""Smallness densities for toral translations and the arithmetic behind them.

Everything that decides membership (a floor, a comparison with epsilon, a
distance to Z) is certified with interval enclosures, refined until decided.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import realkernel as rk
from .distribution import DensityEstimate, density_estimate
from .gp.ast import GPExpr
from .gp.evaluate import DEFAULT, PrecisionConfig, PrecisionExhausted, const_sign, decide
from .realkernel import Interval, Unresolved

S_MAX = 10_000
K_MAX = 10_000


class NonIntegerValue(ValueError):
    def __init__(self, n: int, value=None):
        super().__init__(f"q({n}) is not an integer: {value!r}")
        self.n = n


@dataclass(frozen=True)
class ToralTarget:
    alphas: tuple      # RealConst components of the translation
    eps: Fraction

    def __post_init__(self):
        if not self.alphas:
            raise ValueError("dimension must be at least 1")
        if not 0 < self.eps < Fraction(1, 2):
            raise ValueError("eps must lie in (0, 1/2)")

    @property
    def d(self) -> int:
        return len(self.alphas)

    @classmethod
    def make(cls, alphas: Sequence, eps) -> "ToralTarget":
        al = tuple(a if isinstance(a, rk.RealConst) else rk.Rational(Fraction(a)) for a in alphas)
        return cls(al, Fraction(eps) if not isinstance(eps, float) else Fraction(str(eps)))


def _dist_interval(v: Interval) -> Interval:
    f = v.frac()
    half = Fraction(1, 2)
    if f.hi <= half:
        return f
    if f.lo >= half:
        return 1 - f
    raise Unresolved


def _norm_test(value, alphas: Sequence, eps: Fraction, F: int) -> bool:
    """max_j ||value * alpha_j|| < eps at scale F; raises Unresolved when undecided."""
    if not isinstance(value, Interval):
        value = Fraction(value)
        exact = [rk.as_exact_rational(a) for a in alphas]
        if all(e is not None for e in exact):
            return all(_dist(value * e) < eps for e in exact)
    for a in alphas:
        if isinstance(value, Interval):
            prod = value * rk.fixed_enclosure(a, value.scale)
        else:
            extra = abs(value.numerator).bit_length() + 2
            prod = rk.fixed_enclosure(a, F + extra) * value
        if (_dist_interval(prod) - eps).sign() >= 0:
            return False
    return True


def simultaneous_smallness(q: GPExpr, gammas: Sequence, eps, N: int, M: int = 1, integer: bool = False,
                           witnesses: int = 20, cfg: PrecisionConfig = DEFAULT) -> dict:
    """Density of {M <= n <= N : ||q(n) gamma_i|| < eps for all i}."""
    target_eps = Fraction(str(eps)) if isinstance(eps, float) else Fraction(eps)
    al = [g if isinstance(g, rk.RealConst) else rk.Rational(Fraction(g)) for g in gammas]
    hits = []

    def test(v, F):
        if integer and (isinstance(v, Interval) or Fraction(v).denominator != 1):
            raise NonIntegerValue(n, v)
        return _norm_test(v, al, target_eps, F)

    for n in range(M, N + 1):
        if decide(q, n, test, cfg):
            hits.append(n)
    est = density_estimate(len(hits), N - M + 1)
    return {"range": [M, N], "eps": str(target_eps), **est.to_dict(), "witnesses": hits[:witnesses]}


def toral_recurrence_density(q: GPExpr, t: ToralTarget, N: int, M: int = 1, witnesses: int = 20,
                             cfg: PrecisionConfig = DEFAULT) -> dict:
    """Density of n in [M, N] with ||T^{q(n)} 0|| < eps; q must be integer-valued."""
    return simultaneous_smallness(q, t.alphas, t.eps, N, M, integer=True, witnesses=witnesses, cfg=cfg)


# ---------------------------------------------------------------------------
# the arithmetic lemma behind the polynomial case


def _frac(x: Fraction) -> Fraction:
    return x - math.floor(x)


def _dist(x: Fraction) -> Fraction:
    f = _frac(x)
    return min(f, 1 - f)


def floor_scaling_clause(x: Fraction, b: int) -> tuple[bool, bool]:
    """(lhs, rhs) of: [x] = b[x/b] and {x} = b{x/b}  iff  {x/b} < 1/b."""
    lhs = math.floor(x) == b * math.floor(x / b) and _frac(x) == b * _frac(x / b)
    return lhs, _frac(x / b) < Fraction(1, b)


def norm_scaling_clause(x: Fraction, a: int, b: int, delta: Fraction) -> bool | None:
    """None when the hypotheses fail, else whether ||ax|| = ab||x/b|| < ab delta."""
    if not (0 < delta < Fraction(1, 2 * a * b)) or not _dist(x / b) < delta:
        return None
    lhs = _dist(a * x)
    return lhs == a * b * _dist(x / b) and lhs < a * b * delta


def floor_scaling_check(trials: int = 10_000, seed: int = 0, max_ab: int = 12) -> dict:
    """Random exact-rational samples, with a share placed next to the guard edges."""
    rng = random.Random(seed)
    c1_fail, c2_fail, c2_tested, near = 0, 0, 0, 0
    examples = []
    for t in range(trials):
        a, b = rng.randint(1, max_ab), rng.randint(1, max_ab)
        den = 1 << 40
        if t % 3 == 0:
            # x/b within a hair of 1/b from either side
            k = rng.randint(-20, 20)
            off = Fraction(rng.randint(-1000, 1000), den)
            x = b * (k + Fraction(1, b) + off)
            near += 1
        elif t % 3 == 1:
            # ||x/b|| < delta so clause (2) is exercised
            delta = Fraction(rng.randint(1, 999), 1000) / (2 * a * b)
            k = rng.randint(-20, 20)
            off = delta * Fraction(rng.randint(-(1 << 20) + 1, (1 << 20) - 1), 1 << 20)
            x = b * (k + off)
        else:
            x = Fraction(rng.randint(-50 * den, 50 * den), den)
        lhs, rhs = floor_scaling_clause(x, b)
        if lhs != rhs:
            c1_fail += 1
            examples.append({"clause": 1, "x": str(x), "b": b})
        delta = Fraction(rng.randint(1, 999), 1000) / (2 * a * b)
        r = norm_scaling_clause(x, a, b, delta)
        if r is not None:
            c2_tested += 1
            if not r:
                c2_fail += 1
                examples.append({"clause": 2, "x": str(x), "a": a, "b": b, "delta": str(delta)})
    return {"trials": trials, "near_edge": near, "clause1_failures": c1_fail, "clause2_tested": c2_tested,
            "clause2_failures": c2_fail, "counterexamples": examples[:10],
            "pass": c1_fail == 0 and c2_fail == 0 and c2_tested > 0}


# ---------------------------------------------------------------------------
# condition (v) for [q(n)] with q a real polynomial


@dataclass(frozen=True)
class PolyClassVerdict:
    case: str                 # "CaseA", "CaseB" or "Neither"
    detail: dict

    def to_dict(self) -> dict:
        return {"case": self.case, **self.detail}


def _lf(c: rk.RealConst) -> dict:
    return {k: v for k, v in rk.linear_form(c).items() if v}


def _rational_ratio(a: rk.RealConst, b: rk.RealConst) -> Fraction | None:
    """a/b when rational (from the linear forms, assuming independent monomials), else None."""
    la, lb = _lf(a), _lf(b)
    if set(la) != set(lb) or not lb:
        return None
    k0 = next(iter(lb))
    r = la[k0] / lb[k0]
    return r if all(la[k] == r * lb[k] for k in lb) else None


def _is_rational(c: rk.RealConst) -> bool:
    return set(_lf(c)) <= {()}


def _poly_mod(coefs: Sequence[int], s: int) -> np.ndarray:
    """q0(n) mod s for n = 0..s-1 by Horner in int64 (all values stay below s^2)."""
    n = np.arange(s, dtype=np.int64)
    acc = np.zeros(s, dtype=np.int64)
    for c in reversed(coefs):
        acc = (acc * n + (c % s)) % s
    return acc


def integer_roots(coefs: Sequence[int]) -> list[int]:
    """Integer roots of a nonzero integer polynomial (coefficients low to high)."""
    coefs = list(coefs)
    while coefs and coefs[-1] == 0:
        coefs.pop()
    if not coefs:
        return []
    shift = 0
    while coefs[0] == 0:
        coefs.pop(0)
        shift += 1
    roots = [0] if shift else []
    c0 = abs(coefs[0])
    divs = [d for d in range(1, math.isqrt(c0) + 1) if c0 % d == 0]
    cands = set(divs) | {c0 // d for d in divs}
    for d in sorted(cands):
        for r in (d, -d):
            if sum(c * r ** i for i, c in enumerate(coefs)) == 0:
                roots.append(r)
    return sorted(set(roots))


def intersective_scan(coefs: Sequence[int], s_max: int = S_MAX) -> dict:
    """Search, for every s <= s_max, a residue n with s | q0(n)."""
    roots = integer_roots(coefs)
    if roots:
        return {"intersective": True, "proof": "integer root", "root": roots[0], "s_max": s_max}
    for s in range(2, s_max + 1):
        if not np.any(_poly_mod(coefs, s) == 0):
            return {"intersective": False, "proof": "no root modulo s", "failing_modulus": s, "s_max": s_max}
    return {"intersective": True, "proof": f"a root modulo every s <= {s_max} (evidence, not a proof)",
            "s_max": s_max}


def _residue_witness(coefs: Sequence[int], s: int) -> list[int]:
    return [int(r) for r in np.flatnonzero(_poly_mod(coefs, s) == 0)]


def _in_unit_interval(c: rk.RealConst, cfg: PrecisionConfig) -> bool:
    return const_sign(c, cfg) >= 0 and const_sign(rk.add(rk.Rational(Fraction(1)), rk.neg(c)), cfg) >= 0


def classify_real_polynomial(coefs: Sequence, s_max: int = S_MAX, k_max: int = K_MAX,
                         cfg: PrecisionConfig = DEFAULT) -> PolyClassVerdict:
    """Classify q(n) = sum_i coefs[i] n^i (coefs[0] is the constant term).

    Irrationality and ratios are read off the linear forms of the
    coefficients, whose monomials are taken to be linearly independent over Q.
    """
    cs = [c if isinstance(c, rk.RealConst) else rk.Rational(Fraction(c)) for c in coefs]
    nonconst = [(i, c) for i, c in enumerate(cs) if i >= 1 and _lf(c)]
    if not any(not _is_rational(c) for _, c in nonconst):
        raise ValueError("need an irrational coefficient other than the constant term")
    base_i, base = next((i, c) for i, c in nonconst if not _is_rational(c))
    ratios = {}
    for i, c in nonconst:
        r = _rational_ratio(c, base)
        if r is None:
            return PolyClassVerdict("CaseA", {"pair": [base_i, i],
                                           "coefficients": [rk.render_const(base), rk.render_const(c)]})
        ratios[i] = r
    # q = alpha q1 + beta1 with q1 primitive over Z
    D = math.lcm(*(r.denominator for r in ratios.values()))
    ints = {i: int(r * D) for i, r in ratios.items()}
    G = math.gcd(*ints.values())
    alpha = rk.simplify(rk.mul(base, rk.Rational(Fraction(G, D))))
    deg = max(ints)
    q1 = [0] + [ints.get(i, 0) // G for i in range(1, deg + 1)]
    beta1 = cs[0]
    # k with beta1 + k alpha in [0, 1]
    a_iv = rk.eval_interval(alpha, 64)
    b_iv = rk.eval_interval(beta1, 64)
    lo_f = float(min((0 - b_iv.hi) / a_iv.lo, (1 - b_iv.lo) / a_iv.lo, (0 - b_iv.hi) / a_iv.hi, (1 - b_iv.lo) / a_iv.hi)) \
        if a_iv.lo > 0 else float(min((1 - b_iv.lo) / a_iv.hi, (0 - b_iv.hi) / a_iv.lo))
    hi_f = float(max((1 - b_iv.lo) / a_iv.lo, (0 - b_iv.hi) / a_iv.lo, (1 - b_iv.lo) / a_iv.hi, (0 - b_iv.hi) / a_iv.hi))
    k_lo, k_hi = math.floor(lo_f) - 1, math.ceil(hi_f) + 1
    truncated = False
    if k_hi - k_lo > 2 * k_max:
        truncated = True
        k_lo, k_hi = max(k_lo, -k_max), min(k_hi, k_max)
    candidates = []
    for k in range(k_lo, k_hi + 1):
        beta = rk.simplify(rk.add(beta1, rk.mul(rk.Rational(Fraction(k)), alpha)))
        if _in_unit_interval(beta, cfg):
            candidates.append((k, beta))
    detail = {"alpha": rk.render_const(alpha), "q1": q1, "beta1": rk.render_const(beta1),
              "k_range": [k_lo, k_hi], "k_range_truncated": truncated,
              "k_candidates": [k for k, _ in candidates]}
    tried = []
    for k, beta in candidates:
        q0 = [q1[0] - k] + q1[1:]
        scan = intersective_scan(q0, s_max)
        tried.append({"k": k, "q0": q0, **scan})
        if scan["intersective"]:
            out = {**detail, "k": k, "q0": q0, "beta": rk.render_const(beta), "intersectivity": scan}
            if "root" in scan:
                out["witness_mod_4"] = _residue_witness(q0, 4)
            return PolyClassVerdict("CaseB", out)
    detail["tried"] = tried
    detail["reason"] = ("no k puts beta1 + k alpha in [0, 1]" if not candidates
                        else f"q1 - k not intersective up to S_max = {s_max}")
    return PolyClassVerdict("Neither", detail)


def parse_poly_coefficients(text: str) -> list[rk.RealConst]:
    """Coefficients of a bracket-free polynomial in n, lowest degree first."""
    from .gp.decompose import poly_growth_decompose
    from .gp.evaluate import exact_value
    from .gp.parser import parse
    from .gp.ast import has_brackets
    q = parse(text)
    if has_brackets(q):
        raise ValueError("expected a polynomial without brackets")
    parts = poly_growth_decompose(q)
    if not parts:
        return [rk.Rational(Fraction(0))]
    deg = parts[0][0]
    out = [rk.Rational(Fraction(0))] * (deg + 1)
    for i, b in parts:
        out[i] = exact_value(b, 0)
    return out


def run_scenario(name: str, **params) -> dict:
    from .scenarios import run_scenario as _run
    return _run(name, **params)


def scenario_names() -> list[str]:
    from .scenarios import SCENARIOS
    return sorted(SCENARIOS)
