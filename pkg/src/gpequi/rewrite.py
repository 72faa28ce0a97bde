"""Congruences modulo 1 as term rewrites, with a sampling verifier.

Terms are products of raw arguments u and fractional parts {u}, scaled by a
real constant.  Arguments are formal symbols, nested term sums, or
generalized polynomials in n.  Each identity returns the right-hand side;
``identity(name)`` packages a left/right pair for checking.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from . import realkernel as rk
from .gp.ast import Add, Const, FracPart, GPExpr, Mul, Neg
from .gp.ast import complexity as gp_complexity
from .gp.evaluate import eval_at_scale
from .realkernel import Interval, Unresolved


class GuardViolated(ArithmeticError):
    pass


@dataclass(frozen=True)
class Sym:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Raw:
    arg: object


@dataclass(frozen=True)
class Frac:
    arg: object


@dataclass(frozen=True)
class Term:
    coef: object = Fraction(1)  # Fraction or RealConst
    factors: tuple = ()


@dataclass(frozen=True)
class TermSum:
    terms: tuple

    def __add__(self, other: "TermSum") -> "TermSum":
        return TermSum(self.terms + other.terms)

    def scaled(self, c) -> "TermSum":
        return TermSum(tuple(Term(_cmul(c, t.coef), t.factors) for t in self.terms))


@dataclass(frozen=True)
class Guard:
    """lower (<= or <) {arg} (< or <=) upper; a bound of None is absent."""

    arg: object
    lower: object = None
    lower_strict: bool = False
    upper: object = None
    upper_strict: bool = True


@dataclass(frozen=True)
class GuardedSum:
    branches: tuple  # of (tuple[Guard, ...], TermSum)


Expr = Union[TermSum, GuardedSum, GPExpr]


def _cmul(a, b):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a * b
    if isinstance(a, Fraction) and a == 1:
        return b
    if isinstance(b, Fraction) and b == 1:
        return a
    ca = rk.Rational(a) if isinstance(a, Fraction) else a
    cb = rk.Rational(b) if isinstance(b, Fraction) else b
    return rk.mul(ca, cb)


def term(*factors, coef=Fraction(1)) -> Term:
    return Term(coef if isinstance(coef, rk.RealConst) else Fraction(coef), tuple(factors))


def tsum(*terms: Term) -> TermSum:
    return TermSum(tuple(terms))


def syms(*names: str) -> list[Sym]:
    return [Sym(x) for x in names]


# ---------------------------------------------------------------------------
# the identities (right-hand sides)


def id_split_sum(us: Sequence) -> TermSum:
    """{u1 + ... + uk} == {u1} + ... + {uk}."""
    return tsum(*(term(Frac(u)) for u in us))


def _const_floor(a) -> int:
    v = rk.as_exact_rational(a) if isinstance(a, rk.RealConst) else Fraction(a)
    if v is not None:
        return math.floor(v)
    p = 64
    while True:
        try:
            return rk.eval_interval(a, p).floor()
        except Unresolved:
            p *= 2


def _as_real(a) -> rk.RealConst:
    return a if isinstance(a, rk.RealConst) else rk.Rational(Fraction(a))


def _const_lt(x: rk.RealConst, y: rk.RealConst) -> bool:
    d = rk.add(x, rk.neg(y))
    v = rk.as_exact_rational(d)
    if v is not None:
        return v < 0
    p = 64
    while True:
        try:
            return rk.eval_interval(d, p).sign() < 0
        except Unresolved:
            p *= 2


def id_scale_frac(a, u, integer_scaling: bool = False) -> GuardedSum:
    """{a{u}} = a{u} - b on b/a <= {u} < min((b+1)/a, 1), b = 0..[a].

    With ``integer_scaling`` (a a positive integer) the left side is {a u}
    and the same guards give {a u} = a{u} - b.
    """
    a = _as_real(a)
    av = rk.as_exact_rational(a)
    if integer_scaling and (av is None or av.denominator != 1 or av < 1):
        raise ValueError("integer scaling needs a positive integer a")
    if not _const_lt(rk.Rational(Fraction(0)), a):
        raise ValueError("scale must be positive")
    one = rk.Rational(Fraction(1))
    branches = []
    for b in range(_const_floor(a) + 1):
        lo = rk.Rational(Fraction(0)) if b == 0 else _quotient(b, a)
        hi_raw = _quotient(b + 1, a)
        hi = hi_raw if _const_lt(hi_raw, one) else one
        if not _const_lt(lo, hi):
            continue
        rhs = tsum(term(Frac(u), coef=a), term(coef=-b)) if b else tsum(term(Frac(u), coef=a))
        branches.append(((Guard(u, lo, False, hi, True),), rhs))
    return GuardedSum(tuple(branches))


def _quotient(b: int, a: rk.RealConst) -> rk.RealConst:
    av = rk.as_exact_rational(a)
    if av is not None:
        return rk.Rational(Fraction(b) / av)
    return rk.div(rk.Rational(Fraction(b)), a)


def id_neg(u) -> GuardedSum:
    """{-u} = 1 - {u} if {u} > 0, else 0."""
    zero = rk.Rational(Fraction(0))
    return GuardedSum((
        ((Guard(u, zero, True, None, True),), tsum(term(), term(Frac(u), coef=-1))),
        ((Guard(u, zero, False, zero, False),), tsum()),
    ))


def id_frac_of_product(us: Sequence) -> TermSum:
    """{prod {u_i}} = prod {u_i}."""
    return tsum(term(*(Frac(u) for u in us)))


def _signed_product(us: Sequence, S: Sequence[int]) -> list:
    return [Raw(us[i]) for i in S]


def id_pull_out(us: Sequence) -> TermSum:
    """u1 prod_{i>=2} {u_i} == sum over S != {1} of (-1)^|S| prod_S u_i prod_{not S} {u_i}.

    Exact because prod_i (u_i - {u_i}) is an integer.  k = 2 and k = 3 give
    the familiar two- and seven-term expansions.
    """
    k = len(us)
    if k < 2:
        raise ValueError("need at least two arguments")
    out = []
    for size in range(k + 1):
        for S in itertools.combinations(range(k), size):
            if S == (0,):
                continue
            factors = _signed_product(us, S) + [Frac(us[i]) for i in range(k) if i not in S]
            out.append(term(*factors, coef=(-1) ** size))
    return TermSum(tuple(out))


def id_multiple(M: int, m: int, us: Sequence) -> TermSum:
    """M u1 {u1}^(m-1) prod_{i>m} {u_i} == (M/m) * (right side of the pull-out rule).

    ``us`` lists u1 once followed by u_{m+1}, ..., u_k; u1 is repeated m times.
    """
    if m < 1 or M % m:
        raise ValueError("m must divide M")
    full = [us[0]] * m + list(us[1:])
    k = len(full)
    scale = Fraction(M, m)
    out = []
    for size in range(k + 1):
        for S in itertools.combinations(range(k), size):
            if size == 1 and S[0] < m:
                continue
            factors = _signed_product(full, S) + [Frac(full[i]) for i in range(k) if i not in S]
            out.append(term(*factors, coef=scale * (-1) ** size))
    return TermSum(tuple(out))


def lhs_pull_out(us: Sequence) -> TermSum:
    return tsum(term(Raw(us[0]), *(Frac(u) for u in us[1:])))


def lhs_multiple(M: int, m: int, us: Sequence) -> TermSum:
    return tsum(term(Raw(us[0]), *([Frac(us[0])] * (m - 1)), *(Frac(u) for u in us[1:]), coef=M))


# ---------------------------------------------------------------------------
# complexity and conversion to expressions


def complexity(x) -> int:
    if isinstance(x, Sym):
        return 0
    if isinstance(x, GPExpr):
        return gp_complexity(x)
    if isinstance(x, Raw):
        return complexity(x.arg)
    if isinstance(x, Frac):
        return complexity(x.arg) + 1
    if isinstance(x, Term):
        return sum(complexity(f) for f in x.factors)
    if isinstance(x, TermSum):
        return max((complexity(t) for t in x.terms), default=0)
    raise TypeError(f"no complexity for {x!r}")


def to_gp(x) -> GPExpr:
    """Convert a term sum whose arguments are expressions into a GPExpr."""
    if isinstance(x, GPExpr):
        return x
    if isinstance(x, Sym):
        raise TypeError(f"free symbol {x} has no expression")
    if isinstance(x, Raw):
        return to_gp(x.arg)
    if isinstance(x, Frac):
        return FracPart(to_gp(x.arg))
    if isinstance(x, Term):
        coef = x.coef if isinstance(x.coef, rk.RealConst) else rk.Rational(x.coef)
        parts = [to_gp(f) for f in x.factors]
        if rk.as_exact_rational(coef) == 1 and parts:
            return parts[0] if len(parts) == 1 else Mul(tuple(parts))
        if rk.as_exact_rational(coef) == -1 and parts:
            return Neg(parts[0] if len(parts) == 1 else Mul(tuple(parts)))
        return Mul((Const(coef),) + tuple(parts)) if parts else Const(coef)
    if isinstance(x, TermSum):
        if not x.terms:
            return Const(rk.Rational(Fraction(0)))
        parts = [to_gp(t) for t in x.terms]
        return parts[0] if len(parts) == 1 else Add(tuple(parts))
    raise TypeError(f"cannot convert {x!r}")


def free_symbols(x) -> set:
    if isinstance(x, Sym):
        return {x.name}
    if isinstance(x, GPExpr):
        return {"n"}
    if isinstance(x, (Raw, Frac)):
        return free_symbols(x.arg)
    if isinstance(x, Term):
        return set().union(*(free_symbols(f) for f in x.factors)) if x.factors else set()
    if isinstance(x, TermSum):
        return set().union(*(free_symbols(t) for t in x.terms)) if x.terms else set()
    if isinstance(x, GuardedSum):
        out = set()
        for guards, rhs in x.branches:
            out |= free_symbols(rhs)
            for g in guards:
                out |= free_symbols(g.arg)
        return out
    raise TypeError(f"unknown node {x!r}")


# ---------------------------------------------------------------------------
# evaluation


def _coef_value(c, F: int):
    if isinstance(c, Fraction):
        return c
    v = rk.as_exact_rational(c)
    return v if v is not None else rk.fixed_enclosure(c, F)


def _frac(v):
    if isinstance(v, Interval):
        return v.frac()
    return v - math.floor(v)


def value(x, env: dict, F: int):
    """Exact Fraction or Interval; raises Unresolved when a floor is undecided."""
    if isinstance(x, Sym):
        return env[x.name]
    if isinstance(x, GPExpr):
        v = eval_at_scale(x, env["n"], F)
        return Fraction(v) if isinstance(v, int) else v
    if isinstance(x, Raw):
        return value(x.arg, env, F)
    if isinstance(x, Frac):
        return _frac(value(x.arg, env, F))
    if isinstance(x, Term):
        acc = _coef_value(x.coef, F)
        for f in x.factors:
            acc = acc * value(f, env, F)
        return acc
    if isinstance(x, TermSum):
        acc = Fraction(0)
        for t in x.terms:
            acc = acc + value(t, env, F)
        return acc
    if isinstance(x, GuardedSum):
        hits = [rhs for guards, rhs in x.branches if all(_guard_holds(g, env, F) for g in guards)]
        if len(hits) != 1:
            raise GuardViolated(f"{len(hits)} guard branches match at {env}")
        return value(hits[0], env, F)
    raise TypeError(f"cannot evaluate {x!r}")


def _cmp(v, c, F: int) -> int:
    cv = rk.as_exact_rational(c)
    if cv is not None and not isinstance(v, Interval):
        return (v > cv) - (v < cv)
    iv = v if isinstance(v, Interval) else Interval.exact(v, F)
    civ = Interval.exact(cv, F) if cv is not None else rk.fixed_enclosure(c, F)
    return (iv - civ).sign()


def _guard_holds(g: Guard, env: dict, F: int) -> bool:
    f = _frac(value(g.arg, env, F))
    if g.lower is not None:
        c = _cmp(f, g.lower, F)
        if c < 0 or (c == 0 and g.lower_strict):
            return False
    if g.upper is not None:
        c = _cmp(f, g.upper, F)
        if c > 0 or (c == 0 and g.upper_strict):
            return False
    return True


def _defect(d, modulo_one: bool) -> Fraction:
    """Upper bound of dist(d, Z) (or |d| when not modulo one)."""
    if isinstance(d, Interval):
        k = math.floor((d.lo + d.hi) / 2 + Fraction(1, 2)) if modulo_one else 0
        e = d - k
        return max(abs(e.lo), abs(e.hi))
    if not modulo_one:
        return abs(d)
    f = d - math.floor(d)
    return min(f, 1 - f)


@dataclass
class CongruenceReport:
    trials: int
    tol: float
    bits: int
    worst_defect: float
    worst_sample: dict
    failures: int
    passed: bool
    boundary_trials: int = 0

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "boundary_trials": self.boundary_trials,
            "tol": self.tol,
            "bits": self.bits,
            "worst_defect": self.worst_defect,
            "worst_sample": self.worst_sample,
            "failures": self.failures,
            "pass": self.passed,
        }


def _guard_edges(rhs) -> dict:
    edges: dict = {}
    if isinstance(rhs, GuardedSum):
        for guards, _ in rhs.branches:
            for g in guards:
                if isinstance(g.arg, Sym):
                    for c in (g.lower, g.upper):
                        if c is not None:
                            edges.setdefault(g.arg.name, set()).add(c)
    return edges


def _dyadic(rng: random.Random, lo: Fraction, width: Fraction, bits: int) -> Fraction:
    return lo + width * Fraction(rng.getrandbits(bits), 1 << bits)


def _sample_env(rng, names, edges, boundary: bool, bits: int, n_range) -> dict:
    env = {}
    for name in names:
        if name == "n":
            env["n"] = rng.randint(*n_range)
            continue
        base = Fraction(rng.randrange(10))
        if not boundary or rng.random() < 0.3:
            env[name] = _dyadic(rng, Fraction(0), Fraction(10), bits + 4)
            continue
        # {u} within 1e-3 of an edge: 0 and 1 always, guard edges when present
        choices = [Fraction(0), Fraction(1)] + sorted(edges.get(name, ()), key=repr)
        e = rng.choice(choices)
        if isinstance(e, rk.RealConst):
            v = rk.as_exact_rational(e)
            e = v if v is not None else rk.eval_interval(e, bits + 16).lo
        delta = _dyadic(rng, Fraction(0), Fraction(1, 1000), bits)
        r = rng.random()
        if r < 0.15:
            delta = Fraction(0)
        elif r < 0.55:
            delta = -delta
        u = base + e + delta
        env[name] = u
    return env


def verify_congruence(lhs, rhs, trials: int = 1000, tol: float = 1e-20, bits: int = 128, seed: int = 0,
                      boundary_fraction: float = 0.2, modulo_one: bool = True,
                      n_range: tuple = (1, 1000), max_bits: int = rk.DEFAULT_MAX_BITS) -> CongruenceReport:
    """Sample the free variables and bound dist(lhs - rhs, Z) for every sample.

    Formal symbols are drawn from [0, 10) as dyadic rationals with ``bits``
    fractional bits; a share of samples puts {u} within 1e-3 of 0, 1 or a
    guard edge.  The free variable n of expression arguments is drawn from
    ``n_range``.  With ``modulo_one=False`` the sides must agree exactly.
    """
    rng = random.Random(seed)
    names = sorted(free_symbols(lhs) | free_symbols(rhs))
    edges = _guard_edges(rhs)
    n_boundary = int(round(trials * boundary_fraction)) if any(x != "n" for x in names) else 0
    worst = Fraction(-1)
    worst_env: dict = {}
    failures = 0
    tol_q = Fraction(tol)
    for t in range(trials):
        env = _sample_env(rng, names, edges, t < n_boundary, bits, n_range)
        F = bits
        while True:
            try:
                d = value(lhs, env, F) - value(rhs, env, F)
                bound = _defect(d, modulo_one)
                width = d.width if isinstance(d, Interval) else Fraction(0)
                if bound < tol_q / 8 or width < tol_q / 64 or F >= max_bits:
                    break
            except Unresolved:
                if F >= max_bits:
                    raise
            F *= 2
        if bound >= tol_q:
            failures += 1
        if bound > worst:
            worst = bound
            worst_env = {k: float(v) for k, v in env.items()}
    return CongruenceReport(trials, tol, bits, float(max(worst, Fraction(0))), worst_env, failures,
                            failures == 0, n_boundary)


# ---------------------------------------------------------------------------
# catalog used by the command line and the tests


def identity(name: str):
    """(lhs, rhs) for a named identity over formal symbols."""
    u1, u2, u3, u4 = syms("u1", "u2", "u3", "u4")
    if name == "id1":
        return tsum(term(Frac(tsum(term(Raw(u1)), term(Raw(u2)), term(Raw(u3)))))), id_split_sum([u1, u2, u3])
    if name == "id2":
        a = rk.sqrt(5)
        return tsum(term(Frac(tsum(term(Frac(u1), coef=a))))), id_scale_frac(a, u1)
    if name == "id2p":
        return tsum(term(Frac(tsum(term(Raw(u1), coef=3))))), id_scale_frac(3, u1, integer_scaling=True)
    if name == "id3":
        return tsum(term(Frac(tsum(term(Raw(u1), coef=-1))))), id_neg(u1)
    if name == "id4":
        us = [u1, u2, u3]
        return tsum(term(Frac(id_frac_of_product(us)))), id_frac_of_product(us)
    if name == "id5":
        us = [u1, u2, u3, u4]
        return lhs_pull_out(us), id_pull_out(us)
    if name == "id6":
        return lhs_pull_out([u1, u2]), id_pull_out([u1, u2])
    if name == "id7":
        return lhs_pull_out([u1, u2, u3]), id_pull_out([u1, u2, u3])
    if name == "id8":
        return lhs_multiple(6, 2, [u1, u2, u3]), id_multiple(6, 2, [u1, u2, u3])
    if name == "id6-corrupted":
        lhs, rhs = lhs_pull_out([u1, u2]), id_pull_out([u1, u2])
        flipped = tuple(Term(-t.coef, t.factors) if t.factors == (Raw(u2), Frac(u1)) else t for t in rhs.terms)
        return lhs, TermSum(flipped)
    raise KeyError(f"unknown identity {name!r}")


IDENTITY_NAMES = ("id1", "id2", "id2p", "id3", "id4", "id5", "id6", "id7", "id8")


# ---------------------------------------------------------------------------
# worked rewrite: a degree-two generalized polynomial with a principal index


@dataclass
class TraceStep:
    name: str
    description: str
    report: CongruenceReport | None = None
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        ok = self.report.passed if self.report is not None else True
        return ok and all(bool(v) for k, v in self.checks.items() if k.startswith("ok_"))


@dataclass
class RewriteTrace:
    steps: list
    branches: list
    gamma: object
    system: object

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.steps)

    def to_dict(self) -> dict:
        return {
            "gamma": str(self.gamma),
            "branches": self.branches,
            "steps": [{"name": s.name, "description": s.description,
                       "report": s.report.to_dict() if s.report else None,
                       "checks": {k: v for k, v in s.checks.items()}} for s in self.steps],
            "pass": self.passed,
        }


def replay_worked_rewrite(samples: int = 500, tol: float = 1e-20, seed: int = 0, n_range=(1, 400)) -> RewriteTrace:
    """Replay the rewrite of {q(n) lam} that isolates the principal basic polynomial.

    q(n) = {sqrt2 n} n^2 + (sqrt3 {sqrt2 n} + {u2}{u3}) n + 3{sqrt2 n} - {sqrt5 n^2}{sqrt7 n}{sqrt11 n^3}
    with u2 = sqrt5 n^2 {sqrt7 n}, u3 = sqrt11 n^3 {sqrt5 n^2}{sqrt11 n^3 {sqrt7 n}}, lam = pi.
    """
    from .gp.parser import parse
    from .index_order import PolySystem, basic_gp, cmp_index, is_valid, mul_frac, parse_index

    lam = "pi"
    P = PolySystem.build([
        ("a1", parse("sqrt(2)*n")), ("a2", parse("sqrt(7)*n")), ("a3", parse("sqrt(5)*n^2")),
        ("a4", parse("sqrt(11)*n^3")), ("a5", parse("sqrt(55)*n^5")),
        ("b1", parse(f"{lam}*n")), ("b2", parse(f"sqrt(3)*{lam}*n")), ("b3", parse(f"{lam}*n^2")),
    ], note="square roots of distinct squarefree integers and pi: independent over Q modulo Q[n] + R")
    A = P.atoms
    ix = lambda s: parse_index(s, A)  # noqa: E731
    v = lambda s: basic_gp(ix(s), P)  # noqa: E731
    check = dict(trials=samples, tol=tol, seed=seed, n_range=n_range)

    q = parse("{sqrt(2)*n}*n^2 + (sqrt(3)*{sqrt(2)*n} + {sqrt(5)*n^2*{sqrt(7)*n}}*{sqrt(11)*n^3*{sqrt(5)*n^2}*"
              "{sqrt(11)*n^3*{sqrt(7)*n}}})*n + (3*{sqrt(2)*n} - {sqrt(5)*n^2}*{sqrt(7)*n}*{sqrt(11)*n^3})")
    qlam = FracPart(Mul((q, parse(lam))))
    u1, u2, u3 = v("b1"), v("[a3,a2]"), v("[[a4,a3],[a4,a2]]")
    steps = []

    # expression (2): the part of q*lam without the product term
    expr2 = tsum(
        term(Frac(parse(f"{lam}*n^2*{{sqrt(2)*n}}"))),
        term(Frac(parse(f"sqrt(3)*{lam}*n*{{sqrt(2)*n}}"))),
        term(Raw(parse(f"(3*{{sqrt(2)*n}} - {{sqrt(5)*n^2}}*{{sqrt(7)*n}}*{{sqrt(11)*n^3}})*{lam}"))),
    )
    product = tsum(term(Raw(u1), Frac(u2), Frac(u3)))
    lhs = tsum(term(Raw(qlam)))
    steps.append(TraceStep("split", "{q lam} == expression (2) + lam n {u2}{u3}",
                           verify_congruence(lhs, expr2 + product, **check)))

    expansion = id_pull_out([u1, u2, u3])
    steps.append(TraceStep("id7", "lam n {u2}{u3} expanded by the three-factor pull-out rule",
                           verify_congruence(product, expansion, **check)))
    t = {tuple(f for f in tm.factors): tm for tm in expansion.terms}
    sub2 = tsum(t[(Frac(u1), Frac(u2), Frac(u3))])
    sub3 = tsum(t[(Raw(u2), Frac(u1), Frac(u3))])
    sub4 = tsum(t[(Raw(u3), Frac(u1), Frac(u2))])
    w = TermSum(tuple(tm for tm in expansion.terms if tsum(tm) not in (sub2, sub3, sub4)))

    # branch (i): u3 {u1}{u2} is the basic polynomial of gamma
    gamma = mul_frac(mul_frac(ix("[[a4,a3],[a4,a2]]"), ix("b1")), ix("[a3,a2]"))
    literal = ix("[[[[a4,a3],b1],[a3,a2]],[a4,a2]]")
    v_gamma = basic_gp(gamma, P)
    steps.append(TraceStep(
        "branch-i", "u3 {u1}{u2} = v_gamma",
        verify_congruence(tsum(term(Raw(u3), Frac(u1), Frac(u2))), tsum(term(Raw(v_gamma))),
                          modulo_one=False, **check),
        {"gamma": str(gamma), "ok_gamma_matches": gamma == literal, "ok_gamma_valid": is_valid(gamma),
         "ok_gamma_above_a4": cmp_index(gamma, P.atom("a4")) > 0,
         "complexity_v_gamma": gp_complexity(v_gamma)}))

    # branch (ii): a product of fractional parts of basic polynomials other than v_gamma
    idx_ii = ["b1", "[a3,a2]", "[[a4,a3],[a4,a2]]"]
    steps.append(TraceStep(
        "branch-ii", "{u1}{u2}{u3} = {v_b1}{v_[a3,a2]}{v_[[a4,a3],[a4,a2]]}",
        verify_congruence(sub2, tsum(term(*(Frac(v(s)) for s in idx_ii))), modulo_one=False, **check),
        {"ok_gamma_absent": all(ix(s) != gamma for s in idx_ii)}))

    # branch (iii): u2{u1}{u3} = u1'{u2'} with u1' = v_[[a3,a2],b1], u2' = u3
    u1p = v("[[a3,a2],b1]")
    sub3_alt = tsum(term(Raw(u1p), Frac(u3), coef=-1))
    same = verify_congruence(sub3, sub3_alt, modulo_one=False, **check)
    exp6 = id_pull_out([u1p, u3]).scaled(Fraction(-1))
    r6 = verify_congruence(sub3_alt, exp6, **check)
    idx_mid = mul_frac(ix("[[a4,a3],[a4,a2]]"), ix("[[a3,a2],b1]"))
    idx_top = ix("[[[[a5,a2],a3],b1],[a4,a2]]")
    mid_ok = verify_congruence(tsum(term(Raw(u3), Frac(u1p))), tsum(term(Raw(basic_gp(idx_mid, P)))),
                               modulo_one=False, **check)
    top_ok = verify_congruence(tsum(term(Raw(u1p), Raw(u3))), tsum(term(Raw(basic_gp(idx_top, P)))),
                               modulo_one=False, **check)
    steps.append(TraceStep(
        "branch-iii", "u2{u1}{u3} rewritten by the two-factor pull-out rule",
        r6,
        {"ok_same_term": same.passed, "ok_middle_index": mid_ok.passed, "ok_top_index": top_ok.passed,
         "middle_index": str(idx_mid), "top_index": str(idx_top),
         "ok_middle_expected": idx_mid == ix("[[[a4,a3],[a4,a2]],[[a3,a2],b1]]"),
         "ok_gamma_absent": gamma not in (idx_mid, idx_top, ix("[[a3,a2],b1]"), ix("[[a4,a3],[a4,a2]]")),
         "ok_top_valid": is_valid(idx_top)}))

    # branch (iv): everything else has complexity at most 5 while v_gamma has 6
    w_cmp = [complexity(tm) for tm in w.terms]
    e2_cmp = [complexity(tm) for tm in expr2.terms]
    cg = gp_complexity(v_gamma)
    steps.append(TraceStep(
        "branch-iv", "remaining terms have complexity below that of v_gamma",
        None,
        {"w_complexities": w_cmp, "expression2_complexities": e2_cmp, "v_gamma_complexity": cg,
         "ok_bounded": max(w_cmp + e2_cmp) <= 5 and cg == 6}))

    # final shape: {q lam} == -{v_gamma} + w'
    w_prime = expr2 + sub2 + exp6 + w
    final = verify_congruence(lhs, tsum(term(Frac(v_gamma), coef=-1)) + w_prime, **check)
    steps.append(TraceStep("final", "{q lam} == -{v_gamma} + w'(n)", final,
                           {"w_prime_terms": len(w_prime.terms)}))
    branches = ["{u1}{u2}{u3}", "-u2{u1}{u3}", "-u3{u1}{u2}", "w(n)"]
    return RewriteTrace(steps, branches, gamma, P)
