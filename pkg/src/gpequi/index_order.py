"""Well-ordered index symbols, basic generalized polynomials and the product law.

An index is an atom or a bracket ``[gamma, m*beta]``.  Validity: beta < gamma
and either gamma is an atom or gamma = [lambda, k*delta] with delta < beta.
Atoms compare by their declared rank and sit below every bracket; two
brackets compare lexicographically by (beta, gamma, m).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, Union

from . import realkernel as rk
from .gp.ast import Const, FracPart, GPExpr, Mul, Pow, has_brackets


class InvalidIndex(ValueError):
    pass


class UnknownAtom(KeyError):
    pass


class PreconditionViolated(ValueError):
    pass


@dataclass(frozen=True)
class Atom:
    name: str
    rank: int

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Bracket:
    gamma: "IndexSym"
    m: int
    beta: "IndexSym"

    def __str__(self) -> str:
        mult = "" if self.m == 1 else str(self.m)
        return f"[{self.gamma},{mult}{self.beta}]"


IndexSym = Union[Atom, Bracket]


def cmp_index(x, y) -> int:
    """-1, 0 or 1 according to the order on B(A)."""
    xa, ya = isinstance(x, Atom), isinstance(y, Atom)
    if xa and ya:
        if x.rank == y.rank:
            if x.name != y.name:
                raise InvalidIndex(f"atoms {x} and {y} share a rank")
            return 0
        return -1 if x.rank < y.rank else 1
    if xa:
        return -1
    if ya:
        return 1
    c = cmp_index(x.beta, y.beta)
    if c:
        return c
    c = cmp_index(x.gamma, y.gamma)
    if c:
        return c
    return (x.m > y.m) - (x.m < y.m)


def less(x, y) -> bool:
    return cmp_index(x, y) < 0


def is_valid(x) -> bool:
    if isinstance(x, Atom):
        return True
    if not isinstance(x, Bracket) or x.m < 1:
        return False
    if not (is_valid(x.gamma) and is_valid(x.beta)):
        return False
    if not less(x.beta, x.gamma):
        return False
    if isinstance(x.gamma, Bracket) and not less(x.gamma.beta, x.beta):
        return False
    return True


def validate_index(x, atoms: Sequence[Atom] | None = None) -> bool:
    """True when x belongs to B(A); raises UnknownAtom for undeclared atoms."""
    if atoms is not None:
        known = {(a.name, a.rank) for a in atoms}
        for a in atoms_of(x):
            if (a.name, a.rank) not in known:
                raise UnknownAtom(a.name)
    return is_valid(x)


def atoms_of(x):
    if isinstance(x, Atom):
        yield x
    else:
        yield from atoms_of(x.gamma)
        yield from atoms_of(x.beta)


def depth(x) -> int:
    if isinstance(x, Atom):
        return 0
    return 1 + max(depth(x.gamma), depth(x.beta))


def spine(x) -> tuple:
    """Split x = [[...[d0, m1 d1]...], ms ds] into (d0, [(m1, d1), ..., (ms, ds)])."""
    pairs = []
    while isinstance(x, Bracket):
        pairs.append((x.m, x.beta))
        x = x.gamma
    return x, pairs[::-1]


def from_spine(d0, pairs) -> object:
    x = d0
    for m, d in pairs:
        x = Bracket(x, m, d)
    return x


def mul_frac(a1, a2):
    """Index a' with v_{a'} = v_{a1} {v_{a2}}; requires a2 < a1."""
    if not less(a2, a1):
        raise PreconditionViolated(f"{a2} is not below {a1}")
    if isinstance(a1, Atom):
        out = Bracket(a1, 1, a2)
    else:
        d0, pairs = spine(a1)
        pairs = list(pairs)
        deltas = [d for _, d in pairs]
        if less(deltas[-1], a2):
            pairs.append((1, a2))
        else:
            for i, d in enumerate(deltas):
                c = cmp_index(a2, d)
                if c == 0:
                    pairs[i] = (pairs[i][0] + 1, d)
                    break
                if c < 0:
                    pairs.insert(i, (1, a2))
                    break
        out = from_spine(d0, pairs)
    if not is_valid(out):
        raise InvalidIndex(f"product index {out} is not valid")
    if not less(a1, out):
        raise AssertionError(f"product index {out} is not above {a1}")
    return out


# ---------------------------------------------------------------------------
# polynomial systems and realization


@dataclass(frozen=True)
class PolySystem:
    """Atoms in increasing order with one bracket-free polynomial each.

    Linear independence of the polynomials over Q modulo Q[n] + R is a
    declared assumption (``independence_note``), not something checked here.
    """

    atoms: tuple
    polys: tuple
    independence_note: str = ""

    def __post_init__(self):
        if len(self.atoms) != len(self.polys):
            raise ValueError("one polynomial per atom")
        for a, p in zip(self.atoms, self.polys):
            if has_brackets(p):
                raise ValueError(f"polynomial for {a} contains brackets")

    @classmethod
    def build(cls, pairs: Sequence[tuple[str, GPExpr]], note: str = "") -> "PolySystem":
        atoms = tuple(Atom(name, i) for i, (name, _) in enumerate(pairs))
        return cls(atoms, tuple(p for _, p in pairs), note)

    def atom(self, name: str) -> Atom:
        for a in self.atoms:
            if a.name == name:
                return a
        raise UnknownAtom(name)

    def poly(self, a: Atom) -> GPExpr:
        for b, p in zip(self.atoms, self.polys):
            if b == a:
                return p
        raise UnknownAtom(a.name)

    def scaled(self, M: int) -> "PolySystem":
        """The system M^-1 P."""
        if M == 1:
            return self
        inv = Const(rk.Rational(Fraction(1, M)))
        return PolySystem(self.atoms, tuple(Mul((inv, p)) for p in self.polys), self.independence_note)


def basic_gp(x, P: PolySystem) -> GPExpr:
    if not is_valid(x):
        raise InvalidIndex(str(x))
    return _realize(x, P)


def _realize(x, P: PolySystem) -> GPExpr:
    if isinstance(x, Atom):
        return P.poly(x)
    f = FracPart(_realize(x.beta, P))
    return Mul((_realize(x.gamma, P), f if x.m == 1 else Pow(f, x.m)))


# ---------------------------------------------------------------------------
# literal syntax: atoms are identifiers, "[c,2a]" is Bracket(c, 2, a)

_IDX_TOKEN = re.compile(r"\s*(\[|\]|,|\d+|[A-Za-z_][A-Za-z_0-9]*)")


def parse_index(text: str, atoms: Sequence[Atom] | Mapping[str, Atom]) -> object:
    table = atoms if isinstance(atoms, Mapping) else {a.name: a for a in atoms}
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _IDX_TOKEN.match(text, pos)
        if not m:
            raise SyntaxError(f"bad index literal at position {pos}: {text!r}")
        toks.append(m.group(1))
        pos = m.end()
    i = 0

    def item():
        nonlocal i
        t = toks[i] if i < len(toks) else None
        if t == "[":
            i += 1
            g = item()
            if toks[i] != ",":
                raise SyntaxError(f"expected ',' in {text!r}")
            i += 1
            mult = 1
            if toks[i].isdigit():
                mult = int(toks[i])
                i += 1
            b = item()
            if toks[i] != "]":
                raise SyntaxError(f"expected ']' in {text!r}")
            i += 1
            return Bracket(g, mult, b)
        if t is None or not re.match(r"[A-Za-z_]", t):
            raise SyntaxError(f"expected an atom in {text!r}")
        i += 1
        if t not in table:
            raise UnknownAtom(t)
        return table[t]

    try:
        out = item()
    except IndexError:
        raise SyntaxError(f"truncated index literal {text!r}") from None
    if i != len(toks):
        raise SyntaxError(f"trailing input in index literal {text!r}")
    return out


def letters(names: str) -> list[Atom]:
    """Atoms named by single letters in increasing order, e.g. letters("abc")."""
    return [Atom(ch, i) for i, ch in enumerate(names)]
