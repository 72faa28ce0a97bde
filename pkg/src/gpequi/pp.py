"""Piecewise-polynomial functions on [0,1]^l and per-residue canonical forms.

A canonical form stores, for each residue b mod a and degree i, a pp-function
f_i^(b) so that on n = b (mod a)

    q(n) = sum_i f_i^(b)({v_alpha1(P/M)(n)}, ..., {v_alphal(P/M)(n)}) n^i.

Forms are data: they are loaded from JSON or built by hand and then checked
against direct evaluation, never derived.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import realkernel as rk
from .distribution import DensityEstimate, density_estimate
from .gp.ast import FracPart, GPExpr
from .gp.evaluate import DEFAULT, PrecisionConfig, PrecisionExhausted, const_sign, eval_at_scale, exact_value
from .gp.parser import parse, parse_const
from .index_order import PolySystem, basic_gp, parse_index
from .realkernel import Interval, Unresolved

SCHEMA_ID = "gpequi-cf/1"


class NoPieceMatched(ValueError):
    pass


class MultiplePiecesMatched(ValueError):
    pass


class BoundaryAmbiguous(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# polynomials in l variables with RealConst coefficients


@dataclass(frozen=True)
class Poly:
    """Sum of coef * x1^e1 ... xl^el; ``terms`` is a tuple of (exponents, RealConst)."""

    terms: tuple

    @classmethod
    def const(cls, c, nvars: int) -> "Poly":
        return cls((((0,) * nvars, _as_const(c)),))

    @classmethod
    def var(cls, j: int, nvars: int, coef=1) -> "Poly":
        e = [0] * nvars
        e[j] = 1
        return cls(((tuple(e), _as_const(coef)),))

    @classmethod
    def from_dict(cls, d: dict) -> "Poly":
        return cls(tuple((tuple(e), _as_const(c)) for e, c in d.items()))

    def __add__(self, other: "Poly") -> "Poly":
        return Poly(self.terms + other.terms)

    def __neg__(self) -> "Poly":
        return Poly(tuple((e, rk.neg(c)) for e, c in self.terms))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        return Poly(tuple((tuple(a + b for a, b in zip(e1, e2)), rk.mul(c1, c2))
                          for e1, c1 in self.terms for e2, c2 in other.terms))

    @property
    def nvars(self) -> int:
        return len(self.terms[0][0]) if self.terms else 0

    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    def collected(self) -> dict:
        """Exponent tuple -> linear form, dropping cancelled monomials."""
        out: dict = {}
        for e, c in self.terms:
            lf = out.setdefault(e, {})
            for k, v in rk.linear_form(c).items():
                lf[k] = lf.get(k, 0) + v
        return {e: {k: v for k, v in lf.items() if v} for e, lf in out.items()
                if any(v for v in lf.values())}

    def is_zero(self) -> bool:
        """Exact zero test, assuming independence of the constant monomials."""
        try:
            return not self.collected()
        except rk.NotLinearizable:
            return False

    def evaluate(self, x: Sequence, F: int):
        """Fraction when x and all coefficients are rational, else an Interval at scale F."""
        acc = Fraction(0)
        for e, c in self.terms:
            cv = rk.as_exact_rational(c)
            t = cv if cv is not None else rk.fixed_enclosure(c, F)
            for xi, k in zip(x, e):
                if k:
                    t = t * (xi ** k)
            acc = acc + t
        return acc

    def evaluate_const(self, x: Sequence) -> rk.RealConst:
        """Exact value at a point given by RealConst coordinates."""
        parts = []
        for e, c in self.terms:
            fs = [c] + [xi for xi, k in zip(x, e) for _ in range(k)]
            parts.append(rk.mul(*fs) if len(fs) > 1 else c)
        return rk.simplify(rk.add(*parts)) if len(parts) > 1 else rk.simplify(parts[0]) if parts else rk.Rational(Fraction(0))

    def render(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        names = names or [f"x{j + 1}" for j in range(self.nvars)]
        parts = []
        for e, c in self.terms:
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
            cs = rk.render_const(c)
            parts.append(cs if not mono else mono if cs == "1" else f"{cs}*{mono}")
        return " + ".join(parts)


def _as_const(c) -> rk.RealConst:
    if isinstance(c, rk.RealConst):
        return c
    if isinstance(c, str):
        return parse_const(c)
    return rk.Rational(Fraction(c))


def _sign(v) -> int:
    if isinstance(v, Interval):
        return v.sign()
    return (v > 0) - (v < 0)


# ---------------------------------------------------------------------------
# pp-functions


@dataclass(frozen=True)
class Piece:
    strict: tuple      # phi > 0
    nonstrict: tuple   # psi >= 0
    variant: Poly

    def holds(self, x: Sequence, F: int) -> bool:
        """Membership of x; raises Unresolved when a condition's sign is undecided."""
        for phi in self.strict:
            if _sign(phi.evaluate(x, F)) <= 0:
                return False
        for psi in self.nonstrict:
            if _sign(psi.evaluate(x, F)) < 0:
                return False
        return True

    def holds_exact(self, x: Sequence, cfg: PrecisionConfig = DEFAULT) -> bool:
        if any(const_sign(phi.evaluate_const(x), cfg) <= 0 for phi in self.strict):
            return False
        return all(const_sign(psi.evaluate_const(x), cfg) >= 0 for psi in self.nonstrict)


@dataclass(frozen=True)
class PPFunction:
    nvars: int
    pieces: tuple

    def piece_index(self, x: Sequence, F: int) -> int:
        hits = [i for i, p in enumerate(self.pieces) if p.holds(x, F)]
        if not hits:
            raise NoPieceMatched(f"no piece contains {_fmt_point(x)}")
        if len(hits) > 1:
            raise MultiplePiecesMatched(f"pieces {hits} all contain {_fmt_point(x)}")
        return hits[0]

    def evaluate_at_scale(self, x: Sequence, F: int):
        return self.pieces[self.piece_index(x, F)].variant.evaluate(x, F)

    def piece_index_exact(self, x: Sequence, cfg: PrecisionConfig = DEFAULT) -> int:
        """Piece containing a point with RealConst coordinates, decided exactly."""
        hits = [i for i, p in enumerate(self.pieces) if p.holds_exact(x, cfg)]
        if not hits:
            raise NoPieceMatched("no piece contains the point")
        if len(hits) > 1:
            raise MultiplePiecesMatched(f"pieces {hits} all contain the point")
        return hits[0]

    def evaluate_const(self, x: Sequence, cfg: PrecisionConfig = DEFAULT) -> rk.RealConst:
        return self.pieces[self.piece_index_exact(x, cfg)].variant.evaluate_const(x)


def _fmt_point(x) -> str:
    return "(" + ", ".join(f"{float(v.mid() if isinstance(v, Interval) else v):.6g}" for v in x) + ")"


def constant_pp(c, nvars: int) -> PPFunction:
    return PPFunction(nvars, (Piece((), (), Poly.const(c, nvars)),))


def polynomial_pp(p: Poly) -> PPFunction:
    return PPFunction(p.nvars, (Piece((), (), p),))


def _point(x: Sequence) -> tuple:
    return tuple(v if isinstance(v, (Fraction, Interval)) else Fraction(v) for v in x)


def eval_pp(f: PPFunction, x: Sequence, cfg: PrecisionConfig = DEFAULT):
    """Value of f at x; floats are taken at their exact binary value."""
    x = _point(x)
    if len(x) != f.nvars:
        raise ValueError(f"expected {f.nvars} coordinates, got {len(x)}")
    for F in cfg.ladder():
        try:
            return f.evaluate_at_scale(x, F)
        except Unresolved:
            continue
    if all(isinstance(v, Fraction) for v in x):
        try:
            return _as_value(f.evaluate_const(tuple(rk.Rational(v) for v in x), cfg), cfg.start_bits)
        except PrecisionExhausted:
            pass
    raise BoundaryAmbiguous(f"point {_fmt_point(x)} lies on a piece boundary within {cfg.max_bits} bits")


def check_partition(f: PPFunction, samples: int = 10_000, seed: int = 0) -> dict:
    """Count uniform samples of [0,1]^l matched by zero, one or several pieces."""
    rng = random.Random(seed)
    counts = {"none": 0, "one": 0, "many": 0, "ambiguous": 0}
    for _ in range(samples):
        x = tuple(Fraction(rng.getrandbits(53), 1 << 53) for _ in range(f.nvars))
        try:
            eval_pp(f, x)
            counts["one"] += 1
        except NoPieceMatched:
            counts["none"] += 1
        except MultiplePiecesMatched:
            counts["many"] += 1
        except BoundaryAmbiguous:
            counts["ambiguous"] += 1
    counts["samples"] = samples
    counts["sound"] = counts["one"] == samples
    return counts


def example_pp() -> PPFunction:
    """xy on {y >= x^3, x >= y^3}; x^2 + y - sqrt3 on {y < x^3}; 4 on {x < y^3}."""
    x, y = Poly.var(0, 2), Poly.var(1, 2)
    return PPFunction(2, (
        Piece((), (y - x * x * x, x - y * y * y), x * y),
        Piece((x * x * x - y,), (), x * x + y - Poly.const(rk.sqrt(3), 2)),
        Piece((y * y * y - x,), (), Poly.const(4, 2)),
    ))


# ---------------------------------------------------------------------------
# canonical forms


@dataclass(frozen=True)
class CanonicalForm:
    P: PolySystem
    M: int
    a: int
    indices: tuple
    components: dict = field(hash=False, compare=False)   # (b, i) -> PPFunction
    expression: str = ""                                     # the GP it represents, if recorded

    def __post_init__(self):
        if self.M < 1 or self.a < 1:
            raise ValueError("M and a must be positive")
        for (b, i), f in self.components.items():
            if not 0 <= b < self.a or i < 0:
                raise ValueError(f"bad component key {(b, i)}")
            if f.nvars != len(self.indices):
                raise ValueError(f"component {(b, i)} has {f.nvars} variables, expected {len(self.indices)}")

    @property
    def nvars(self) -> int:
        return len(self.indices)

    def degrees(self, b: int) -> list[int]:
        return sorted(i for bb, i in self.components if bb == b)

    def coordinate_exprs(self) -> tuple:
        """GPExprs {v_alpha_j(P/M)}."""
        PM = self.P.scaled(self.M)
        return tuple(FracPart(basic_gp(alpha, PM)) for alpha in self.indices)


def _coords_at_scale(cf: CanonicalForm, n: int, F: int) -> tuple:
    out = []
    for e in cf.coordinate_exprs():
        v = eval_at_scale(e, n, F)
        out.append(Fraction(v) if isinstance(v, int) else v)
    return tuple(out)


def _realize_at_scale(cf: CanonicalForm, n: int, F: int):
    b = n % cf.a
    x = _coords_at_scale(cf, n, F)
    acc = Fraction(0)
    for i in cf.degrees(b):
        acc = acc + cf.components[(b, i)].evaluate_at_scale(x, F) * (Fraction(n) ** i)
    return acc


def _realize_exact(cf: CanonicalForm, n: int, cfg: PrecisionConfig) -> rk.RealConst:
    """Symbolic fallback for points on a piece boundary."""
    b = n % cf.a
    try:
        x = tuple(exact_value(e, n, cfg) for e in cf.coordinate_exprs())
        parts = [rk.mul(cf.components[(b, i)].evaluate_const(x, cfg), rk.Rational(Fraction(n) ** i))
                 for i in cf.degrees(b)]
    except PrecisionExhausted:
        raise BoundaryAmbiguous(f"n={n}: coordinates sit on a piece boundary within {cfg.max_bits} bits") from None
    return rk.simplify(rk.add(*parts)) if parts else rk.Rational(Fraction(0))


def _as_value(c: rk.RealConst, F: int):
    v = rk.as_exact_rational(c)
    return v if v is not None else rk.eval_interval(c, F)


def realize(cf: CanonicalForm, n: int, cfg: PrecisionConfig = DEFAULT):
    for F in cfg.ladder():
        try:
            return _realize_at_scale(cf, n, F)
        except Unresolved:
            continue
    return _as_value(_realize_exact(cf, n, cfg), cfg.start_bits)


def coordinates(cf: CanonicalForm, n: int, cfg: PrecisionConfig = DEFAULT) -> tuple:
    for F in cfg.ladder():
        try:
            return _coords_at_scale(cf, n, F)
        except Unresolved:
            continue
    return tuple(_as_value(exact_value(e, n, cfg), cfg.start_bits) for e in cf.coordinate_exprs())


@dataclass
class CanonicalReport:
    n_checked: int
    max_deviation: float
    violations: list
    ambiguous: list

    @property
    def passed(self) -> bool:
        return not self.violations and not self.ambiguous

    def to_dict(self) -> dict:
        return {"n_checked": self.n_checked, "max_deviation": self.max_deviation,
                "violations": self.violations[:50], "n_violations": len(self.violations),
                "ambiguous": self.ambiguous[:50], "pass": self.passed}


def verify_canonical(q: GPExpr, cf: CanonicalForm, n_range: tuple, cfg: PrecisionConfig = DEFAULT,
                     ns: Sequence[int] | None = None) -> CanonicalReport:
    """Compare q(n) with the canonical form over n_range (inclusive) or an explicit list ns."""
    ns = range(n_range[0], n_range[1] + 1) if ns is None else ns
    worst = Fraction(0)
    bad, amb = [], []
    count = 0
    for n in ns:
        count += 1
        for F in cfg.ladder():
            try:
                d = eval_at_scale(q, n, F) - _realize_at_scale(cf, n, F)
                break
            except Unresolved:
                continue
        else:
            try:
                diff = rk.add(exact_value(q, n, cfg), rk.neg(_realize_exact(cf, n, cfg)))
                d = _as_value(diff, cfg.start_bits) if const_sign(diff, cfg) else Fraction(0)
            except (BoundaryAmbiguous, PrecisionExhausted):
                amb.append(n)
                continue
        if isinstance(d, Interval):
            dev = max(abs(d.lo), abs(d.hi))
            wrong = not d.contains(0)
        else:
            dev = abs(Fraction(d))
            wrong = dev != 0
        worst = max(worst, dev)
        if wrong:
            bad.append(n)
    return CanonicalReport(count, float(worst), bad, amb)


# ---------------------------------------------------------------------------
# adequacy


def partition_cells(cf: CanonicalForm, b: int) -> list[tuple]:
    """Cells of the common refinement of f_i^(b), i >= 1: one piece index per degree."""
    cells = [()]
    for i in cf.degrees(b):
        if i == 0:
            continue
        cells = [c + (j,) for c in cells for j in range(len(cf.components[(b, i)].pieces))]
    return cells


def _cell_of(cf: CanonicalForm, b: int, x: tuple, F: int) -> tuple:
    return tuple(cf.components[(b, i)].piece_index(x, F) for i in cf.degrees(b) if i)


def _cell_vanishes(cf: CanonicalForm, b: int, cell: tuple) -> bool:
    higher = [i for i in cf.degrees(b) if i]
    return all(cf.components[(b, i)].pieces[j].variant.is_zero() for i, j in zip(higher, cell))


def piece_densities(cf: CanonicalForm, N: int, cfg: PrecisionConfig = DEFAULT) -> dict:
    """(b, cell) -> DensityEstimate of visits among n in [-N, N] with n = b mod a."""
    counts: dict = {}
    totals = [0] * cf.a
    for n in range(-N, N + 1):
        b = n % cf.a
        totals[b] += 1
        for F in cfg.ladder():
            try:
                cell = _cell_of(cf, b, _coords_at_scale(cf, n, F), F)
                break
            except Unresolved:
                continue
        else:
            x = tuple(exact_value(e, n, cfg) for e in cf.coordinate_exprs())
            cell = tuple(cf.components[(b, i)].piece_index_exact(x, cfg) for i in cf.degrees(b) if i)
        counts[(b, cell)] = counts.get((b, cell), 0) + 1
    return {(b, cell): density_estimate(counts.get((b, cell), 0), totals[b])
            for b in range(cf.a) for cell in partition_cells(cf, b)}


ADEQUATE, NOT_ADEQUATE, UNDETERMINED = "Adequate", "NotAdequate", "Undetermined"


def adequacy_decide(cf: CanonicalForm, densities: dict) -> tuple[str, list]:
    """Verdict and per-cell evidence.

    NotAdequate: a cell with certified positive density where every
    higher-degree variant vanishes.  Undetermined: no such cell, but either a
    vanishing cell has a density estimate straddling 0 or no cell at all is
    certified positive.  Adequate otherwise.
    """
    evidence = []
    straddle = False
    any_positive = False
    failing = False
    for b in range(cf.a):
        for cell in partition_cells(cf, b):
            est = densities.get((b, cell), DensityEstimate(0.0, 1.0, 0, 0))
            vanishes = _cell_vanishes(cf, b, cell)
            any_positive |= est.certified_positive
            evidence.append({"residue": b, "cell": list(cell), "vanishes": vanishes, **est.to_dict()})
            if vanishes:
                if est.certified_positive:
                    failing = True
                elif est.value + est.radius > 0:
                    straddle = True
    if failing:
        return NOT_ADEQUATE, evidence
    if straddle or not any_positive:
        return UNDETERMINED, evidence
    return ADEQUATE, evidence


# ---------------------------------------------------------------------------
# JSON


def _poly_to_json(p: Poly) -> list:
    return [{"exp": list(e), "coef": rk.render_const(c)} for e, c in p.terms]


def _poly_from_json(items: list, nvars: int) -> Poly:
    terms = []
    for t in items:
        e = tuple(int(k) for k in t["exp"])
        if len(e) != nvars:
            raise ValueError(f"monomial {e} does not have {nvars} exponents")
        terms.append((e, parse_const(str(t["coef"]))))
    return Poly(tuple(terms))


def to_json(cf: CanonicalForm) -> dict:
    from .gp.ast import render
    comps = []
    for (b, i), f in sorted(cf.components.items()):
        comps.append({"residue": b, "degree": i, "pieces": [
            {"strict": [_poly_to_json(p) for p in pc.strict],
             "nonstrict": [_poly_to_json(p) for p in pc.nonstrict],
             "variant": _poly_to_json(pc.variant)} for pc in f.pieces]})
    return {
        "schema": SCHEMA_ID,
        "atoms": [{"name": a.name, "poly": render(p)} for a, p in zip(cf.P.atoms, cf.P.polys)],
        "independence_note": cf.P.independence_note,
        "M": cf.M,
        "a": cf.a,
        "indices": [str(x) for x in cf.indices],
        "components": comps,
    } | ({"expression": cf.expression} if cf.expression else {})


def from_json(doc: dict) -> CanonicalForm:
    if doc.get("schema") != SCHEMA_ID:
        raise ValueError(f"unsupported schema {doc.get('schema')!r}")
    P = PolySystem.build([(a["name"], parse(a["poly"])) for a in doc["atoms"]], doc.get("independence_note", ""))
    indices = tuple(parse_index(s, P.atoms) for s in doc["indices"])
    l = len(indices)
    comps = {}
    for c in doc["components"]:
        pieces = tuple(Piece(tuple(_poly_from_json(p, l) for p in pc.get("strict", [])),
                             tuple(_poly_from_json(p, l) for p in pc.get("nonstrict", [])),
                             _poly_from_json(pc["variant"], l)) for pc in c["pieces"])
        comps[(int(c["residue"]), int(c["degree"]))] = PPFunction(l, pieces)
    return CanonicalForm(P, int(doc["M"]), int(doc["a"]), indices, comps, doc.get("expression", ""))


def load(path) -> CanonicalForm:
    return from_json(json.loads(fixture_path(path).read_text()))


def dump(cf: CanonicalForm, path) -> None:
    Path(path).write_text(json.dumps(to_json(cf), indent=1) + "\n")


DATA_DIR = Path(__file__).with_name("data")


def shipped_form(name: str) -> CanonicalForm:
    """Load a fixture from the package data directory by stem, e.g. "u_sqrt2"."""
    return load(DATA_DIR / "canonical" / f"{name}.json")


def fixture_path(name_or_path) -> Path:
    p = Path(name_or_path)
    if p.suffix == ".json":
        return p
    return DATA_DIR / "canonical" / f"{name_or_path}.json"


def fixture_expression(name_or_path) -> GPExpr | None:
    """The GP expression a fixture claims to represent, when it records one."""
    doc = json.loads(fixture_path(name_or_path).read_text())
    text = doc.get("expression")
    return parse(text) if text else None


def shipped_names() -> list[str]:
    return sorted(p.stem for p in (DATA_DIR / "canonical").glob("*.json"))
