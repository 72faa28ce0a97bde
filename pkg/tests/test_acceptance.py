"""Acceptance criteria, one PASS/FAIL line each (also listed in the pytest summary)."""

import json
import random
import subprocess
import sys
import time
from fractions import Fraction

from gpequi.gp.ast import FracPart, Mul
from gpequi.gp.evaluate import evaluate
from gpequi.index_order import Bracket, InvalidIndex, basic_gp, cmp_index, less, letters, mul_frac
from gpequi.pp import fixture_expression, fixture_path, from_json, shipped_form, verify_canonical
from gpequi.primes import residues_coprime, table
from gpequi.rewrite import IDENTITY_NAMES, identity, verify_congruence
from gpequi.scenarios import run_scenario

from test_index_order import random_indices, system


def timed_scenario(name):
    t0 = time.perf_counter()
    r = run_scenario(name)
    return r, time.perf_counter() - t0


def failed_checks(r):
    return [c["key"] for c in r["checks"] if not c["pass"]]


def test_exact_identities(acceptance_log):
    names = ["u-two-valued", "piecewise-sqrt2-sqrt3", "distance-formula", "floor-shift-sqrt11",
             "empty-return-set", "prime-upper-half"]
    ok, parts = True, []
    for name in names:
        r, dt = timed_scenario(name)
        good = r["pass"] and dt <= 60
        ok &= good
        parts.append(f"{name} {'ok' if good else 'BAD ' + str(failed_checks(r))} {dt:.1f}s")
    assert acceptance_log("1 exact identities", ok, "; ".join(parts))


def test_identity_suite(acceptance_log):
    t0 = time.perf_counter()
    bad, worst = [], 0.0
    for name in IDENTITY_NAMES:
        lhs, rhs = identity(name)
        rep = verify_congruence(lhs, rhs, trials=1000, tol=1e-20, bits=128, seed=0)
        worst = max(worst, rep.worst_defect)
        if not rep.passed or rep.boundary_trials == 0:
            bad.append(name)
    dt = time.perf_counter() - t0
    ok = not bad and dt <= 10
    assert acceptance_log("2 identity suite", ok,
                          f"{len(IDENTITY_NAMES)} identities x 1000 trials, worst defect {worst:.2e}, "
                          f"failing {bad or 'none'}, {dt:.1f}s")


def test_order_laws(acceptance_log):
    a, b, c = letters("abc")
    xs = random_indices(3000, seed=11)
    rng = random.Random(12)
    tri_bad = trans_bad = 0
    for _ in range(10_000):
        x, y = rng.choice(xs), rng.choice(xs)
        s = cmp_index(x, y)
        if s != -cmp_index(y, x) or (s == 0) != (x == y):
            tri_bad += 1
        z = rng.choice(xs)
        if cmp_index(x, y) <= 0 and cmp_index(y, z) <= 0 and cmp_index(x, z) > 0:
            trans_bad += 1
    P = system()
    small = random_indices(400, seed=13, max_depth=3)
    pairs = sound_bad = 0
    while pairs < 60:
        a1, a2 = rng.choice(small), rng.choice(small)
        if not less(a2, a1):
            continue
        try:
            prod = mul_frac(a1, a2)
        except InvalidIndex:
            continue
        pairs += 1
        lhs, rhs = basic_gp(prod, P), Mul((basic_gp(a1, P), FracPart(basic_gp(a2, P))))
        for n in range(1, 51):
            d = evaluate(lhs, n) - evaluate(rhs, n)
            if not (d.contains(0) if hasattr(d, "contains") else d == 0):
                sound_bad += 1
    examples = [less(c, Bracket(b, m, a)) for m in (1, 2, 5)]
    examples += [less(Bracket(b, m1, a), Bracket(c, m2, a)) for m1 in (1, 3) for m2 in (1, 2)]
    examples += [less(Bracket(c, m1, a), Bracket(c, m2, b)) for m1 in (1, 3) for m2 in (1, 2)]
    ok = tri_bad == 0 and trans_bad == 0 and sound_bad == 0 and all(examples)
    assert acceptance_log("3 order laws", ok,
                          f"trichotomy failures {tri_bad}/10000, transitivity failures {trans_bad}/10000, "
                          f"product realization mismatches {sound_bad} over {pairs} pairs x 50 points, "
                          f"worked orderings {sum(examples)}/{len(examples)}")


def test_equidistribution_trends(acceptance_log):
    star, _ = timed_scenario("sqrt2-star")
    box, _ = timed_scenario("triple-box")
    trend, _ = timed_scenario("wd-trend-sqrt2")
    ok = star["pass"] and box["pass"] and trend["pass"]
    series = [round(s["max_window_discrepancy"], 5) for s in trend["measured"]["series"]]
    assert acceptance_log("4 equidistribution trends", ok,
                          f"D*({{n sqrt2}}, 1e5) = {star['measured']['star_discrepancy']:.2e}; "
                          f"triple box {box['measured']['box_discrepancy']:.4f}, "
                          f"max window {box['measured']['max_window_discrepancy']:.4f}; "
                          f"windowed series {series}")


def test_adequacy_probes(acceptance_log):
    nu, _ = timed_scenario("nu-adequacy")
    sq, _ = timed_scenario("square-adequacy")
    lv, _ = timed_scenario("liouville-norm-growth")
    ok = nu["pass"] and sq["pass"] and lv["pass"]
    assert acceptance_log("5 adequacy probes", ok,
                          f"|n u(n)| < 1 deviation {nu['measured']['deviation']:.4f}; "
                          f"n^2 max density {sq['measured']['max_density']:.2e}; "
                          f"Liouville witnesses {lv['measured']['J_witnesses'][:4]} "
                          f"density {lv['measured']['J_density']:.2e}")


def test_prime_machinery(acceptance_log):
    t0 = time.perf_counter()
    t = table(1000)
    basics = t.pi(10) == 4 and t.pi(100) == 25 and residues_coprime(6)[0] == [1, 5]
    gap, _ = timed_scenario("prime-lambda-gap")
    half, _ = timed_scenario("prime-half-mass")
    cauchy, _ = timed_scenario("prime-cauchy")
    dt = time.perf_counter() - t0
    ok = basics and gap["pass"] and half["pass"] and cauchy["pass"] and dt <= 300
    assert acceptance_log("6 prime machinery", ok,
                          f"pi/R(6) {'ok' if basics else 'BAD'}; gap {gap['measured']['gap']:.2e}; "
                          f"mass {half['measured']['mass_below_half']:.4f}, "
                          f"prime D* {half['measured']['prime_star_discrepancy']:.4f}; "
                          f"Cauchy gaps {[round(g, 4) for g in cauchy['measured']['gaps']]}; {dt:.0f}s")


def _corrupt(name, mutate):
    doc = json.loads(fixture_path(name).read_text())
    mutate(doc)
    return from_json(doc)


def _bump_variant(doc):
    v = doc["components"][0]["pieces"][-1]["variant"]
    v[0]["coef"] = f"({v[0]['coef']}) + 1/1000"


def _shift_threshold(doc):
    doc["components"][0]["pieces"][0]["strict"][0][0]["coef"] = "3/5"
    doc["components"][0]["pieces"][1]["nonstrict"][0][1]["coef"] = "-3/5"


def test_canonical_verifier(acceptance_log):
    parts, ok = [], True
    for name in ("frac_sqrt2", "u_sqrt2"):
        rep = verify_canonical(fixture_expression(name), shipped_form(name), (-10_000, 10_000))
        ok &= rep.passed
        parts.append(f"{name}: {rep.n_checked} points, {len(rep.violations)} violations, "
                     f"max enclosure {rep.max_deviation:.1e}")
    for name, mutate in (("frac_sqrt2", _bump_variant), ("u_sqrt2", _bump_variant), ("u_sqrt2", _shift_threshold)):
        rep = verify_canonical(fixture_expression(name), _corrupt(name, mutate), (-100, 100))
        caught = not rep.passed
        ok &= caught
        parts.append(f"corrupted {name}/{mutate.__name__.strip('_')} "
                     f"{'caught at n=' + str(rep.violations[0]) if caught else 'NOT caught'}")
    assert acceptance_log("7 canonical-form verifier", ok, "; ".join(parts))


COMMANDS = [
    ["scenario", "liouville-gate-quadratic"],
    ["identity-check", "id7", "--trials", "300", "--seed", "4"],
    ["ud", "n^2", "--lam", "sqrt(2)", "--N", "5000"],
    ["wd", "n", "--lam", "sqrt(3)", "--N", "3000", "--window", "600"],
    ["recurrence", "classify", "sqrt(2)*(n^2 + 4*n - 12)"],
    ["canonical-verify", "u_sqrt2", "--N", "300"],
    ["primes", "compare-lambda", "sqrt(2)*n", "--N", "20000"],
]


def test_determinism(acceptance_log):
    same = 0
    for args in COMMANDS:
        outs = [subprocess.run([sys.executable, "-m", "gpequi", *args, "--format", "json"],
                               capture_output=True).stdout for _ in range(2)]
        same += outs[0] == outs[1] and len(outs[0]) > 0
    ok = same == len(COMMANDS)
    assert acceptance_log("8 determinism", ok, f"{same}/{len(COMMANDS)} commands byte-identical across two runs")
