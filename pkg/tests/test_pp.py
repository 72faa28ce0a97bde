import copy
import json
from fractions import Fraction
from importlib import resources

import jsonschema
import pytest

from gpequi import realkernel as rk
from gpequi.distribution import DensityEstimate
from gpequi.gp.parser import parse
from gpequi.pp import (ADEQUATE, NOT_ADEQUATE, UNDETERMINED, Poly, adequacy_decide, check_partition,
                       constant_pp, eval_pp, example_pp, fixture_expression, fixture_path, from_json,
                       partition_cells, piece_densities, shipped_form, shipped_names, to_json,
                       verify_canonical)


def schema():
    return json.loads(resources.files("gpequi").joinpath("data/schemas/canonical-form.json").read_text())


def as_float(v):
    return float(v.mid()) if hasattr(v, "mid") else float(v)


def test_example_pp_values():
    f = example_pp()
    assert eval_pp(f, (Fraction(1, 2), Fraction(1, 2))) == Fraction(1, 4)
    assert abs(as_float(eval_pp(f, (Fraction(9, 10), Fraction(1, 10)))) - (0.81 + 0.1 - 3 ** 0.5)) < 1e-15
    assert eval_pp(f, (Fraction(1, 10), Fraction(9, 10))) == 4
    assert eval_pp(constant_pp(4, 3), (0.1, 0.2, 0.3)) == 4


def test_partition_sound():
    rep = check_partition(example_pp(), samples=10_000)
    assert rep["sound"], rep


def test_fixture_round_trip_and_schema():
    for name in shipped_names():
        doc = json.loads(fixture_path(name).read_text())
        jsonschema.validate(doc, schema())
        assert to_json(from_json(doc)) == doc
        assert fixture_expression(name) is not None


def test_bad_schema_tag():
    doc = json.loads(fixture_path("u_sqrt2").read_text())
    doc["schema"] = "other/1"
    with pytest.raises(ValueError):
        from_json(doc)


@pytest.mark.parametrize("name", ["frac_sqrt2", "u_sqrt2", "n_u_sqrt2", "worked_rewrite"])
def test_shipped_forms_verify(name):
    cf = shipped_form(name)
    rep = verify_canonical(fixture_expression(name), cf, (-300, 300))
    assert rep.passed, rep.to_dict()
    # enclosure width only; worked_rewrite carries n^3-sized terms
    assert rep.max_deviation < (1e-15 if name == "worked_rewrite" else 1e-20)


def corrupt(name, mutate):
    doc = copy.deepcopy(json.loads(fixture_path(name).read_text()))
    mutate(doc)
    return from_json(doc)


def bump_variant(doc):
    v = doc["components"][0]["pieces"][-1]["variant"]
    v[0]["coef"] = f"({v[0]['coef']}) + 1/1000"


def shift_threshold(doc):
    doc["components"][0]["pieces"][0]["strict"][0][0]["coef"] = "3/5"
    doc["components"][0]["pieces"][1]["nonstrict"][0][1]["coef"] = "-3/5"


@pytest.mark.parametrize("name, mutate", [("frac_sqrt2", bump_variant), ("u_sqrt2", bump_variant),
                                          ("u_sqrt2", shift_threshold)])
def test_corrupted_forms_fail_early(name, mutate):
    rep = verify_canonical(fixture_expression(name), corrupt(name, mutate), (-100, 100))
    assert not rep.passed
    assert rep.violations and min(abs(n) for n in rep.violations) <= 100


def test_adequacy_verdicts():
    nu = shipped_form("n_u_sqrt2")
    verdict, _ = adequacy_decide(nu, piece_densities(nu, 3000))
    assert verdict == NOT_ADEQUATE
    lead = shipped_form("worked_rewrite")
    verdict, _ = adequacy_decide(lead, piece_densities(lead, 300))
    assert verdict == ADEQUATE
    blank = {(b, cell): DensityEstimate(0.0, 0.5, 0, 1) for b in range(nu.a) for cell in partition_cells(nu, b)}
    verdict, _ = adequacy_decide(nu, blank)
    assert verdict == UNDETERMINED


def test_poly_arithmetic():
    x, y = Poly.var(0, 2), Poly.var(1, 2)
    p = x * x + y - Poly.const(rk.sqrt(3), 2)
    assert abs(as_float(p.evaluate((Fraction(1, 2), Fraction(1, 4)), 128)) - (0.5 - 3 ** 0.5)) < 1e-15
