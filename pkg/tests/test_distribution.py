import math

import numpy as np
import pytest

from gpequi import realkernel as rk
from gpequi.distribution import (adequacy_test, banach_density_lower, box_discrepancy_kd, density_estimate,
                                 histogram, natural_density, star_discrepancy_1d, ud_report, wd_test,
                                 window_starts, weyl_sum)
from gpequi.gp.parser import parse


def test_star_discrepancy_examples():
    assert star_discrepancy_1d([0.0]) == 1.0
    assert star_discrepancy_1d([0.0, 0.5]) == 0.5
    N = 1000
    x = (2 * np.arange(1, N + 1) - 1) / (2 * N)
    assert abs(star_discrepancy_1d(x) - 1 / (2 * N)) < 1e-15


def test_weyl_examples():
    assert abs(weyl_sum([0.5, 0.0], 1)) < 1e-15
    assert abs(weyl_sum(np.zeros(17), 1) - 1) < 1e-15


def test_weyl_sqrt2_small():
    x = np.array([math.fmod(n * math.sqrt(2), 1) for n in range(1, 100_001)])
    assert abs(weyl_sum(x, 1)) < 1e-3


def test_box_discrepancy():
    rng = np.random.default_rng(0)
    assert box_discrepancy_kd(rng.random((20_000, 2)), 10) < 0.03
    assert box_discrepancy_kd(np.zeros((10, 2)), 10) > 0.9


def test_histogram_counts():
    assert histogram([0.05, 0.15, 0.95, 0.951], 10) == [1, 1, 0, 0, 0, 0, 0, 0, 0, 2]


def test_window_starts():
    assert window_starts(5, 11) == [0]
    s = window_starts(100, 20)
    assert s[0] == 0 and s[-1] == 201 - 20 and all(b - a <= 2 for a, b in zip(s, s[1:]))
    with pytest.raises(ValueError):
        window_starts(5, 12)


def test_two_point_orbit_not_wd():
    rep = wd_test(parse("n"), rk.rational(1, 2), N=200, L=40)
    assert rep.extra["max_window_discrepancy"] >= 0.5


def test_sqrt2_windows_small():
    rep = wd_test(parse("n"), rk.sqrt(2), N=50_000, L=10_000)
    assert rep.extra["max_window_discrepancy"] < 0.01


def test_densities():
    even = natural_density(lambda n: n % 2 == 0, 1000)
    assert abs(even.value - 0.5) < 0.01 and even.radius < 0.06
    odd = natural_density(lambda n: n % 2 == 1, 1000)
    assert even.count + odd.count == even.total
    sq = natural_density(lambda n: n >= 0 and math.isqrt(n) ** 2 == n, 10_000)
    assert sq.value < 0.01
    assert banach_density_lower(lambda n: 0 <= n < 10, 100, 10)["value"] == 1.0


def test_density_radius_rule():
    est = density_estimate(25, 100)
    assert est.radius == pytest.approx(3 * math.sqrt(0.25 * 0.75 / 100) + 0.01)
    assert est.certified_positive
    assert not density_estimate(0, 100).certified_positive


def test_adequacy_of_square():
    rows = adequacy_test(parse("n^2"), [1, 100], 10_000)
    for row in rows:
        assert row["value"] <= 2 * math.ceil(math.sqrt(float(row["A"]))) / 20_001 + 1e-12


def test_ud_report_shape():
    rep, x = ud_report(parse("n"), rk.sqrt(2), N=1000)
    d = rep.to_dict()
    assert set(d["weyl"]) == {"1", "2", "3"} and sum(d["histogram"]) == 1000 == x.size
