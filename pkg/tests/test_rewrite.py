import time

import pytest

from gpequi.index_order import is_valid, less
from gpequi.rewrite import IDENTITY_NAMES, replay_worked_rewrite, identity, verify_congruence


@pytest.mark.parametrize("name", IDENTITY_NAMES)
def test_identity_holds(name):
    lhs, rhs = identity(name)
    rep = verify_congruence(lhs, rhs, trials=1000, tol=1e-20, bits=128, seed=0)
    assert rep.passed, rep.to_dict()
    assert rep.boundary_trials > 0
    assert rep.worst_defect <= 1e-20


def test_corrupted_identity_fails():
    lhs, rhs = identity("id6-corrupted")
    rep = verify_congruence(lhs, rhs, trials=200, tol=1e-20, seed=0)
    assert not rep.passed
    assert rep.failures > 0 and rep.worst_defect > 1e-3


def test_unknown_identity():
    with pytest.raises((KeyError, ValueError)):
        identity("id99")


def test_seed_determinism():
    lhs, rhs = identity("id7")
    a = verify_congruence(lhs, rhs, trials=100, seed=3).to_dict()
    b = verify_congruence(lhs, rhs, trials=100, seed=3).to_dict()
    assert a == b


def test_worked_rewrite():
    t0 = time.perf_counter()
    trace = replay_worked_rewrite(samples=200)
    assert trace.passed, trace.to_dict()
    assert len(trace.branches) == 4
    assert is_valid(trace.gamma)
    assert time.perf_counter() - t0 < 60
