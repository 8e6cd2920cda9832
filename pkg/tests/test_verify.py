import math

import numpy as np
import pytest

from qboosting.boostcore import RoundRecord
from qboosting.concepts import WeakLearnerSpec
from qboosting.qboost import run_quantum_boost
from qboosting.qsim import NoiseBudget
from qboosting import verify


def rec(t=1, branch="yes", eps_tilde=0.25, eps_true=0.25, Z=0.8, s=1.0, fid=1.0, err=0.0):
    return RoundRecord(t, branch, eps_tilde, eps_tilde, eps_true, 0.5, Z, s, fid, err, 0)


def test_case1_bound_value():
    assert verify.case1_bound(0.25, 40, 4) == pytest.approx(7.4466e-3, rel=1e-4)
    assert verify.case1_bound(0.0, 40, 4) >= 1


def test_case1_bound_crosses_one_eighth_by_T40():
    assert verify.case1_bound(0.25, 40, 4) < 1 / 8


def test_case2_bound_formula():
    g, T, Q, ell = 0.25, 40, 4, 2
    expected = math.exp(2 * ell * (math.log(2 * 2 * T) + g * g) - 2 * T * g * g + 1)
    assert verify.case2_bound(g, T, Q, ell) == pytest.approx(expected)
    assert verify.case2_bound(g, T, Q, 0) == pytest.approx(math.e * math.exp(-5))


def test_subnormalization_window():
    d = 1e-4
    ok = verify.check_subnormalization([rec(s=1 - 10 * d), rec(s=1 - 29 * d)], d)
    assert ok.ok and ok.worst_slack == pytest.approx(d, rel=1e-6)
    bad = verify.check_subnormalization([rec(s=1 - 31 * d), rec(s=1 + 1e-9)], d)
    assert bad.failures == 2


def test_eps_gap():
    d = 1e-4
    rep = verify.check_eps_gap([rec(eps_true=0.25 + 3 * d), rec(branch="no", eps_true=0.25 + 49 * d)], d)
    assert rep.ok
    assert rep.details["yes_within_4delta"]
    assert not verify.check_eps_gap([rec(eps_true=0.25 + 51 * d)], d).ok


def test_fidelity_check_branches():
    b = NoiseBudget(4, 10, 8)
    d, tau = b.delta, b.tau
    good = [rec(fid=1 - 1.9 * d), rec(branch="no", fid=1 - 1.4 * tau)]
    assert verify.check_fidelity(good, b).ok
    bad = verify.check_fidelity([rec(fid=1 - 2.1 * d)], b)
    assert bad.details["yes_failures"] == 1 and not bad.ok


def test_training_bound_and_trace():
    b = NoiseBudget(4, 10, 8)
    recs = [rec(t=1, Z=0.5, err=0.25), rec(t=2, branch="no", Z=0.1, err=0.0)]
    trace = verify.convergence_trace(recs, b)
    assert trace[0] == (1, 0.25, pytest.approx(0.5))
    assert trace[1][2] == pytest.approx(0.05 * 400)
    rep = verify.check_training_bound(recs, b, 0.0)
    assert rep.claim == "CaseII" and rep.ok


def test_claims_hold_on_synthetic_run(maj3):
    res = run_quantum_boost(maj3, WeakLearnerSpec(), 40, 4, "synthetic", np.random.default_rng(5))
    d = res.budget.delta
    assert verify.check_subnormalization(res.records, d).ok
    assert verify.check_eps_gap(res.records, d).ok
    assert verify.check_training_bound(res.records, res.budget, res.train_err).ok
    c1 = verify.check_case1(res.records, res.budget, res.train_err)
    assert c1.ok and c1.details["zero_error"]


def test_case1_rejects_no_rounds():
    with pytest.raises(ValueError):
        verify.check_case1([rec(branch="no")], NoiseBudget(4, 10, 8), 0.0)


def test_bernoulli_margins():
    assert verify.bernoulli_ceiling(0.5, 100) == pytest.approx(0.65)
    assert verify.bernoulli_floor(0.5, 100) == pytest.approx(0.35)


def test_contract_harness_small():
    b = NoiseBudget(4, 10, 32)
    rep = verify.contract_trial_harness(b, [0.25, 1e-6], 50, np.random.default_rng(0))
    assert rep.ok
    rows = rep.details["grid"]
    assert rows[0]["yes"] == 50 and rows[1]["yes"] == 0


def test_accuracy_harness_small():
    rep = verify.accuracy_trial_harness([0.1, 0.5], [64], 2000, np.random.default_rng(0))
    assert rep.ok
    for row in rep.details["grid"]:
        # the two nearest phase outcomes alone carry 8/pi^2 ~ 0.81
        assert row["frequency"] >= 0.78


def test_report_dict():
    rep = verify.check_subnormalization([rec()], 1e-4)
    d = rep.to_dict()
    assert d["claim"] == "C4.3" and d["checked"] == 1 and d["failures"] == 0
