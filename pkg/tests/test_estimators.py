import numpy as np
import pytest

from qboosting.boostcore import uniform
from qboosting.concepts import Hypothesis
from qboosting.estimators import MODES, adversarial_noise, estimate_error
from qboosting.qsim import NoiseBudget, QueryLedger, contract_holds

B = NoiseBudget(4, 10, 8)
H = Hypothesis.stump(0, 1)


def test_exact_mode(maj3, rng):
    out = estimate_error("exact", uniform(8), H, maj3, B, rng)
    assert out.branch == "yes" and out.estimate == 0.25


def test_exact_mode_below_tau(maj3, rng):
    D = np.where(H.predict(maj3.X) == maj3.y, 1.0, 1e-6)
    D /= D.sum()
    out = estimate_error("exact", D, H, maj3, B, rng)
    assert out.branch == "no" and out.estimate == B.tau


def test_synthetic_within_contract(maj3, rng):
    for _ in range(200):
        out = estimate_error("synthetic", uniform(8), H, maj3, B, rng)
        assert out.branch == "yes"
        assert contract_holds(out, 0.25, B)


@pytest.mark.parametrize("direction", ["low", "high"])
def test_adversarial_sits_on_the_envelope(maj3, direction):
    out = adversarial_noise(uniform(8), H, maj3, B, direction)
    assert abs(0.25 - out.estimate) == pytest.approx(B.delta * out.estimate, rel=1e-12)
    assert contract_holds(out, 0.25, B)
    assert (out.estimate > 0.25) == (direction == "high")


def test_adversarial_bad_direction(maj3):
    with pytest.raises(ValueError):
        adversarial_noise(uniform(8), H, maj3, B, "sideways")


def test_qsim_mode_charges_queries(maj3, rng):
    led = QueryLedger()
    led.start_round()
    out = estimate_error("qsim", uniform(8), H, maj3, B, rng, led)
    assert out.branch == "yes"
    assert led.totals["estimation"] == out.queries_used > 0


def test_all_modes_listed(maj3, rng):
    for mode in MODES:
        estimate_error(mode, uniform(8), H, maj3, B, rng)
    with pytest.raises(ValueError):
        estimate_error("psychic", uniform(8), H, maj3, B, rng)
