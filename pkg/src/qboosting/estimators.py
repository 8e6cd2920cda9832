"""Weighted-error oracles: exact, synthetic noise, adversarial envelope, simulated quantum."""
from __future__ import annotations

import numpy as np

from .boostcore import weighted_error
from .concepts import Hypothesis, TrainingSet
from .qsim import AEOutcome, NoiseBudget, QueryLedger, modified_amplitude_estimation

MODES = ("exact", "synthetic", "adversarial-low", "adversarial-high", "qsim")


def _no(budget: NoiseBudget) -> AEOutcome:
    return AEOutcome(budget.tau, "no", 0, 0)


def adversarial_noise(
    Dt, h: Hypothesis, S: TrainingSet, budget: NoiseBudget, direction: str
) -> AEOutcome:
    """The most extreme estimate the estimator contract still allows."""
    if direction not in ("low", "high"):
        raise ValueError("direction must be 'low' or 'high'")
    eps = weighted_error(Dt, h, S)
    if eps < budget.yes_threshold:
        return _no(budget)
    d = budget.delta
    return AEOutcome(eps / (1 - d) if direction == "high" else eps / (1 + d), "yes", 0, 0)


def estimate_error(
    mode: str,
    Dt,
    h: Hypothesis,
    S: TrainingSet,
    budget: NoiseBudget,
    rng: np.random.Generator,
    ledger: QueryLedger | None = None,
) -> AEOutcome:
    eps = weighted_error(Dt, h, S)
    if mode == "exact":
        return AEOutcome(eps, "yes", 0, 0) if eps >= budget.tau else _no(budget)
    if mode == "synthetic":
        if eps < budget.yes_threshold:
            return _no(budget)
        d = budget.delta
        return AEOutcome(float(rng.uniform(eps / (1 + d), eps / (1 - d))), "yes", 0, 0)
    if mode == "adversarial-low":
        return adversarial_noise(Dt, h, S, budget, "low")
    if mode == "adversarial-high":
        return adversarial_noise(Dt, h, S, budget, "high")
    if mode == "qsim":
        return modified_amplitude_estimation(eps, budget, rng, ledger)
    raise ValueError(f"unknown oracle mode {mode!r}")
