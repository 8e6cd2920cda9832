"""Quantum boosting driver with approximate error estimates and a two-branch update.

The driver only sees the estimate e' and its yes/no verdict. The exact
weighted error is computed for the record and, in qsim mode, as the
simulated ground truth that the estimator measures.

The shadow ("true") distribution is rebuilt every round from the current
sub-normalised weights, not from the previous shadow:
D^{t+1} = D~^t * exp(-alpha' y h) / Z with the empirical Z. The per-round
gap and fidelity claims compare D~^{t+1} against this D^{t+1}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boostcore import (
    Ensemble,
    RoundRecord,
    alpha_from_eps,
    default_rounds,
    empirical_error,
    margins,
    uniform,
    vote_error,
    weighted_error,
    z_factor,
)
from .concepts import (
    LearnerFailure,
    TrainingSet,
    WeakLearnerSpec,
    WeakLearningViolation,
    best_stump,
    sample_based_stump,
)
from .estimators import MODES, estimate_error
from .qsim import (
    NoiseBudget,
    QueryLedger,
    QuantumExampleState,
    amplification_iterations,
    fidelity,
    make_example_state,
)


class AmplificationFailure(RuntimeError):
    """Amplitude amplification failed twice in a row within one round."""


def update_yes(Dt, h, S: TrainingSet, eps_prime: float, budget: NoiseBudget):
    """Multiplicative-estimate update. Returns (new weights, alpha', Z')."""
    if not 0.0 < eps_prime < 1.0:
        raise ValueError(f"eps' = {eps_prime!r} is outside (0, 1)")
    alpha = alpha_from_eps(eps_prime)
    z_prime = (1 + 2 * budget.delta) * z_factor(eps_prime)
    return np.asarray(Dt, float) * np.exp(-alpha * margins(h, S)) / z_prime, alpha, z_prime


def update_no(Dt, h, S: TrainingSet, budget: NoiseBudget):
    """Floored-estimate update with e' = tau = 1/(Q T^2). Returns (new weights, alpha', Z')."""
    qt2 = budget.qt2
    if qt2 <= 1:
        raise ValueError("the floored update needs Q*T^2 > 1")
    tau = 1.0 / qt2
    alpha = math.log(math.sqrt(qt2 - 1))
    z_prime = (1 + 2 * tau) * 2 * math.sqrt(qt2 - 1) / qt2
    right = margins(h, S) > 0
    factor = np.where(right, (2 - tau) * math.exp(-alpha), tau * math.exp(alpha))
    return np.asarray(Dt, float) * factor / z_prime, alpha, z_prime


def true_update(Dt, h, S: TrainingSet, alpha: float):
    """Exactly normalised reweighting of the sub-normalised weights. Returns (D, Z)."""
    unnorm = np.asarray(Dt, float) * np.exp(-alpha * margins(h, S))
    Z = math.fsum(unnorm)
    assert Z > 0, "normaliser vanished"
    return unnorm / Z, Z


@dataclass
class QBoostResult:
    ensemble: Ensemble
    records: list[RoundRecord]
    ledger: QueryLedger
    budget: NoiseBudget
    no_rounds: int = 0
    truncated: bool = False
    final_weights: np.ndarray | None = field(default=None, repr=False)

    @property
    def train_err(self) -> float:
        return self.records[-1].train_err if self.records else 1.0


def _prepare_state(Dt, t: int, budget: NoiseBudget, ledger: QueryLedger, rng, copies: int) -> QuantumExampleState:
    # Amplification fails with probability 1/(3T); one retry is allowed.
    m_bits = max(1, math.ceil(math.log2(budget.M)))
    for _ in range(2):
        state = make_example_state(Dt, ledger, provenance=t)
        ledger.charge("amplification", (copies - 1) * amplification_iterations(Dt))
        ledger.charge("qram", copies * m_bits)
        ledger.charge("hypothesis", (2 * copies + 1) * (t - 1))
        if rng.random() >= 1.0 / (3 * budget.T):
            return state
    raise AmplificationFailure(f"round {t}: amplitude amplification failed twice")


def run_quantum_boost(
    S: TrainingSet,
    learner: WeakLearnerSpec,
    T: int | None = None,
    Q: int | None = None,
    oracle_mode: str = "qsim",
    rng: np.random.Generator | None = None,
    delta: float | None = None,
) -> QBoostResult:
    """Boost with estimated weighted errors and the yes/no distribution updates.

    ``T`` defaults to ceil(ln M / gamma_floor^2); ``Q`` to the learner's copy
    count. Once the number of 'no' rounds exceeds the allowed budget the run
    stops and returns the ensemble of the 'no'-round hypotheses alone.
    """
    if oracle_mode not in MODES:
        raise ValueError(f"unknown oracle mode {oracle_mode!r}")
    rng = np.random.default_rng() if rng is None else rng
    Q = learner.Q if Q is None else Q
    T = default_rounds(S.M, learner.gamma_floor) if T is None else T
    if T < 1 or Q < 1:
        raise ValueError("T and Q must be at least 1")
    budget = NoiseBudget(Q, T, S.M, delta)
    ledger = QueryLedger()
    quantum = oracle_mode == "qsim" or learner.mode == "sample"

    Dt = uniform(S.M)
    D_true = uniform(S.M)
    ens, no_ens = Ensemble(), Ensemble()
    score = np.zeros(S.M)
    records: list[RoundRecord] = []
    truncated = False
    for t in range(1, T + 1):
        ledger.start_round()
        h = None
        for attempt in range(2):
            state = _prepare_state(Dt, t, budget, ledger, rng, Q) if quantum else None
            if learner.mode == "distribution":
                h = best_stump(S, Dt)[0]
                break
            try:
                h = sample_based_stump(S, state, Q, rng, max_draws=10 * Q)
                break
            except LearnerFailure:
                if attempt == 1:
                    raise
        eps_tilde = weighted_error(Dt, h, S)
        if eps_tilde >= 0.5 - 1e-12:
            raise WeakLearningViolation(
                f"round {t}: {h} has weighted error {eps_tilde:.6g} >= 1/2 under the current weights"
            )
        eps_true = weighted_error(D_true, h, S)
        outcome = estimate_error(oracle_mode, Dt, h, S, budget, rng, ledger)
        if outcome.branch == "yes":
            new, alpha, z_prime = update_yes(Dt, h, S, outcome.estimate, budget)
        else:
            new, alpha, z_prime = update_no(Dt, h, S, budget)
            no_ens.add(alpha, h)
        D_next, _ = true_update(Dt, h, S, alpha)
        ens.add(alpha, h)
        score += alpha * h.predict(S.X)
        records.append(RoundRecord(
            t=t,
            branch=outcome.branch,
            eps_tilde=eps_tilde,
            eps_prime=outcome.estimate,
            eps_true=eps_true,
            alpha_prime=alpha,
            Z=z_prime,
            sum_Dtilde=math.fsum(new),
            fidelity=fidelity(new, D_next),
            train_err=vote_error(score, S.y),
            queries=ledger.round_total(),
            hypothesis=h,
            dist=Dt,
        ))
        Dt, D_true = new, D_next
        if len(no_ens) > budget.no_round_budget:
            truncated = True
            ens = no_ens
            records[-1].train_err = empirical_error(ens, S)
            break
    return QBoostResult(ens, records, ledger, budget, len(no_ens), truncated, Dt)
