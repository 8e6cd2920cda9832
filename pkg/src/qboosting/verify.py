"""Checkers that turn the boosting guarantees into pass/fail reports.

Every checker is a pure function of its inputs. Slack is reported as
``bound - measured`` in the claim's own units, so negative slack means failure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .boostcore import RoundRecord
from .qsim import (
    NoiseBudget,
    amplitude_estimate,
    contract_holds,
    ae_accuracy_bound,
    modified_amplitude_estimation,
)


@dataclass
class ClaimReport:
    claim: str
    passed: list[bool]
    worst_slack: float
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.passed)

    @property
    def failures(self) -> int:
        return self.passed.count(False)

    def to_dict(self) -> dict:
        return {
            "claim": self.claim,
            "ok": self.ok,
            "checked": len(self.passed),
            "failures": self.failures,
            "worst_slack": self.worst_slack,
            "details": self.details,
        }


def _report(claim: str, slacks: Sequence[float], details: dict | None = None) -> ClaimReport:
    slacks = list(slacks)
    return ClaimReport(claim, [s >= 0 for s in slacks], min(slacks) if slacks else math.inf, details or {})


def bernoulli_ceiling(p0: float, n: int, sigmas: float = 3.0) -> float:
    """p0 plus a normal-approximation margin of ``sigmas`` standard errors."""
    return p0 + sigmas * math.sqrt(p0 * (1 - p0) / n)


def bernoulli_floor(p0: float, n: int, sigmas: float = 3.0) -> float:
    return p0 - sigmas * math.sqrt(p0 * (1 - p0) / n)


# ---------------------------------------------------------------------------
# Per-round claims


def check_subnormalization(records: Iterable[RoundRecord], delta: float) -> ClaimReport:
    lo, hi = 1 - 30 * delta, 1 + 1e-12
    sums = [r.sum_Dtilde for r in records]
    return _report("C4.3", [min(s - lo, hi - s) for s in sums],
                   {"min_sum": min(sums, default=math.nan), "window": [lo, hi]})


def check_eps_gap(records: Iterable[RoundRecord], delta: float) -> ClaimReport:
    """Gap between the sub-normalised and the shadow weighted error, against 50 delta.

    The details also say whether the sharper 4 delta held on 'yes' rounds.
    """
    records = list(records)
    gaps = [abs(r.eps_tilde - r.eps_true) for r in records]
    yes_gaps = [g for g, r in zip(gaps, records) if r.branch != "no"]
    no_gaps = [g for g, r in zip(gaps, records) if r.branch == "no"]
    details = {
        "max_gap": max(gaps, default=0.0),
        "max_gap_over_delta": max(gaps, default=0.0) / delta if delta else math.nan,
        "max_yes_gap": max(yes_gaps, default=0.0),
        "max_no_gap": max(no_gaps, default=0.0),
        "yes_within_4delta": all(g <= 4 * delta for g in yes_gaps),
    }
    return _report("C4.4", [50 * delta - g for g in gaps], details)


def check_fidelity(records: Iterable[RoundRecord], budget: NoiseBudget) -> ClaimReport:
    """Per-branch overlap floors: 1 - 2 delta on 'yes' rounds, 1 - 3/(2 Q T^2) on 'no'.

    ``details['floor_50delta_ok']`` adds the residual-inclusive floor
    overlap - (1 - sum) >= 1 - 50 delta.
    """
    records = list(records)
    d, tau = budget.delta, budget.tau
    slacks, floor = [], []
    for r in records:
        need = 1 - 1.5 * tau if r.branch == "no" else 1 - 2 * d
        slacks.append(r.fidelity - need)
        floor.append(r.fidelity - (1 - r.sum_Dtilde) - (1 - 50 * d))
    yes_def = [1 - r.fidelity for r in records if r.branch != "no"]
    no_def = [1 - r.fidelity for r in records if r.branch == "no"]
    details = {
        "floor_50delta_ok": all(f >= 0 for f in floor),
        "worst_floor_slack": min(floor, default=math.inf),
        "max_yes_deficit_over_delta": max(yes_def, default=0.0) / d if d else math.nan,
        "max_no_deficit_over_tau": max(no_def, default=0.0) / tau,
        "yes_failures": sum(1 for s, r in zip(slacks, records) if s < 0 and r.branch != "no"),
        "no_failures": sum(1 for s, r in zip(slacks, records) if s < 0 and r.branch == "no"),
    }
    return _report("C4.5", slacks, details)


# ---------------------------------------------------------------------------
# Training-error bounds


def case1_bound(gamma: float, T: int, Q: int) -> float:
    """exp(-2 T gamma^2 + 16/(Q T)), the all-'yes' training-error bound."""
    return math.exp(-2 * T * gamma**2 + 16 / (Q * T))


def case2_bound(gamma: float, T: int, Q: int, ell: int) -> float:
    """exp(2 ell (ln(2 sqrt(Q) T) + gamma^2) - 2 T gamma^2 + 1), the bound with ``ell`` 'no' rounds."""
    return math.exp(2 * ell * (math.log(2 * math.sqrt(Q) * T) + gamma**2) - 2 * T * gamma**2 + 1)


def log_training_error_bound(records: Iterable[RoundRecord], budget: NoiseBudget) -> float:
    """ln of (Q T^2)^ell * prod_t Z'_t."""
    records = list(records)
    ell = sum(1 for r in records if r.branch == "no")
    return ell * math.log(budget.qt2) + math.fsum(math.log(r.Z) for r in records)


def convergence_trace(records: Sequence[RoundRecord], budget: NoiseBudget | None = None) -> list[tuple[int, float, float]]:
    """(round, training error, cumulative bound) after every round."""
    out, log_b, ell = [], 0.0, 0
    for r in records:
        if r.Z > 0:
            log_b += math.log(r.Z)
        else:
            log_b = -math.inf
        if r.branch == "no":
            ell += 1
        extra = ell * math.log(budget.qt2) if budget is not None else 0.0
        out.append((r.t, r.train_err, math.exp(min(log_b + extra, 700.0))))
    return out


def check_training_bound(records: Sequence[RoundRecord], budget: NoiseBudget, train_err: float) -> ClaimReport:
    """Measured training error against (Q T^2)^ell prod Z' (no lower-bound use)."""
    log_b = log_training_error_bound(records, budget)
    ell = sum(1 for r in records if r.branch == "no")
    bound = math.exp(min(log_b, 700.0))
    claim = "CaseI" if ell == 0 else "CaseII"
    return _report(claim, [bound - train_err], {"bound": bound, "ell": ell, "train_err": train_err})


def check_case1(records: Sequence[RoundRecord], budget: NoiseBudget, train_err: float) -> ClaimReport:
    """All-'yes' run: training error <= prod Z' <= exp(-2 T g^2 + 16/(QT)) with g the smallest true advantage."""
    if any(r.branch == "no" for r in records):
        raise ValueError("Case I applies to all-'yes' runs only")
    gamma = min(0.5 - r.eps_true for r in records)
    T = len(records)
    prod = math.exp(log_training_error_bound(records, budget))
    closed = case1_bound(gamma, T, budget.Q)
    return _report("CaseI", [prod - train_err, closed - prod],
                   {"gamma": gamma, "prod_Z": prod, "closed_form": closed, "zero_error": train_err == 0})


# ---------------------------------------------------------------------------
# Estimator harnesses


def contract_trial_harness(
    budget: NoiseBudget,
    eps_grid: Sequence[float],
    trials: int,
    rng: np.random.Generator,
) -> ClaimReport:
    """Contract-violation frequency of the doubling estimator over an error grid.

    A grid point passes when its violation frequency stays below
    10 delta/T + 3 sigma and every trial spent at most 2 J_max queries.
    """
    p0 = 10 * budget.delta / budget.T
    ceiling = bernoulli_ceiling(p0, trials)
    cap = 2 * budget.j_max
    slacks, rows = [], []
    for eps in eps_grid:
        viol = 0
        max_q = 0
        yes = 0
        min_yes = math.inf
        for _ in range(trials):
            out = modified_amplitude_estimation(eps, budget, rng)
            viol += not contract_holds(out, eps, budget)
            max_q = max(max_q, out.queries_used)
            if out.branch == "yes":
                yes += 1
                min_yes = min(min_yes, out.estimate)
        freq = viol / trials
        slacks.append(min(ceiling - freq, (cap - max_q) / cap))
        rows.append({
            "eps_tilde": eps, "violations": viol, "frequency": freq, "yes": yes,
            "max_queries": max_q, "min_yes_estimate": min_yes,
            "yes_floor_ok": min_yes >= (1 - budget.delta) / (64 * budget.qt2),
        })
    return _report("L4.2", slacks, {"ceiling": ceiling, "query_cap": cap, "grid": rows,
                                    "repetitions": budget.repetitions})


def accuracy_trial_harness(
    a_grid: Sequence[float],
    J_grid: Sequence[int],
    trials: int,
    rng: np.random.Generator,
    target: float = 2 / 3,
) -> ClaimReport:
    """Fraction of single estimates within the additive accuracy bound, per (a, J)."""
    slacks, rows = [], []
    for a in a_grid:
        for J in J_grid:
            est = amplitude_estimate(a, J, rng, size=trials)
            freq = float(np.mean(np.abs(est - a) <= ae_accuracy_bound(a, J)))
            slacks.append(freq - target)
            rows.append({"a": a, "J": J, "frequency": freq})
    return _report("Eq7", slacks, {"target": target, "grid": rows})
