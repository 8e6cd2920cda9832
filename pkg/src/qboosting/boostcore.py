"""Classical AdaBoost and the boosting arithmetic shared with the quantum driver."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields
from typing import Callable

import numpy as np

from .concepts import (
    Hypothesis,
    LearnerFailure,
    TrainingSet,
    WeakLearningViolation,
    best_stump,
)

DIST_TOL = 1e-12


class DegenerateError(ValueError):
    """Weighted error of exactly 0 or 1, for which the hypothesis weight is infinite."""


def check_weights(w, kind: str = "distribution") -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be a finite nonnegative vector")
    total = math.fsum(w)
    if kind == "distribution" and abs(total - 1.0) > DIST_TOL:
        raise ValueError(f"distribution sums to {total!r}")
    if kind == "subnormalized" and total > 1.0 + DIST_TOL:
        raise ValueError(f"sub-normalized weights sum to {total!r} > 1")
    return w


def uniform(M: int) -> np.ndarray:
    return np.full(M, 1.0 / M)


def weighted_error(D, h: Hypothesis, S: TrainingSet) -> float:
    """Total weight of the points ``h`` misclassifies (not renormalised)."""
    D = np.asarray(D, dtype=float)
    if D.shape != (S.M,):
        raise ValueError("weight vector length does not match the training set")
    return math.fsum(D[h.predict(S.X) != S.y])


def alpha_from_eps(eps: float) -> float:
    if not 0.0 < eps < 1.0:
        raise DegenerateError(f"weighted error {eps!r} gives an infinite weight")
    return 0.5 * math.log((1.0 - eps) / eps)


def z_factor(eps: float) -> float:
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    return 2.0 * math.sqrt(eps * (1.0 - eps))


def margins(h: Hypothesis, S: TrainingSet) -> np.ndarray:
    """y * h(x) per point, +1 where h is right and -1 where it is wrong."""
    return (S.y * h.predict(S.X)).astype(float)


def adaboost_update(D, h: Hypothesis, S: TrainingSet, alpha: float) -> tuple[np.ndarray, float]:
    """Reweight by exp(-alpha*y*h(x)) and renormalise. Returns (D', Z)."""
    D = check_weights(D, "distribution")
    unnorm = D * np.exp(-alpha * margins(h, S))
    Z = math.fsum(unnorm)
    assert Z > 0, "normaliser vanished"
    return unnorm / Z, Z


# ---------------------------------------------------------------------------
# Ensembles


@dataclass
class Ensemble:
    terms: list[tuple[float, Hypothesis]] = field(default_factory=list)

    def add(self, alpha: float, h: Hypothesis) -> None:
        if not math.isfinite(alpha):
            raise ValueError("ensemble weights must be finite")
        self.terms.append((float(alpha), h))

    def __len__(self):
        return len(self.terms)

    def score(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        total = np.zeros(len(X))
        for alpha, h in self.terms:
            total += alpha * h.predict(X)
        return total

    def predict(self, X) -> np.ndarray:
        """sign of the weighted vote; a zero vote counts as +1."""
        if not self.terms:
            raise ValueError("empty ensemble")
        return np.where(self.score(X) >= 0, 1, -1).astype(np.int8)

    def to_text(self) -> str:
        lines = []
        for alpha, h in self.terms:
            pol = "+" if h.polarity > 0 else "-"
            lines.append(f"alpha={alpha:.17g} kind={h.kind} i={h.feature} pol={pol}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str) -> "Ensemble":
        ens = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            kv = dict(re.findall(r"(\w+)=(\S+)", line))
            pol = 1 if kv["pol"] == "+" else -1
            if kv["kind"] == "const":
                h = Hypothesis.const(pol)
            else:
                h = Hypothesis.stump(int(kv["i"]), pol)
            ens.add(float(kv["alpha"]), h)
        return ens


def ensemble_predict(E: Ensemble, x) -> int:
    return int(E.predict(np.atleast_2d(x))[0])


def vote_error(score, y) -> float:
    """Misclassification rate of sign(score) with sign(0) = +1."""
    return float(np.mean(np.where(np.asarray(score) >= 0, 1, -1) != y))


def empirical_error(E: Ensemble, S: TrainingSet, D=None) -> float:
    """Unweighted misclassification rate, or its expectation under ``D``."""
    wrong = E.predict(S.X) != S.y
    if D is None:
        return float(np.mean(wrong))
    D = np.asarray(D, dtype=float)
    return math.fsum(D[wrong]) / math.fsum(D)


def exp_loss(E: Ensemble, S: TrainingSet) -> float:
    return float(np.mean(np.exp(-S.y * E.score(S.X))))


# ---------------------------------------------------------------------------
# Round audit trail


@dataclass
class RoundRecord:
    t: int
    branch: str
    eps_tilde: float
    eps_prime: float
    eps_true: float
    alpha_prime: float
    Z: float  # branch normaliser including its (1+2 delta) or (1+2 tau) factor
    sum_Dtilde: float
    fidelity: float
    train_err: float
    queries: int
    hypothesis: Hypothesis | None = None
    dist: np.ndarray | None = field(default=None, repr=False)  # weights used this round

    CSV_COLUMNS = (
        "t", "branch", "eps_tilde", "eps_prime", "eps_true", "alpha_prime",
        "Z", "sum_Dtilde", "fidelity", "train_err", "queries",
    )

    def csv_row(self) -> list[str]:
        out = []
        for name in self.CSV_COLUMNS:
            v = getattr(self, name)
            out.append(f"{v:.17g}" if isinstance(v, float) else str(v))
        return out


assert tuple(f.name for f in fields(RoundRecord))[:11] == RoundRecord.CSV_COLUMNS


# ---------------------------------------------------------------------------
# Classical AdaBoost

Learner = Callable[[TrainingSet, np.ndarray, np.random.Generator], Hypothesis]


def distribution_learner(S: TrainingSet, D: np.ndarray, rng: np.random.Generator) -> Hypothesis:
    return best_stump(S, D)[0]


def sampling_learner(Q: int, ledger=None) -> Learner:
    """Stump learner fed ``Q`` exact quantum-example measurements per round."""
    from .qsim import make_example_state

    def learn(S: TrainingSet, D: np.ndarray, rng: np.random.Generator) -> Hypothesis:
        from .concepts import sample_based_stump

        return sample_based_stump(S, make_example_state(D, ledger=ledger), Q, rng)

    return learn


def default_rounds(M: int, gamma: float, multiplier: float = 1.0) -> int:
    return max(1, math.ceil(multiplier * math.log(M) / gamma**2))


def run_adaboost(
    S: TrainingSet,
    learner: Learner,
    T: int,
    rng: np.random.Generator,
) -> tuple[Ensemble, list[RoundRecord]]:
    """Classical AdaBoost with distribution-weighted weak learners.

    A learner failure is retried once; a second consecutive failure aborts.
    A hypothesis with zero weighted error ends the run with weight ln(M*T).
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    D = uniform(S.M)
    ens = Ensemble()
    score = np.zeros(S.M)
    records: list[RoundRecord] = []
    for t in range(1, T + 1):
        try:
            h = learner(S, D, rng)
        except LearnerFailure:
            h = learner(S, D, rng)
        eps = weighted_error(D, h, S)
        if eps >= 0.5 - 1e-12:
            raise WeakLearningViolation(f"round {t}: {h} has weighted error {eps:.6g} >= 1/2")
        if eps == 0.0:
            alpha = math.log(S.M * T)
            ens.add(alpha, h)
            score += alpha * h.predict(S.X)
            records.append(RoundRecord(t, "exact", 0.0, 0.0, 0.0, alpha, 0.0, 1.0, 1.0,
                                       vote_error(score, S.y), 0, h, D))
            break
        alpha = alpha_from_eps(eps)
        D_next, Z = adaboost_update(D, h, S, alpha)
        ens.add(alpha, h)
        score += alpha * h.predict(S.X)
        records.append(RoundRecord(t, "exact", eps, eps, eps, alpha, Z, 1.0, 1.0,
                                   vote_error(score, S.y), 0, h, D))
        D = D_next
    return ens, records
