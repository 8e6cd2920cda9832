"""Exact simulation of amplitude estimation and quantum example states.

Everything here works in the two-dimensional subspace spanned by the "good"
and "bad" components of the state, so only the scalar amplitude matters.
Phase estimation is sampled from its closed-form outcome distribution;
no state vectors are built.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom

RESIDUAL = -1

# Probability that phase estimation lands on one of the two nearest grid points.
PE_SUCCESS = 8 / math.pi**2

_FULL_TABLE_MAX_BITS = 14
_WINDOW = 2048
_SNAP = 1e-12  # phases this close to a grid point are treated as exact


# ---------------------------------------------------------------------------
# Bookkeeping


@dataclass
class QueryLedger:
    """Per-round counts of simulated oracle invocations."""

    rounds: list[dict[str, int]] = field(default_factory=list)

    def start_round(self) -> None:
        self.rounds.append({})

    def charge(self, kind: str, count: int) -> None:
        if count < 0:
            raise ValueError("query counts cannot be negative")
        if not self.rounds:
            self.start_round()
        cur = self.rounds[-1]
        cur[kind] = cur.get(kind, 0) + int(count)

    def round_total(self, i: int = -1) -> int:
        return sum(self.rounds[i].values()) if self.rounds else 0

    @property
    def totals(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for r in self.rounds:
            for k, v in r.items():
                out[k] = out.get(k, 0) + v
        return out

    @property
    def total(self) -> int:
        return sum(self.totals.values())

    def to_dict(self) -> dict:
        return {"rounds": [dict(r) for r in self.rounds], "totals": self.totals, "total": self.total}


@dataclass(frozen=True)
class NoiseBudget:
    """Scalars shared by the estimation loop and the distribution updates.

    ``delta`` defaults to tau/10 with tau = 1/(Q T^2); ``delta_override``
    exists for degenerate-noise experiments (e.g. delta = 0).
    """

    Q: int
    T: int
    M: int
    delta_override: float | None = None

    def __post_init__(self):
        if self.Q < 1 or self.T < 1 or self.M < 1:
            raise ValueError("Q, T and M must all be positive")
        if self.delta_override is not None and self.delta_override < 0:
            raise ValueError("delta must be nonnegative")

    @property
    def qt2(self) -> int:
        return self.Q * self.T**2

    @property
    def tau(self) -> float:
        return 1.0 / self.qt2

    @property
    def delta(self) -> float:
        if self.delta_override is not None:
            return self.delta_override
        return self.tau / 10

    @property
    def yes_threshold(self) -> float:
        """Smallest weighted error a 'yes' answer can certify: (1-2 delta)/(64 Q T^2)."""
        return (1 - 2 * self.delta) / (64 * self.qt2)

    def _need_delta(self) -> float:
        if self.delta <= 0:
            raise ValueError("the estimation loop needs delta > 0")
        return self.delta

    @property
    def j_init(self) -> int:
        return math.ceil(2 * math.pi * math.sqrt(self.M) / self._need_delta())

    @property
    def j_max(self) -> int:
        d = self._need_delta()
        return math.ceil(
            16 * math.sqrt(2) * math.pi * math.sqrt(self.M) / d
            * math.sqrt(self.qt2) * math.log2(self.M * self.T / d)
        )

    @property
    def n_passes(self) -> int:
        """Number of J values in the doubling schedule that do not exceed J_max."""
        return int(math.floor(math.log2(self.j_max / self.j_init))) + 1

    @property
    def repetitions(self) -> int:
        return default_repetitions(self)

    @property
    def no_round_budget(self) -> int:
        """Largest number of 'no' rounds the training-error analysis allows."""
        return max(0, math.floor(self.T / math.log(2 * math.sqrt(self.Q) * self.T) - 1))


def default_repetitions(budget: NoiseBudget, max_reps: int = 199) -> int:
    """Odd count R so a median of R estimates fails with prob <= delta/(T * passes)."""
    target = budget._need_delta() / (budget.T * budget.n_passes)
    for r in range(1, max_reps + 1, 2):
        if binom.sf(r // 2, r, 1 - PE_SUCCESS) <= target:
            return r
    return max_reps


# ---------------------------------------------------------------------------
# Phase and amplitude estimation


def pe_distribution(theta: float, n_anc: int) -> np.ndarray:
    """Outcome probabilities of phase estimation on eigenphase 2*theta."""
    if not 1 <= n_anc <= 30:
        raise ValueError("n_anc must lie in [1, 30]")
    N = 1 << n_anc
    x = N * theta / math.pi
    f = x - math.floor(x)
    d = (x - np.arange(N)) % N
    if min(f, 1 - f) < _SNAP:
        probs = np.zeros(N)
        probs[int(round(x)) % N] = 1.0
        return probs
    probs = math.sin(math.pi * f) ** 2 / (N**2 * np.sin(math.pi * d / N) ** 2)
    return probs / probs.sum()


def _window_probs(f: float, N: int, k: np.ndarray) -> np.ndarray:
    return math.sin(math.pi * f) ** 2 / (N**2 * np.sin(math.pi * (f - k) / N) ** 2)


def sample_pe(theta: float, n_anc: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw phase-estimation outcomes without building the 2^n_anc table.

    Up to 2^14 outcomes the exact table is used. Above that, offsets within
    2048 bins of the peak are drawn exactly and the remaining tail (mass
    below 1e-4) from its 1/k^2 asymptote, which is accurate to O(1/2048)
    relative error inside the tail.
    """
    N = 1 << n_anc
    if n_anc <= _FULL_TABLE_MAX_BITS:
        return rng.choice(N, size=size, p=pe_distribution(theta, n_anc))
    x = N * theta / math.pi
    b = math.floor(x)
    f = x - b
    if min(f, 1 - f) < _SNAP:
        return np.full(size, round(x) % N, dtype=np.int64)
    k = np.arange(-_WINDOW, _WINDOW + 1)
    p = _window_probs(f, N, k)
    tail = max(0.0, 1.0 - p.sum())
    p_all = np.append(p, tail)
    draws = rng.choice(len(p_all), size=size, p=p_all / p_all.sum())
    offsets = k[np.minimum(draws, len(k) - 1)].astype(np.int64)
    n_tail = int(np.count_nonzero(draws == len(k)))
    if n_tail:
        lo_r, lo_l = _WINDOW + 0.5 - f, _WINDOW + 0.5 + f
        hi = N / 2
        right = rng.random(n_tail) < (1 / lo_r - 1 / hi) / ((1 / lo_r - 1 / hi) + (1 / lo_l - 1 / hi))
        lo = np.where(right, lo_r, lo_l)
        u = rng.random(n_tail)
        mag = 1.0 / (1.0 / lo - u * (1.0 / lo - 1.0 / hi))
        tail_off = np.where(right, np.rint(mag + f), -np.rint(mag - f)).astype(np.int64)
        offsets[draws == len(k)] = tail_off
    return (b + offsets) % N


def ancillas_for(J: int) -> int:
    return max(1, math.ceil(math.log2(J)))


def amplitude_estimate(
    a: float,
    J: int,
    rng: np.random.Generator,
    ledger: QueryLedger | None = None,
    size: int | None = None,
):
    """Estimate ``a`` by phase estimation with ceil(log2 J) ancillas.

    Each estimate is charged ``J`` queries. Returns a float, or an array when
    ``size`` is given.
    """
    if J < 1:
        raise ValueError("J must be at least 1")
    if not 0.0 <= a <= 1.0:
        raise ValueError("a must lie in [0, 1]")
    n_anc = ancillas_for(J)
    count = 1 if size is None else size
    y = sample_pe(math.asin(math.sqrt(a)), n_anc, rng, count)
    est = np.sin(math.pi * y / (1 << n_anc)) ** 2
    if ledger is not None:
        ledger.charge("estimation", J * count)
    return float(est[0]) if size is None else est


def ae_accuracy_bound(a: float, J: int) -> float:
    """Additive accuracy 2 pi sqrt(a(1-a))/J + pi^2/J^2 of a J-query estimate."""
    return 2 * math.pi * math.sqrt(a * (1 - a)) / J + math.pi**2 / J**2


@dataclass(frozen=True)
class AEOutcome:
    estimate: float
    branch: str  # "yes" or "no"
    queries_used: int
    J_final: int
    passes: int = 0
    repetitions: int = 1


def modified_amplitude_estimation(
    eps_tilde: float,
    budget: NoiseBudget,
    rng: np.random.Generator,
    ledger: QueryLedger | None = None,
    repetitions: int | None = None,
) -> AEOutcome:
    """Doubling-J estimation of eps_tilde with a yes/no verdict.

    Each pass takes the median of ``repetitions`` independent J-query
    estimates of eps_tilde/M, then checks
    2 sqrt2 pi sqrt((1-delta) e')/(J sqrt M) + pi^2/J^2 <= delta e'/M.
    The loop stops at J_max or when the next pass would push the total
    spend past 2 J_max, and then answers (1/(Q T^2), no).
    """
    if not 0.0 <= eps_tilde <= 1.0:
        raise ValueError("eps_tilde must lie in [0, 1]")
    M, delta = budget.M, budget._need_delta()
    reps = budget.repetitions if repetitions is None else repetitions
    if reps < 1 or reps % 2 == 0:
        raise ValueError("repetitions must be a positive odd number")
    a = eps_tilde / M
    cap = 2 * budget.j_max
    J, spent, passes = budget.j_init, 0, 0
    last_J = J
    while J <= budget.j_max and spent + reps * J <= cap:
        est = amplitude_estimate(a, J, rng, ledger, size=reps)
        eps_p = M * float(np.median(est))
        spent += reps * J
        passes += 1
        last_J = J
        lhs = 2 * math.sqrt(2) * math.pi * math.sqrt((1 - delta) * eps_p) / (J * math.sqrt(M)) + math.pi**2 / J**2
        if lhs <= delta * eps_p / M:
            return AEOutcome(eps_p, "yes", spent, J, passes, reps)
        J *= 2
    return AEOutcome(budget.tau, "no", spent, last_J, passes, reps)


def contract_holds(outcome: AEOutcome, eps_tilde: float, budget: NoiseBudget) -> bool:
    """Accuracy promise of the estimator: multiplicative on yes, tau-additive on no."""
    gap = abs(eps_tilde - outcome.estimate)
    if outcome.branch == "yes":
        return gap <= budget.delta * outcome.estimate * (1 + 1e-12)
    return gap <= budget.tau * (1 + 1e-12)


# ---------------------------------------------------------------------------
# Quantum example states


@dataclass
class QuantumExampleState:
    """sum_x sqrt(w_x)|x, c(x)> plus an orthogonal residual of squared norm 1 - sum w."""

    weights: np.ndarray
    residual_norm: float
    provenance: int = 0

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        p = np.append(self.weights, self.residual_norm)
        idx = rng.choice(len(p), size=size, p=p / p.sum())
        idx[idx == len(self.weights)] = RESIDUAL
        return idx


def amplification_iterations(weights) -> int:
    M = len(weights)
    return math.ceil(math.sqrt(M / max(math.fsum(weights), 0.5)))


def make_example_state(weights, ledger: QueryLedger | None = None, provenance: int = 0) -> QuantumExampleState:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or np.any(w < 0):
        raise ValueError("weights must be a nonnegative vector")
    total = math.fsum(w)
    if total > 1 + 1e-12:
        raise ValueError(f"weights sum to {total!r} > 1")
    if total == 0:
        raise ValueError("all-zero weights do not define a state")
    if ledger is not None:
        ledger.charge("amplification", amplification_iterations(w))
    return QuantumExampleState(w.copy(), max(0.0, 1.0 - total), provenance)


def measure_example(state: QuantumExampleState, rng: np.random.Generator) -> int:
    """Index of the observed training point, or RESIDUAL."""
    return int(state.sample(rng, 1)[0])


def fidelity(subnorm, truth) -> float:
    """Overlap sum_x sqrt(subnorm_x * truth_x)."""
    a = np.asarray(subnorm, dtype=float)
    b = np.asarray(truth, dtype=float)
    if a.shape != b.shape:
        raise ValueError("weight vectors differ in length")
    return math.fsum(np.sqrt(a * b))
