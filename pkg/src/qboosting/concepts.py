"""Boolean concepts, training sets, decision-stump weak learners and VC tools.

Inputs are n-bit strings. Bit ``i`` (0-based here, 1-based in text files) is
the ``i``-th character from the left of the bitstring. Labels are always
in {-1, +1}.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class LearnerFailure(RuntimeError):
    """The weak learner could not produce a hypothesis (e.g. no usable samples)."""


class WeakLearningViolation(RuntimeError):
    """A learner returned a hypothesis without positive advantage."""


# ---------------------------------------------------------------------------
# Concepts and samplers


def int_to_bits(codes, n: int) -> np.ndarray:
    """Integer codes -> (len, n) 0/1 matrix, leftmost bit = most significant."""
    codes = np.asarray(codes, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((codes[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def bits_to_int(bits) -> np.ndarray:
    bits = np.atleast_2d(np.asarray(bits, dtype=np.int64))
    n = bits.shape[1]
    weights = 1 << np.arange(n - 1, -1, -1, dtype=np.int64)
    return bits @ weights


@dataclass(frozen=True)
class Concept:
    """A total Boolean function {0,1}^n -> {-1,+1} stored as a label table."""

    n: int
    table: np.ndarray = field(repr=False)
    name: str = "table"

    def __post_init__(self):
        table = np.asarray(self.table, dtype=np.int8)
        if table.shape != (1 << self.n,):
            raise ValueError(f"label table must have 2^{self.n} entries")
        if not np.all(np.abs(table) == 1):
            raise ValueError("labels must be -1 or +1")
        object.__setattr__(self, "table", table)

    def __call__(self, bits) -> np.ndarray:
        return self.table[bits_to_int(bits)]

    def label_codes(self, codes) -> np.ndarray:
        return self.table[np.asarray(codes, dtype=np.int64)]


def _from_rule(n: int, rule: Callable[[np.ndarray], np.ndarray], name: str) -> Concept:
    if n > 20:
        raise ValueError("label tables are limited to n <= 20")
    bits = int_to_bits(np.arange(1 << n), n)
    return Concept(n, rule(bits).astype(np.int8), name)


def majority(n: int) -> Concept:
    """Majority vote of the bits; n must be odd so there are no ties."""
    if n < 1 or n % 2 == 0:
        raise ValueError("majority needs an odd number of bits")
    return _from_rule(n, lambda b: np.where(2 * b.sum(axis=1) > n, 1, -1), f"maj{n}")


def dictator(n: int, i: int) -> Concept:
    return _from_rule(n, lambda b: np.where(b[:, i] == 1, 1, -1), f"dict{n}_{i}")


def constant(n: int, value: int = 1) -> Concept:
    if value not in (-1, 1):
        raise ValueError("constant value must be -1 or +1")
    return _from_rule(n, lambda b: np.full(len(b), value), f"const{n}{'+' if value > 0 else '-'}")


def parity(n: int) -> Concept:
    return _from_rule(n, lambda b: np.where(b.sum(axis=1) % 2 == 1, 1, -1), f"parity{n}")


def concept_by_name(name: str, n: int) -> Concept:
    """Resolve the named concepts understood by the experiment harness."""
    if name in ("maj", "majority"):
        return majority(n)
    if name == "parity":
        return parity(n)
    if name in ("const", "constant", "const+"):
        return constant(n, 1)
    if name == "const-":
        return constant(n, -1)
    if name.startswith("dict"):
        return dictator(n, int(name[4:] or 0))
    raise ValueError(f"unknown concept {name!r}")


@dataclass(frozen=True)
class Sampler:
    """A distribution over {0,1}^n given by a probability per integer code."""

    n: int
    probs: np.ndarray = field(repr=False)
    name: str = "table"

    @classmethod
    def uniform(cls, n: int) -> "Sampler":
        return cls(n, np.full(1 << n, 1.0 / (1 << n)), "uniform")

    @classmethod
    def biased(cls, n: int, p: float) -> "Sampler":
        """Independent bits, each equal to 1 with probability ``p``."""
        ones = int_to_bits(np.arange(1 << n), n).sum(axis=1)
        return cls(n, p ** ones * (1 - p) ** (n - ones), f"biased{p:g}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(1 << self.n, size=size, p=self.probs)


# ---------------------------------------------------------------------------
# Training sets


@dataclass
class TrainingSet:
    n: int
    X: np.ndarray  # (M, n) uint8 bits
    y: np.ndarray  # (M,) int8 labels
    sampler: Sampler | None = None
    concept: Concept | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.uint8).reshape(-1, self.n)
        self.y = np.asarray(self.y, dtype=np.int8)
        if len(self.X) == 0:
            raise ValueError("training set is empty")
        if len(self.X) != len(self.y):
            raise ValueError("points and labels differ in length")

    @property
    def M(self) -> int:
        return len(self.y)

    def to_text(self) -> str:
        lines = [f"n={self.n} M={self.M}"]
        for row, label in zip(self.X, self.y):
            lines.append(f"{''.join(map(str, row))} {int(label):+d}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TrainingSet":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        header = dict(tok.split("=") for tok in lines[0].split())
        n, m = int(header["n"]), int(header["M"])
        rows, labels = [], []
        for ln in lines[1:]:
            bits, label = ln.split()
            if len(bits) != n:
                raise ValueError(f"bitstring {bits!r} does not have {n} bits")
            rows.append([int(c) for c in bits])
            labels.append(int(label))
        if len(rows) != m:
            raise ValueError(f"header says M={m} but {len(rows)} points follow")
        return cls(n, np.array(rows, dtype=np.uint8), np.array(labels, dtype=np.int8))


def generate_training_set(
    concept: Concept,
    sampler: Sampler,
    M: int,
    rng: np.random.Generator,
    dedup: bool = True,
) -> TrainingSet:
    """Draw ``M`` labelled points from ``sampler``.

    With ``dedup`` (the canonical generator) draws repeat until ``M`` distinct
    points are collected, which are then stored in increasing code order.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    if concept.n != sampler.n:
        raise ValueError("concept and sampler bit-widths differ")
    if dedup:
        support = int(np.count_nonzero(sampler.probs))
        if M > support:
            raise ValueError(f"cannot draw {M} distinct points from a support of {support}")
        seen: dict[int, None] = {}
        while len(seen) < M:
            for code in sampler.sample(rng, 2 * (M - len(seen)) + 8):
                seen.setdefault(int(code), None)
                if len(seen) == M:
                    break
        codes = np.sort(np.fromiter(seen, dtype=np.int64))
    else:
        codes = sampler.sample(rng, M)
    return TrainingSet(concept.n, int_to_bits(codes, concept.n), concept.label_codes(codes), sampler, concept)


def full_domain(concept: Concept) -> TrainingSet:
    codes = np.arange(1 << concept.n)
    return TrainingSet(concept.n, int_to_bits(codes, concept.n), concept.table.copy(), Sampler.uniform(concept.n), concept)


# ---------------------------------------------------------------------------
# Hypotheses and weak learners


@dataclass(frozen=True)
class Hypothesis:
    """Decision stump on one bit, or a constant.

    ``stump(i, +1)`` predicts +1 exactly when bit ``i`` is 1; polarity -1 flips it.
    """

    kind: str
    feature: int = -1
    polarity: int = 1

    @classmethod
    def stump(cls, feature: int, polarity: int = 1) -> "Hypothesis":
        return cls("stump", feature, polarity)

    @classmethod
    def const(cls, value: int) -> "Hypothesis":
        return cls("const", -1, value)

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        if self.kind == "const":
            return np.full(len(X), self.polarity, dtype=np.int8)
        return (self.polarity * (2 * X[:, self.feature].astype(np.int8) - 1)).astype(np.int8)

    def __str__(self):
        if self.kind == "const":
            return f"const({self.polarity:+d})"
        return f"stump(x{self.feature + 1},{'+' if self.polarity > 0 else '-'})"


def candidate_hypotheses(n: int) -> list[Hypothesis]:
    """All 2n+2 candidates in tie-breaking order."""
    cands = [Hypothesis.stump(i, p) for i in range(n) for p in (1, -1)]
    return cands + [Hypothesis.const(1), Hypothesis.const(-1)]


def _candidate_mistakes(S: TrainingSet) -> np.ndarray:
    # (2n+2, M) boolean matrix, rows in candidate order
    bits = S.X.T.astype(bool)
    pos = bits != (S.y > 0)[None, :]
    rows = np.empty((2 * S.n + 2, S.M), dtype=bool)
    rows[0 : 2 * S.n : 2] = pos
    rows[1 : 2 * S.n : 2] = ~pos
    rows[-2] = S.y < 0
    rows[-1] = S.y > 0
    return rows


def best_stump(S: TrainingSet, D) -> tuple[Hypothesis, float]:
    """Exact minimiser of the weighted error over stumps and constants.

    ``D`` is renormalised internally; the returned error is relative to the
    normalised weights. Ties go to the earliest candidate in
    :func:`candidate_hypotheses` order.
    """
    D = np.asarray(D, dtype=float)
    if D.shape != (S.M,):
        raise ValueError("weight vector length does not match the training set")
    total = math.fsum(D)
    if np.any(D < 0) or total <= 0:
        raise ValueError("weights must be nonnegative with positive mass")
    errs = _candidate_mistakes(S).astype(float) @ (D / total)
    best = int(np.flatnonzero(errs <= errs.min() + 1e-14)[0])
    h = candidate_hypotheses(S.n)[best]
    return h, min(max(float(errs[best]), 0.0), 1.0)


def sample_based_stump(
    S: TrainingSet,
    state,
    Q: int,
    rng: np.random.Generator,
    max_draws: int | None = None,
) -> Hypothesis:
    """Fit a stump to ``Q`` measurement samples of a quantum example state.

    ``state`` must provide ``sample(rng, size)`` returning point indices, with
    -1 meaning the residual component was observed. Residual hits are thrown
    away; with ``max_draws > Q`` further copies are measured until ``Q``
    points are kept or the draw budget is spent.
    """
    if Q < 1:
        raise ValueError("Q must be at least 1")
    max_draws = Q if max_draws is None else max(max_draws, Q)
    kept: list[np.ndarray] = []
    n_kept = drawn = 0
    while n_kept < Q and drawn < max_draws:
        batch = min(Q - n_kept, max_draws - drawn)
        idx = state.sample(rng, batch)
        drawn += batch
        idx = idx[idx >= 0]
        kept.append(idx)
        n_kept += len(idx)
    idx = np.concatenate(kept) if kept else np.empty(0, dtype=np.int64)
    if len(idx) == 0:
        raise LearnerFailure("every measured copy landed in the residual component")
    counts = np.bincount(idx, minlength=S.M).astype(float)
    h, _ = best_stump(S, counts)
    return h


@dataclass(frozen=True)
class WeakLearnerSpec:
    mode: str = "distribution"  # or "sample"
    Q: int = 4
    gamma_floor: float = 0.25

    def __post_init__(self):
        if self.mode not in ("distribution", "sample"):
            raise ValueError(f"unknown learner mode {self.mode!r}")
        if not 0 < self.gamma_floor < 0.5:
            raise ValueError("gamma_floor must lie in (0, 1/2)")
        if self.Q < 1:
            raise ValueError("Q must be at least 1")


# ---------------------------------------------------------------------------
# VC dimension and sample size


MAX_VC_DOMAIN = 24


def vc_dimension_bruteforce(concepts: Sequence, domain) -> int:
    """Largest k such that some k-subset of ``domain`` is shattered.

    ``concepts`` are callables mapping an (m, n) bit matrix to labels.
    """
    domain = np.atleast_2d(np.asarray(domain, dtype=np.uint8))
    if len(domain) > MAX_VC_DOMAIN:
        raise ValueError(f"exhaustive search is limited to {MAX_VC_DOMAIN} domain points")
    if len(concepts) == 0:
        raise ValueError("concept class is empty")
    labels = np.array([np.asarray(c(domain)) > 0 for c in concepts], dtype=np.uint8)
    # Shattering is hereditary, so stop at the first size with no shattered set.
    best = 0
    for k in range(1, len(domain) + 1):
        if (1 << k) > len(concepts):
            break
        weights = 1 << np.arange(k, dtype=np.int64)
        if not any(
            len(np.unique(labels[:, list(sub)] @ weights)) == (1 << k)
            for sub in itertools.combinations(range(len(domain)), k)
        ):
            break
        best = k
    return best


def sample_size(vc: int, gamma: float, eta: float) -> int:
    """Training-set size ceil((vc/g^2) ln(vc/g^2) / eta^2), at least 1."""
    if vc < 1:
        raise ValueError("vc must be at least 1")
    if not 0 < gamma < 0.5:
        raise ValueError("gamma must lie in (0, 1/2)")
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    ratio = vc / gamma**2
    return max(1, math.ceil(ratio * math.log(ratio) / eta**2))
