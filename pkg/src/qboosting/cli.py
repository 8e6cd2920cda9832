"""Experiment harness: runs seeds, writes round CSVs, a JSON summary and convergence data.

Exit codes: 0 ok, 2 bad configuration, 3 weak-learning violation, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .boostcore import RoundRecord, default_rounds, empirical_error
from .concepts import (
    LearnerFailure,
    Sampler,
    TrainingSet,
    WeakLearnerSpec,
    WeakLearningViolation,
    concept_by_name,
    generate_training_set,
)
from .estimators import MODES
from .qboost import AmplificationFailure, QBoostResult, run_quantum_boost
from . import verify

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_WEAK, EXIT_IO = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    concept: str = "maj"
    n: int = 3
    sampler: str = "uniform"
    M: int = 8
    T: str = "auto"
    Q: int = 4
    gamma_floor: float = 0.25
    oracle: str = "qsim"
    learner: str = "distribution"
    seeds: list[int] = field(default_factory=lambda: list(range(10)))
    out: str = "results"
    t_multiplier: float = 1.0
    verify: bool = True
    heldout: int = 1000
    delta: float | None = None

    def __post_init__(self):
        if self.oracle not in MODES:
            raise ConfigError(f"unknown oracle {self.oracle!r}; choose from {', '.join(MODES)}")
        if self.M < 1:
            raise ConfigError("M must be at least 1")
        if self.Q < 1:
            raise ConfigError("Q must be at least 1")
        if not self.seeds:
            raise ConfigError("no seeds given")
        try:
            self.learner_spec()
            self.make_sampler()
            concept_by_name(self.concept, self.n)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.T != "auto":
            try:
                if int(self.T) < 1:
                    raise ConfigError("T must be at least 1")
            except ValueError as exc:
                raise ConfigError(f"T must be an integer or 'auto', got {self.T!r}") from exc

    def learner_spec(self) -> WeakLearnerSpec:
        return WeakLearnerSpec(self.learner, self.Q, self.gamma_floor)

    def make_sampler(self) -> Sampler:
        if self.sampler == "uniform":
            return Sampler.uniform(self.n)
        if self.sampler.startswith("biased:"):
            return Sampler.biased(self.n, float(self.sampler.split(":", 1)[1]))
        raise ValueError(f"unknown sampler {self.sampler!r}")

    def rounds(self) -> int:
        if self.T == "auto":
            return default_rounds(self.M, self.gamma_floor, self.t_multiplier)
        return int(self.T)


def parse_seeds(text: str) -> list[int]:
    """``"50"`` means seeds 0..49; ``"1,5,9"`` is an explicit list."""
    text = text.strip()
    if "," in text:
        return [int(s) for s in text.split(",") if s.strip()]
    return list(range(int(text)))


def load_config(path: str | Path) -> ExperimentConfig:
    """Read a flat ``key = value`` file; a leading section header is optional."""
    text = Path(path).read_text()
    parser = configparser.ConfigParser()
    if not text.lstrip().startswith("["):
        text = "[experiment]\n" + text
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    raw = dict(parser[parser.sections()[0]])
    return config_from_mapping(raw)


def config_from_mapping(raw: dict) -> ExperimentConfig:
    conv = {
        "n": int, "M": int, "Q": int, "gamma_floor": float, "t_multiplier": float,
        "heldout": int, "delta": float, "seeds": parse_seeds,
        "verify": lambda v: str(v).lower() in ("on", "true", "1", "yes"),
        "T": str,
    }
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    kwargs = {}
    for key, value in raw.items():
        name = {"m": "M", "q": "Q", "t": "T"}.get(key, key.replace("-", "_"))
        if name not in known:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            kwargs[name] = conv.get(name, str)(value) if isinstance(value, str) else value
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return ExperimentConfig(**kwargs)


# ---------------------------------------------------------------------------


def _write_round_csv(path: Path, records: list[RoundRecord]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RoundRecord.CSV_COLUMNS)
        for r in records:
            w.writerow(r.csv_row())


def run_seed(cfg: ExperimentConfig, seed: int) -> tuple[TrainingSet, QBoostResult]:
    rng = np.random.default_rng(seed)
    S = generate_training_set(concept_by_name(cfg.concept, cfg.n), cfg.make_sampler(), cfg.M, rng)
    result = run_quantum_boost(S, cfg.learner_spec(), cfg.rounds(), cfg.Q, cfg.oracle, rng, cfg.delta)
    return S, result


def _seed_summary(cfg: ExperimentConfig, seed: int, S: TrainingSet, res: QBoostResult) -> dict:
    held_rng = np.random.default_rng([seed, 1])
    held = generate_training_set(S.concept, S.sampler, cfg.heldout, held_rng, dedup=False)
    out = {
        "seed": seed,
        "status": "ok",
        "rounds": len(res.records),
        "no_rounds": res.no_rounds,
        "truncated": res.truncated,
        "train_err": res.train_err,
        "heldout_err": empirical_error(res.ensemble, held),
        "ensemble": res.ensemble.to_text(),
        "ledger": res.ledger.to_dict(),
    }
    if cfg.verify:
        reports = [
            verify.check_subnormalization(res.records, res.budget.delta),
            verify.check_eps_gap(res.records, res.budget.delta),
            verify.check_fidelity(res.records, res.budget),
        ]
        if not res.truncated:
            reports.append(verify.check_training_bound(res.records, res.budget, res.train_err))
        out["claims"] = [r.to_dict() for r in reports]
    return out


def run_experiment(cfg: ExperimentConfig) -> tuple[int, dict]:
    """Run every seed and write artifacts under ``cfg.out``. Returns (exit code, status)."""
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        return EXIT_IO, {"status": "io-error", "message": str(exc)}

    seeds, conv_blocks = [], []
    for seed in cfg.seeds:
        try:
            S, res = run_seed(cfg, seed)
        except WeakLearningViolation as exc:
            return EXIT_WEAK, {"status": "weak-learning-violation", "seed": seed, "message": str(exc),
                               "hint": "decision stumps have no advantage on this concept (e.g. parity)"}
        except (AmplificationFailure, LearnerFailure) as exc:
            seeds.append({"seed": seed, "status": "failed", "message": str(exc), "train_err": 1.0})
            continue
        try:
            _write_round_csv(out / f"round_{seed}.csv", res.records)
        except OSError as exc:
            return EXIT_IO, {"status": "io-error", "message": str(exc)}
        seeds.append(_seed_summary(cfg, seed, S, res))
        conv_blocks.append((seed, verify.convergence_trace(res.records, res.budget)))

    errs = [s["train_err"] for s in seeds]
    summary = {
        "config": {k: v for k, v in cfg.__dict__.items()},
        "T": cfg.rounds(),
        "seeds": seeds,
        "aggregate": {
            "n_seeds": len(seeds),
            "frac_train_err_le_0.1": sum(e <= 0.1 for e in errs) / len(errs),
            "frac_train_err_zero": sum(e == 0 for e in errs) / len(errs),
            "mean_train_err": float(np.mean(errs)),
        },
    }
    try:
        (out / "summary.json").write_text(json.dumps(summary, indent=2, default=str) + "\n")
        with (out / "convergence.dat").open("w") as fh:
            fh.write("# seed round train_err bound\n")
            for i, (seed, rows) in enumerate(conv_blocks):
                if i:
                    fh.write("\n\n")
                for t, err, bound in rows:
                    fh.write(f"{seed} {t} {err:.17g} {bound:.17g}\n")
    except OSError as exc:
        return EXIT_IO, {"status": "io-error", "message": str(exc)}
    return EXIT_OK, {"status": "ok", "out": str(out), **summary["aggregate"]}


def compare_modes(cfg: ExperimentConfig, modes: list[str]) -> list[dict]:
    """Per-round trajectories of several oracle modes on shared seeds."""
    rows = []
    for mode in modes:
        mcfg = replace(cfg, oracle=mode)
        for seed in cfg.seeds:
            _, res = run_seed(mcfg, seed)
            cum_q = 0
            trace = verify.convergence_trace(res.records, res.budget)
            for r, (_, _, bound) in zip(res.records, trace):
                cum_q += r.queries
                rows.append({"mode": mode, "seed": seed, "t": r.t, "branch": r.branch, "Z": r.Z,
                             "cum_bound": bound, "train_err": r.train_err, "cum_queries": cum_q})
    return rows


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(prog="qboost", description=__doc__)
    p.add_argument("--config", help="flat key=value experiment file")
    p.add_argument("--oracle", choices=MODES)
    p.add_argument("--seeds", help="a count N (seeds 0..N-1) or a comma list")
    p.add_argument("--out", help="output directory")
    p.add_argument("--t-multiplier", type=float)
    p.add_argument("--verify", choices=("on", "off"))
    p.add_argument("--compare", help="comma list of oracle modes to compare")
    args = p.parse_args(argv)

    try:
        raw: dict = {}
        if args.config:
            base = load_config(args.config)
            raw = dict(base.__dict__)
        for key in ("oracle", "out", "t_multiplier"):
            if getattr(args, key) is not None:
                raw[key] = getattr(args, key)
        if args.seeds is not None:
            raw["seeds"] = parse_seeds(args.seeds)
        if args.verify is not None:
            raw["verify"] = args.verify == "on"
        cfg = ExperimentConfig(**raw)
    except (ConfigError, OSError, ValueError, TypeError) as exc:
        print(json.dumps({"status": "config-error", "message": str(exc)}))
        return EXIT_CONFIG

    if args.compare:
        modes = [m.strip() for m in args.compare.split(",")]
        bad = [m for m in modes if m not in MODES]
        if bad:
            print(json.dumps({"status": "config-error", "message": f"unknown modes {bad}"}))
            return EXIT_CONFIG
        try:
            rows = compare_modes(cfg, modes)
        except WeakLearningViolation as exc:
            print(json.dumps({"status": "weak-learning-violation", "message": str(exc)}))
            return EXIT_WEAK
        try:
            Path(cfg.out).mkdir(parents=True, exist_ok=True)
            with (Path(cfg.out) / "compare.csv").open("w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
                w.writeheader()
                w.writerows(rows)
        except OSError as exc:
            print(json.dumps({"status": "io-error", "message": str(exc)}))
            return EXIT_IO
        print(json.dumps({"status": "ok", "rows": len(rows), "out": cfg.out}))
        return EXIT_OK

    code, status = run_experiment(cfg)
    print(json.dumps(status))
    return code


if __name__ == "__main__":
    sys.exit(main())
