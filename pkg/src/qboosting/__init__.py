"""Boosting with approximate weighted-error estimates, plus a simulated quantum estimator."""
from .boostcore import Ensemble, RoundRecord, run_adaboost
from .concepts import (
    Concept,
    Hypothesis,
    LearnerFailure,
    Sampler,
    TrainingSet,
    WeakLearnerSpec,
    WeakLearningViolation,
    concept_by_name,
    generate_training_set,
)
from .qboost import QBoostResult, run_quantum_boost
from .qsim import NoiseBudget, QueryLedger, modified_amplitude_estimation

__all__ = [
    "Concept", "Ensemble", "Hypothesis", "LearnerFailure", "NoiseBudget", "QBoostResult",
    "QueryLedger", "RoundRecord", "Sampler", "TrainingSet", "WeakLearnerSpec",
    "WeakLearningViolation", "concept_by_name", "generate_training_set",
    "modified_amplitude_estimation", "run_adaboost", "run_quantum_boost",
]
__version__ = "0.1.0"
