"""Verbal-autopsy cause-of-death assignment and comparison toolkit."""

from .core import (
    CondProbMatrix,
    ConstraintSet,
    Csmf,
    LessEq,
    SumEquals,
    SymptomMatrix,
    VacodaError,
    decode_letter,
    load_cond_prob_matrix,
    load_csmf,
    load_symptom_matrix,
    validate_cond_prob_matrix,
)
from .insilico import (
    GibbsConfig,
    PosteriorChain,
    PosteriorSummary,
    exact_posterior_oracle,
    run_gibbs,
    single_death_assign,
    summarize,
)
from .interva import IntervaResult, run_interva
from .simgen import ScenarioConfig, SimulatedDataset, make_scenario
from .evaluate import ComparisonSummary, ReplicateResult, run_comparison

__version__ = "0.1.0"

__all__ = [
    "CondProbMatrix",
    "ConstraintSet",
    "Csmf",
    "LessEq",
    "SumEquals",
    "SymptomMatrix",
    "VacodaError",
    "decode_letter",
    "load_cond_prob_matrix",
    "load_csmf",
    "load_symptom_matrix",
    "validate_cond_prob_matrix",
    "GibbsConfig",
    "PosteriorChain",
    "PosteriorSummary",
    "exact_posterior_oracle",
    "run_gibbs",
    "single_death_assign",
    "summarize",
    "IntervaResult",
    "run_interva",
    "ScenarioConfig",
    "SimulatedDataset",
    "make_scenario",
    "ComparisonSummary",
    "ReplicateResult",
    "run_comparison",
    "__version__",
]
