"""Synthetic dataset generation for method comparison studies.

A dataset is built in three steps: draw a conditional probability matrix
whose entries come from the fifteen grade values, draw a cause label for
every death from a chosen population distribution, then draw each
symptom as a Bernoulli under the death's cause column. Because the full
generating state is kept, both the population fractions and every
individual assignment are known exactly.

Three scenarios perturb this baseline:

  fair              methods see exactly the generating inputs;
  rescaled          the matrix is affinely compressed into a narrow range
                    before generating, and methods receive the compressed
                    matrix, probing sensitivity to the numeric scale;
  reporting_errors  generated symptoms are randomly flipped (present
                    dropped, absent inserted) before the methods see them.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    GRADE_VALUES,
    CondProbMatrix,
    Csmf,
    SymptomMatrix,
    ValidationError,
)

SCENARIOS = ("fair", "rescaled", "reporting_errors")

# Grade-frequency profile used when no matrix is supplied to estimate one
# from: mass on the mid grades (0.5 .. 0.05) plus a small "never" share.
# Uniform weights over all fifteen values make generated instances so
# separable at the default dimensions that presence-only scoring and the
# full Bernoulli model both assign every death correctly; this profile
# keeps the two methods measurably apart in all three scenarios.
DEFAULT_GRADE_WEIGHTS = np.array(
    [0.0, 0.0, 0.15, 0.20, 0.28, 0.28, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.09]
)

DEFAULT_RESCALE_RANGE = (0.25, 0.75)
DEFAULT_FALSE_NEGATIVE_RATE = 0.15
DEFAULT_FALSE_POSITIVE_RATE = 0.10


@dataclass(frozen=True)
class ScenarioConfig:
    """Dimensions, perturbation settings and seed for one dataset draw.

    true_csmf = None draws a fresh uniform-simplex population
    distribution for each dataset; supply a Csmf to pin it.
    """

    scenario: str = "fair"
    n_deaths: int = 800
    n_causes: int = 35
    n_symptoms: int = 150
    true_csmf: Csmf | None = None
    grade_weights: np.ndarray = field(
        default_factory=lambda: DEFAULT_GRADE_WEIGHTS.copy()
    )
    rescale_range: tuple[float, float] = DEFAULT_RESCALE_RANGE
    false_negative_rate: float = DEFAULT_FALSE_NEGATIVE_RATE
    false_positive_rate: float = DEFAULT_FALSE_POSITIVE_RATE
    seed: int = 0

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ValidationError(
                f"scenario must be one of {', '.join(SCENARIOS)}, got {self.scenario!r}"
            )
        if self.n_deaths < 1 or self.n_causes < 2 or self.n_symptoms < 1:
            raise ValidationError("need n_deaths >= 1, n_causes >= 2, n_symptoms >= 1")
        w = np.asarray(self.grade_weights, dtype=float)
        object.__setattr__(self, "grade_weights", w)
        if w.shape != (len(GRADE_VALUES),):
            raise ValidationError(
                f"grade_weights needs {len(GRADE_VALUES)} entries, got {w.shape}"
            )
        if (w < 0).any() or w.sum() <= 0:
            raise ValidationError("grade_weights must be non-negative and not all zero")
        lo, hi = self.rescale_range
        if not (0.0 < lo < hi < 1.0):
            raise ValidationError(
                f"rescale_range must satisfy 0 < lo < hi < 1, got ({lo}, {hi})"
            )
        for name in ("false_negative_rate", "false_positive_rate"):
            rate = getattr(self, name)
            if not (0.0 <= rate <= 1.0):
                raise ValidationError(f"{name} must lie in [0, 1], got {rate}")
        if self.true_csmf is not None and self.true_csmf.n_causes != self.n_causes:
            raise ValidationError(
                "true_csmf length does not match n_causes"
            )


@dataclass(frozen=True)
class SimulatedDataset:
    """One generated dataset with its full generating state.

    p_true is the raw grade-valued draw; p_given_to_methods is the matrix
    the methods receive, which is also the matrix the symptoms were
    generated from (rescaled under the rescaled scenario, identical to
    p_true otherwise). symptoms already include any injected reporting
    errors.
    """

    symptoms: SymptomMatrix
    true_causes: np.ndarray          # (n_deaths,) int
    true_csmf: Csmf
    p_true: CondProbMatrix
    p_given_to_methods: CondProbMatrix
    scenario: str


def cause_names(n: int) -> tuple[str, ...]:
    width = len(str(n))
    return tuple(f"cause{i + 1:0{width}d}" for i in range(n))


def symptom_names(k: int) -> tuple[str, ...]:
    width = len(str(k))
    return tuple(f"symptom{i + 1:0{width}d}" for i in range(k))


def death_ids(j: int) -> tuple[str, ...]:
    width = len(str(j))
    return tuple(f"death{i + 1:0{width}d}" for i in range(j))


def generate_p(
    n_symptoms: int,
    n_causes: int,
    grade_weights: np.ndarray,
    rng: np.random.Generator,
) -> CondProbMatrix:
    """Draw every entry independently from the fifteen grade values with
    the given categorical weights."""
    w = np.asarray(grade_weights, dtype=float)
    w = w / w.sum()
    idx = rng.choice(len(GRADE_VALUES), size=(n_symptoms, n_causes), p=w)
    entries = np.asarray(GRADE_VALUES, dtype=float)[idx]
    return CondProbMatrix(entries, symptom_names(n_symptoms), cause_names(n_causes))


def empirical_grade_weights(p: CondProbMatrix) -> np.ndarray:
    """Grade frequencies observed in a matrix, for distribution-matched draws.

    Every entry must be one of the fifteen grade values (a letter-coded
    matrix after decoding qualifies).
    """
    values = np.asarray(GRADE_VALUES, dtype=float)
    flat = p.entries.ravel()
    matches = flat[:, None] == values[None, :]
    if not matches.any(axis=1).all():
        bad = flat[~matches.any(axis=1)][0]
        raise ValidationError(
            f"matrix entry {bad!r} is not a grade value; cannot estimate "
            "grade frequencies from it"
        )
    counts = matches.sum(axis=0).astype(float)
    return counts / counts.sum()


def generate_deaths(
    n_deaths: int, true_csmf: Csmf, rng: np.random.Generator
) -> np.ndarray:
    """Draw independent cause labels from the population distribution."""
    return rng.choice(true_csmf.n_causes, size=n_deaths, p=true_csmf.fractions)


def generate_symptoms(
    causes: np.ndarray,
    p: CondProbMatrix,
    rng: np.random.Generator,
    ids: tuple[str, ...] | None = None,
) -> SymptomMatrix:
    """Draw each symptom as an independent Bernoulli under its death's cause."""
    causes = np.asarray(causes, dtype=int)
    if causes.size and (causes.min() < 0 or causes.max() >= p.n_causes):
        raise ValidationError("cause label out of range for the matrix")
    probs = p.entries.T[causes]                     # (J, K)
    entries = (rng.random(probs.shape) < probs).astype(float)
    if ids is None:
        ids = death_ids(causes.shape[0])
    return SymptomMatrix(entries, ids, p.symptom_names)


def rescale_p(
    p: CondProbMatrix, lo: float = 0.25, hi: float = 0.75
) -> CondProbMatrix:
    """Affinely map the observed entry range onto [lo, hi].

    The smallest entry maps to lo and the largest to hi, preserving the
    ordering of all entries. A constant matrix has no defined map.
    """
    if not lo < hi:
        raise ValidationError(f"need lo < hi, got ({lo}, {hi})")
    vmin, vmax = float(p.entries.min()), float(p.entries.max())
    if vmin == vmax:
        raise ValidationError("matrix is constant; the affine rescale is undefined")
    entries = lo + (p.entries - vmin) * (hi - lo) / (vmax - vmin)
    return CondProbMatrix(entries, p.symptom_names, p.cause_names)


def inject_reporting_errors(
    s: SymptomMatrix,
    fn_rate: float,
    fp_rate: float,
    rng: np.random.Generator,
) -> SymptomMatrix:
    """Randomly miscode cells: drop present symptoms at fn_rate, insert
    absent ones at fp_rate. Missing cells are untouched."""
    for name, rate in (("fn_rate", fn_rate), ("fp_rate", fp_rate)):
        if not (0.0 <= rate <= 1.0):
            raise ValidationError(f"{name} must lie in [0, 1], got {rate}")
    u = rng.random(s.entries.shape)
    entries = s.entries.copy()
    ones = s.entries == 1.0
    zeros = s.entries == 0.0
    entries[ones & (u < fn_rate)] = 0.0
    entries[zeros & (u < fp_rate)] = 1.0
    return SymptomMatrix(entries, s.death_ids, s.symptom_names)


def make_scenario(cfg: ScenarioConfig) -> SimulatedDataset:
    """Generate one dataset under the configured scenario.

    Deterministic given the config, seed included. The draw order is
    fixed: matrix, population fractions, cause labels, symptoms, then any
    error injection.
    """
    rng = np.random.default_rng(cfg.seed)
    p_true = generate_p(cfg.n_symptoms, cfg.n_causes, cfg.grade_weights, rng)

    if cfg.scenario == "rescaled":
        lo, hi = cfg.rescale_range
        p_given = rescale_p(p_true, lo, hi)
    else:
        p_given = p_true

    if cfg.true_csmf is not None:
        true_csmf = Csmf(cfg.true_csmf.fractions, p_true.cause_names)
    else:
        true_csmf = Csmf(rng.dirichlet(np.ones(cfg.n_causes)), p_true.cause_names)

    causes = generate_deaths(cfg.n_deaths, true_csmf, rng)
    symptoms = generate_symptoms(causes, p_given, rng)

    if cfg.scenario == "reporting_errors":
        symptoms = inject_reporting_errors(
            symptoms, cfg.false_negative_rate, cfg.false_positive_rate, rng
        )

    return SimulatedDataset(
        symptoms=symptoms,
        true_causes=causes,
        true_csmf=true_csmf,
        p_true=p_true,
        p_given_to_methods=p_given,
        scenario=cfg.scenario,
    )


def replicate_configs(cfg: ScenarioConfig, replicates: int) -> list[ScenarioConfig]:
    """Per-replicate configs with seeds derived from the master seed.

    Each replicate draws its own matrix and (unless pinned) its own
    population distribution.
    """
    children = np.random.SeedSequence(cfg.seed).spawn(replicates)
    return [
        replace(cfg, seed=int(child.generate_state(1)[0]))
        for child in children
    ]
