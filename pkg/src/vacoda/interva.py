"""Deterministic cause assignment by prior-weighted symptom propensities.

For each death the method multiplies the prior cause fraction by the
conditional probability of every symptom *present* in the report, then
normalizes across causes. Absent symptoms contribute nothing. Population
fractions are the per-cause means of the normalized rows.

All products are carried in log space: propensities are products of many
small probabilities and underflow in direct arithmetic; the log form is
algebraically identical wherever the direct form is representable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    CondProbMatrix,
    Csmf,
    DimensionError,
    SymptomMatrix,
    UndefinedDeathError,
    masked_log_dot,
    pair_cause_names,
    pair_symptom_names,
)


@dataclass(frozen=True)
class IntervaResult:
    """Per-death normalized cause probabilities plus their aggregate.

    Rows of deaths flagged in propensity_underflow_flags are NaN: every
    cause had zero propensity (some present symptom is graded impossible
    under every cause), so no distribution exists for them. Flagged deaths
    are excluded from the fraction aggregate.
    """

    per_death_probs: np.ndarray          # (n_deaths, n_causes)
    csmf: Csmf
    propensity_underflow_flags: np.ndarray  # (n_deaths,) bool
    death_ids: tuple[str, ...]
    cause_names: tuple[str, ...]
    missing_counts: np.ndarray           # (n_deaths,) int

    @property
    def n_excluded(self) -> int:
        return int(self.propensity_underflow_flags.sum())

    @property
    def excluded_death_ids(self) -> tuple[str, ...]:
        return tuple(
            d for d, f in zip(self.death_ids, self.propensity_underflow_flags) if f
        )


def interva_propensities(
    s_j: np.ndarray, p: CondProbMatrix, f_prime: Csmf
) -> np.ndarray:
    """Log-scale cause scores for a single death.

    Returns log f'_n plus the sum of log Pr(symptom | cause) over the
    symptoms present in s_j. A present symptom with zero conditional
    probability yields -inf for that cause. Absent and missing symptoms
    do not contribute.
    """
    s_j = np.asarray(s_j, dtype=float)
    if s_j.ndim != 1 or s_j.shape[0] != p.n_symptoms:
        raise DimensionError(
            f"symptom row has length {s_j.shape}, matrix has {p.n_symptoms} symptoms"
        )
    pair_cause_names(f_prime, p)
    present = (s_j == 1.0).astype(float)[None, :]   # NaN compares False
    with np.errstate(divide="ignore"):
        log_p = np.log(p.entries)
        log_prior = np.log(f_prime.fractions)
    return log_prior + masked_log_dot(present, log_p)[0]


def interva_normalize(log_propensities: np.ndarray) -> np.ndarray:
    """Exp-normalize log scores into probabilities summing to one.

    Uses max subtraction for stability. Input that is -inf everywhere
    means the death is incompatible with every cause and is an error for
    the caller to record.
    """
    lp = np.asarray(log_propensities, dtype=float)
    m = lp.max()
    if np.isneginf(m):
        raise UndefinedDeathError("death is incompatible with every cause")
    w = np.exp(lp - m)
    return w / w.sum()


def run_interva(
    s: SymptomMatrix, p: CondProbMatrix, f_prime: Csmf | None = None
) -> IntervaResult:
    """Assign causes to every death and aggregate population fractions.

    f_prime defaults to the uniform distribution. Deaths incompatible with
    every cause are flagged and excluded from the aggregate rather than
    aborting the batch; their probability rows are NaN.
    """
    pair_symptom_names(s, p)
    if f_prime is None:
        f_prime = Csmf.uniform(p.cause_names)
    pair_cause_names(f_prime, p)

    present = (s.entries == 1.0).astype(float)       # (J, K)
    with np.errstate(divide="ignore"):
        log_p = np.log(p.entries)
        log_prior = np.log(f_prime.fractions)
    log_prop = log_prior[None, :] + masked_log_dot(present, log_p)

    row_max = log_prop.max(axis=1)
    flags = np.isneginf(row_max)
    probs = np.full_like(log_prop, np.nan)
    included = ~flags
    if included.any():
        shifted = log_prop[included] - row_max[included, None]
        w = np.exp(shifted)
        probs[included] = w / w.sum(axis=1, keepdims=True)
    else:
        raise UndefinedDeathError("every death is incompatible with every cause")

    fractions = probs[included].mean(axis=0)
    fractions = fractions / fractions.sum()
    return IntervaResult(
        per_death_probs=probs,
        csmf=Csmf(fractions, p.cause_names),
        propensity_underflow_flags=flags,
        death_ids=s.death_ids,
        cause_names=p.cause_names,
        missing_counts=s.missing_counts,
    )
