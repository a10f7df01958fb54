"""Bayesian cause assignment by Gibbs sampling over (fractions, labels).

The model: each death's cause label is a categorical draw from the
population fractions; given the cause, each symptom is an independent
Bernoulli with the elicited conditional probability; the fractions carry
a Dirichlet prior. The sampler alternates

  1. drawing a cause for every death from its posterior categorical
     weights given the current fractions, and
  2. drawing new fractions from the Dirichlet updated with the per-cause
     label counts (Dirichlet-multinomial conjugacy),

and retains thinned post-burn-in draws from several independently seeded
chains. Unlike the deterministic propensity method, the likelihood uses
both presence and absence of a symptom: a present symptom contributes p,
an absent one contributes 1 - p.

Extreme grades (exactly 0 or 1) make the complement term annihilate every
cause the moment a single report disagrees with an "always"/"never"
entry, so likelihood evaluation clamps probabilities into
[epsilon, 1 - epsilon]. The ingested matrix itself is never modified, and
epsilon = 0 gives the unclamped model for exact-oracle comparisons.

An exact enumeration oracle over all cause-label assignments is included
for testing the sampler on small instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln
from scipy.stats import norm

from .core import (
    AllZeroLikelihoodError,
    CondProbMatrix,
    Csmf,
    DimensionError,
    InstanceTooLargeError,
    SymptomMatrix,
    ValidationError,
    masked_log_dot,
    pair_cause_names,
    pair_symptom_names,
)

DEFAULT_EPSILON = 1e-7
PSRF_THRESHOLD = 1.1
ORACLE_GUARD = 1_000_000


# ---------------------------------------------------------------------------
# Configuration and result containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GibbsConfig:
    """Sampler settings.

    alpha is the Dirichlet concentration: a scalar is broadcast over all
    causes, or give one positive value per cause. f_init defaults to the
    prior mean alpha / sum(alpha). prob_clamp_epsilon bounds the
    conditional probabilities during likelihood evaluation only.
    """

    n_chains: int = 4
    n_iterations: int = 4000
    burn_in: int = 2000
    thin: int = 10
    alpha: float | np.ndarray = 1.0
    seed: int = 0
    f_init: Csmf | None = None
    prob_clamp_epsilon: float = DEFAULT_EPSILON

    def __post_init__(self) -> None:
        if self.n_chains < 1:
            raise ValidationError("need at least one chain")
        if self.burn_in < 0 or self.burn_in >= self.n_iterations:
            raise ValidationError(
                f"burn_in ({self.burn_in}) must be non-negative and smaller "
                f"than n_iterations ({self.n_iterations})"
            )
        if self.thin < 1:
            raise ValidationError("thin must be at least 1")
        a = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        if (a <= 0.0).any() or np.isnan(a).any():
            raise ValidationError("alpha entries must be strictly positive")
        eps = self.prob_clamp_epsilon
        if not (0.0 <= eps < 0.5):
            raise ValidationError("prob_clamp_epsilon must lie in [0, 0.5)")

    def resolve_alpha(self, n_causes: int) -> np.ndarray:
        a = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        if a.shape[0] == 1:
            return np.full(n_causes, float(a[0]))
        if a.shape[0] != n_causes:
            raise DimensionError(
                f"alpha has {a.shape[0]} entries for {n_causes} causes"
            )
        return a.copy()

    @property
    def n_retained(self) -> int:
        """Retained draws per chain."""
        return (self.n_iterations - self.burn_in) // self.thin


@dataclass(frozen=True)
class PosteriorChain:
    """Retained draws from one chain, plus the averaged categorical weights.

    rb_mean is the mean over retained iterations of the per-death
    categorical weight vectors that generated the label draws; it is the
    Rao-Blackwellized counterpart of the empirical label frequencies.
    """

    f_draws: np.ndarray     # (n_retained, n_causes)
    y_draws: np.ndarray     # (n_retained, n_deaths) int
    rb_mean: np.ndarray     # (n_deaths, n_causes)
    chain_id: int
    config: GibbsConfig
    cause_names: tuple[str, ...]
    death_ids: tuple[str, ...]

    @property
    def n_retained(self) -> int:
        return self.f_draws.shape[0]


@dataclass(frozen=True)
class PosteriorSummary:
    """Point estimates, credible intervals and convergence diagnostics.

    per_death_probs are empirical frequencies of the retained label draws;
    per_death_probs_rb averages the categorical weights over fraction
    draws instead. Diagnostics (psrf, converged) are None with fewer than
    two chains.
    """

    csmf_mean: Csmf
    csmf_intervals: np.ndarray       # (n_causes, 2)
    per_death_probs: np.ndarray      # (n_deaths, n_causes)
    per_death_intervals: np.ndarray  # (n_deaths, n_causes, 2)
    per_death_probs_rb: np.ndarray   # (n_deaths, n_causes)
    psrf: np.ndarray | None          # (n_causes,)
    converged: bool | None
    level: float
    n_retained_total: int
    cause_names: tuple[str, ...]
    death_ids: tuple[str, ...]


@dataclass(frozen=True)
class SingleDeathResult:
    """Cause weights for one death plus sampling-based uncertainty.

    frequencies/intervals are None when no draws were requested.
    """

    likelihoods: np.ndarray            # (n_causes,)
    frequencies: np.ndarray | None     # (n_causes,)
    intervals: np.ndarray | None       # (n_causes, 2)
    n_draws: int
    cause_names: tuple[str, ...]


@dataclass(frozen=True)
class OracleResult:
    """Exact posterior marginals from full enumeration of assignments."""

    csmf_mean: Csmf
    per_death_marginals: np.ndarray   # (n_deaths, n_causes)
    death_ids: tuple[str, ...]
    cause_names: tuple[str, ...]


# ---------------------------------------------------------------------------
# Likelihoods
# ---------------------------------------------------------------------------

def log_likelihood_matrix(
    s: SymptomMatrix, p: CondProbMatrix, epsilon: float = DEFAULT_EPSILON
) -> np.ndarray:
    """Per-death, per-cause log Bernoulli likelihood of the symptom rows.

    Present symptoms contribute log p, absent (or missing, treated as
    absent) symptoms contribute log(1 - p). With epsilon > 0 the entries
    of p are clamped into [epsilon, 1 - epsilon] first, so the result is
    finite everywhere; with epsilon = 0 entries of exactly 0 or 1 can
    produce -inf.
    """
    pair_symptom_names(s, p)
    present = (s.entries == 1.0).astype(float)     # (J, K); NaN counts absent
    absent = 1.0 - present
    entries = p.entries
    if epsilon > 0.0:
        entries = np.clip(entries, epsilon, 1.0 - epsilon)
        return present @ np.log(entries) + absent @ np.log1p(-entries)
    with np.errstate(divide="ignore"):
        log_p = np.log(entries)
        log_q = np.log1p(-entries)
    return masked_log_dot(present, log_p) + masked_log_dot(absent, log_q)


def death_cause_likelihoods(
    s_j: np.ndarray,
    p: CondProbMatrix,
    f: Csmf,
    epsilon: float = DEFAULT_EPSILON,
) -> np.ndarray:
    """Normalized posterior cause weights for one death given fractions f.

    Computes f_n times the Bernoulli likelihood of the symptom row under
    cause n, normalized over causes; all work happens in log space.
    """
    s_j = np.asarray(s_j, dtype=float)
    if s_j.ndim != 1 or s_j.shape[0] != p.n_symptoms:
        raise DimensionError(
            f"symptom row has shape {s_j.shape}, matrix has {p.n_symptoms} symptoms"
        )
    pair_cause_names(f, p)
    row = SymptomMatrix(
        s_j[None, :], ("death",), p.symptom_names
    )
    loglik = log_likelihood_matrix(row, p, epsilon)[0]
    with np.errstate(divide="ignore"):
        log_f = np.log(f.fractions)
    return _normalize_log_weights(loglik + log_f)


def _normalize_log_weights(log_w: np.ndarray) -> np.ndarray:
    m = log_w.max()
    if np.isneginf(m):
        raise AllZeroLikelihoodError(
            "every cause has zero likelihood for this death; use a positive "
            "clamp epsilon or repair the probability matrix"
        )
    w = np.exp(log_w - m)
    return w / w.sum()


# ---------------------------------------------------------------------------
# Gibbs steps
# ---------------------------------------------------------------------------

def _draw_categorical_rows(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One categorical draw per row of a row-stochastic matrix."""
    u = rng.random(weights.shape[0])
    cum = np.cumsum(weights, axis=1)
    y = (cum < u[:, None]).sum(axis=1)
    return np.minimum(y, weights.shape[1] - 1)


def _weights_given_f(
    loglik: np.ndarray, f: np.ndarray, death_ids: tuple[str, ...] | None = None
) -> np.ndarray:
    """Row-normalized categorical weights given current fractions."""
    with np.errstate(divide="ignore"):
        log_w = loglik + np.log(f)[None, :]
    m = log_w.max(axis=1, keepdims=True)
    if np.isneginf(m).any():
        bad = int(np.argmax(np.isneginf(m.ravel())))
        who = death_ids[bad] if death_ids else f"index {bad}"
        raise AllZeroLikelihoodError(
            f"every cause has zero weight for death {who!r}"
        )
    w = np.exp(log_w - m)
    return w / w.sum(axis=1, keepdims=True)


def sample_causes(
    s: SymptomMatrix,
    p: CondProbMatrix,
    f: Csmf,
    rng: np.random.Generator,
    epsilon: float = DEFAULT_EPSILON,
) -> np.ndarray:
    """Draw one cause label per death from its categorical posterior
    weights given the fractions f."""
    loglik = log_likelihood_matrix(s, p, epsilon)
    pair_cause_names(f, p)
    weights = _weights_given_f(loglik, f.fractions, s.death_ids)
    return _draw_categorical_rows(weights, rng)


def sample_csmf(
    y: np.ndarray,
    alpha: np.ndarray,
    rng: np.random.Generator,
    cause_names: tuple[str, ...] | None = None,
) -> Csmf:
    """Draw fractions from the Dirichlet updated with label counts.

    Counts are per-cause tallies of the labels in y; an empty y gives a
    draw from the prior.
    """
    alpha = np.asarray(alpha, dtype=float)
    n = alpha.shape[0]
    y = np.asarray(y, dtype=int)
    counts = np.bincount(y, minlength=n) if y.size else np.zeros(n)
    if y.size and (y.min() < 0 or y.max() >= n):
        raise ValidationError("cause label out of range")
    draw = rng.dirichlet(counts + alpha)
    if cause_names is None:
        cause_names = tuple(f"cause{i + 1}" for i in range(n))
    return Csmf(draw, cause_names)


def run_gibbs(
    s: SymptomMatrix, p: CondProbMatrix, cfg: GibbsConfig
) -> list[PosteriorChain]:
    """Run independently seeded chains and return their retained draws.

    Each chain starts from the initial fraction guess, alternates the
    label and fraction draws for n_iterations, and retains every thin-th
    state after burn_in. Likelihood rows are validated up front so an
    unclamped incompatibility fails before any sampling happens. Identical
    configuration (seed included) reproduces identical chains.
    """
    pair_symptom_names(s, p)
    alpha = cfg.resolve_alpha(p.n_causes)
    if cfg.f_init is not None:
        pair_cause_names(cfg.f_init, p)
        f_init = cfg.f_init.fractions
    else:
        f_init = alpha / alpha.sum()

    loglik = log_likelihood_matrix(s, p, cfg.prob_clamp_epsilon)
    row_max = loglik.max(axis=1)
    if np.isneginf(row_max).any():
        bad = int(np.argmax(np.isneginf(row_max)))
        raise AllZeroLikelihoodError(
            f"death {s.death_ids[bad]!r} has zero likelihood under every "
            "cause; use a positive clamp epsilon"
        )

    n_deaths, n_causes = loglik.shape
    chains: list[PosteriorChain] = []
    for chain_id, child in enumerate(np.random.SeedSequence(cfg.seed).spawn(cfg.n_chains)):
        rng = np.random.default_rng(child)
        n_keep = cfg.n_retained
        f_draws = np.empty((n_keep, n_causes))
        y_draws = np.empty((n_keep, n_deaths), dtype=np.int64)
        rb_sum = np.zeros((n_deaths, n_causes))
        f = f_init.copy()
        keep = 0
        for t in range(1, cfg.n_iterations + 1):
            weights = _weights_given_f(loglik, f, s.death_ids)
            y = _draw_categorical_rows(weights, rng)
            counts = np.bincount(y, minlength=n_causes)
            f = rng.dirichlet(counts + alpha)
            if t > cfg.burn_in and (t - cfg.burn_in) % cfg.thin == 0:
                f_draws[keep] = f
                y_draws[keep] = y
                rb_sum += weights
                keep += 1
        chains.append(PosteriorChain(
            f_draws=f_draws,
            y_draws=y_draws,
            rb_mean=rb_sum / max(keep, 1),
            chain_id=chain_id,
            config=cfg,
            cause_names=p.cause_names,
            death_ids=s.death_ids,
        ))
    return chains


# ---------------------------------------------------------------------------
# Summaries and diagnostics
# ---------------------------------------------------------------------------

def potential_scale_reduction(per_chain: np.ndarray) -> float:
    """Between/within variance ratio diagnostic for one scalar quantity.

    per_chain has shape (n_chains, n_draws). A quantity with no variance
    anywhere is reported as 1.0 so degenerate components cannot poison a
    convergence verdict; zero within-chain variance with real
    between-chain spread is reported as inf.
    """
    m, n = per_chain.shape
    w = per_chain.var(axis=1, ddof=1).mean()
    means = per_chain.mean(axis=1)
    b_over_n = means.var(ddof=1)
    if w == 0.0:
        return 1.0 if b_over_n == 0.0 else float("inf")
    v = (n - 1) / n * w + (m + 1) / m * b_over_n
    # Sampling noise can push the ratio below 1 (e.g. identical chains);
    # values below 1 carry no information, so floor there.
    return max(1.0, float(np.sqrt(v / w)))


def summarize(chains: list[PosteriorChain], level: float = 0.95) -> PosteriorSummary:
    """Pool chains into point estimates, intervals and diagnostics.

    Fraction summaries are pooled means with equal-tailed intervals at
    the given level. Per-death cause probabilities are empirical
    frequencies of the retained label draws with binomial-style
    intervals; the Rao-Blackwellized variant is reported alongside.
    """
    if not chains:
        raise ValidationError("no chains to summarize")
    if any(c.n_retained < 2 for c in chains):
        raise ValidationError("every chain needs at least two retained draws")
    if not (0.0 < level < 1.0):
        raise ValidationError("interval level must lie in (0, 1)")
    cause_names = chains[0].cause_names
    death_ids = chains[0].death_ids

    pooled_f = np.concatenate([c.f_draws for c in chains], axis=0)
    pooled_y = np.concatenate([c.y_draws for c in chains], axis=0)
    r_total, n_causes = pooled_f.shape
    n_deaths = pooled_y.shape[1]

    mean_f = pooled_f.mean(axis=0)
    mean_f = mean_f / mean_f.sum()
    lo_q, hi_q = (1.0 - level) / 2.0, 1.0 - (1.0 - level) / 2.0
    intervals = np.stack(
        [np.quantile(pooled_f, lo_q, axis=0), np.quantile(pooled_f, hi_q, axis=0)],
        axis=1,
    )

    freq = np.stack(
        [np.bincount(pooled_y[:, j], minlength=n_causes) for j in range(n_deaths)]
    ).astype(float) / r_total
    z = float(norm.ppf(0.5 + level / 2.0))
    half = z * np.sqrt(freq * (1.0 - freq) / r_total)
    per_death_intervals = np.stack(
        [np.clip(freq - half, 0.0, 1.0), np.clip(freq + half, 0.0, 1.0)], axis=2
    )

    weights = np.array([c.n_retained for c in chains], dtype=float)
    rb = sum(w * c.rb_mean for w, c in zip(weights, chains)) / weights.sum()

    if len(chains) >= 2:
        stacked = np.stack([c.f_draws for c in chains])   # (m, n_draws, n_causes)
        psrf = np.array([
            potential_scale_reduction(stacked[:, :, n]) for n in range(n_causes)
        ])
        converged: bool | None = bool((psrf < PSRF_THRESHOLD).all())
    else:
        psrf = None
        converged = None

    return PosteriorSummary(
        csmf_mean=Csmf(mean_f, cause_names),
        csmf_intervals=intervals,
        per_death_probs=freq,
        per_death_intervals=per_death_intervals,
        per_death_probs_rb=rb,
        psrf=psrf,
        converged=converged,
        level=level,
        n_retained_total=r_total,
        cause_names=cause_names,
        death_ids=death_ids,
    )


def single_death_assign(
    s_j: np.ndarray,
    p: CondProbMatrix,
    f: Csmf,
    n_draws: int,
    rng: np.random.Generator,
    epsilon: float = DEFAULT_EPSILON,
    level: float = 0.95,
) -> SingleDeathResult:
    """Assign causes to one death given a supplied set of fractions.

    Returns the categorical cause weights plus, when n_draws > 0,
    empirical frequencies of repeated label draws and a binomial-style
    interval per cause. n_draws = 0 returns the weights alone.
    """
    likelihoods = death_cause_likelihoods(s_j, p, f, epsilon)
    if n_draws <= 0:
        return SingleDeathResult(
            likelihoods=likelihoods,
            frequencies=None,
            intervals=None,
            n_draws=0,
            cause_names=p.cause_names,
        )
    draws = _draw_categorical_rows(
        np.tile(likelihoods, (n_draws, 1)), rng
    )
    freq = np.bincount(draws, minlength=p.n_causes) / n_draws
    z = float(norm.ppf(0.5 + level / 2.0))
    half = z * np.sqrt(freq * (1.0 - freq) / n_draws)
    intervals = np.stack(
        [np.clip(freq - half, 0.0, 1.0), np.clip(freq + half, 0.0, 1.0)], axis=1
    )
    return SingleDeathResult(
        likelihoods=likelihoods,
        frequencies=freq,
        intervals=intervals,
        n_draws=n_draws,
        cause_names=p.cause_names,
    )


# ---------------------------------------------------------------------------
# Exact enumeration oracle
# ---------------------------------------------------------------------------

def exact_posterior_oracle(
    s: SymptomMatrix,
    p: CondProbMatrix,
    alpha: np.ndarray,
    epsilon: float = 0.0,
) -> OracleResult:
    """Exact posterior marginals by enumerating every label assignment.

    Each of the n_causes ** n_deaths assignments is weighted by its
    Bernoulli symptom likelihood times the Dirichlet-multinomial mass of
    its per-cause counts. The per-death marginals follow directly; the
    exact fraction mean is (alpha_n + sum_j marginal_jn) / (J + sum alpha)
    by conjugacy. Guarded to instances with at most 10^6 assignments.
    """
    pair_symptom_names(s, p)
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (p.n_causes,) or (alpha <= 0).any():
        raise ValidationError("alpha must hold one positive value per cause")
    n_deaths, n_causes = s.n_deaths, p.n_causes
    n_assign = n_causes ** n_deaths
    if n_assign > ORACLE_GUARD:
        raise InstanceTooLargeError(
            f"{n_causes}^{n_deaths} = {n_assign} assignments exceeds the "
            f"enumeration guard of {ORACLE_GUARD}"
        )

    loglik = log_likelihood_matrix(s, p, epsilon)    # (J, N)

    # Mixed-radix decode of assignment r: label of death j is digit j.
    codes = np.arange(n_assign)
    labels = np.empty((n_assign, n_deaths), dtype=np.int64)
    for j in range(n_deaths - 1, -1, -1):
        labels[:, j] = codes % n_causes
        codes = codes // n_causes

    log_w = np.zeros(n_assign)
    for j in range(n_deaths):
        log_w += loglik[j, labels[:, j]]
    for n in range(n_causes):
        m_n = (labels == n).sum(axis=1)
        log_w += gammaln(alpha[n] + m_n) - gammaln(alpha[n])

    m = log_w.max()
    if np.isneginf(m):
        raise AllZeroLikelihoodError(
            "every assignment has zero posterior mass; the instance is "
            "incompatible with the unclamped model"
        )
    w = np.exp(log_w - m)
    w /= w.sum()

    marginals = np.stack([
        np.bincount(labels[:, j], weights=w, minlength=n_causes)
        for j in range(n_deaths)
    ])
    csmf_mean = (alpha + marginals.sum(axis=0)) / (n_deaths + alpha.sum())
    return OracleResult(
        csmf_mean=Csmf(csmf_mean / csmf_mean.sum(), p.cause_names),
        per_death_marginals=marginals,
        death_ids=s.death_ids,
        cause_names=p.cause_names,
    )
