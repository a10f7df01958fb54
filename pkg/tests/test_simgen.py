import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vacoda.core import GRADE_VALUES, CondProbMatrix, Csmf, SymptomMatrix, ValidationError
from vacoda.simgen import (
    ScenarioConfig,
    empirical_grade_weights,
    generate_deaths,
    generate_p,
    generate_symptoms,
    inject_reporting_errors,
    make_scenario,
    rescale_p,
    replicate_configs,
)

GRADE_SET = set(GRADE_VALUES)


def _weights(**nonzero):
    """Weight vector by grade label, e.g. _weights(A=1.0)."""
    labels = ["I", "A+", "A", "A-", "B+", "B", "B-",
              "C+", "C", "C-", "D+", "D", "D-", "E", "N"]
    w = np.zeros(15)
    for label, value in nonzero.items():
        w[labels.index(label.replace("p", "+").replace("m", "-"))] = value
    return w


class TestGenerateP:
    def test_degenerate_weights(self):
        rng = np.random.default_rng(0)
        p = generate_p(4, 3, _weights(Ap=1.0), rng)
        assert (p.entries == 0.8).all()
        p2 = generate_p(4, 3, _weights(A=1.0), rng)
        assert (p2.entries == 0.5).all()

    def test_support_is_grade_values(self):
        rng = np.random.default_rng(1)
        p = generate_p(254, 69, np.full(15, 1 / 15), rng)
        assert p.entries.shape == (254, 69)
        assert set(np.unique(p.entries)) <= GRADE_SET

    def test_empirical_weights_recovered(self):
        # A matrix that is half "never" cells yields weights that generate
        # about half zeros.
        rng = np.random.default_rng(2)
        w = np.zeros(15)
        w[-1] = 0.5   # N
        w[2] = 0.5    # A = 0.5
        source = generate_p(100, 50, w, rng)
        est = empirical_grade_weights(source)
        regen = generate_p(200, 100, est, rng)
        zero_frac = (regen.entries == 0.0).mean()
        assert zero_frac == pytest.approx(0.5, abs=0.01)

    def test_empirical_weights_reject_non_grade_matrix(self):
        p = CondProbMatrix(np.array([[0.33, 0.5]]), ("s0",), ("c0", "c1"))
        with pytest.raises(ValidationError):
            empirical_grade_weights(p)


class TestGenerateDeaths:
    def test_degenerate_csmf(self):
        rng = np.random.default_rng(3)
        csmf = Csmf(np.array([1.0, 0.0]), ("c0", "c1"))
        assert (generate_deaths(50, csmf, rng) == 0).all()

    def test_law_of_large_numbers(self):
        rng = np.random.default_rng(4)
        csmf = Csmf(np.full(4, 0.25), tuple(f"c{i}" for i in range(4)))
        y = generate_deaths(100_000, csmf, rng)
        freq = np.bincount(y, minlength=4) / y.shape[0]
        assert freq == pytest.approx([0.25] * 4, abs=0.01)

    def test_seed_reproducible(self):
        csmf = Csmf(np.array([0.3, 0.7]), ("c0", "c1"))
        a = generate_deaths(100, csmf, np.random.default_rng(5))
        b = generate_deaths(100, csmf, np.random.default_rng(5))
        assert (a == b).all()


class TestGenerateSymptoms:
    def test_certain_symptoms(self):
        rng = np.random.default_rng(6)
        p = CondProbMatrix(np.array([[1.0, 0.0], [1.0, 0.0]]),
                           ("s0", "s1"), ("c0", "c1"))
        s = generate_symptoms(np.zeros(10, dtype=int), p, rng)
        assert (s.entries == 1.0).all()
        s2 = generate_symptoms(np.ones(10, dtype=int), p, rng)
        assert (s2.entries == 0.0).all()

    def test_bernoulli_frequency(self):
        rng = np.random.default_rng(7)
        p = CondProbMatrix(np.array([[0.5, 0.1]]), ("s0",), ("c0", "c1"))
        s = generate_symptoms(np.zeros(100_000, dtype=int), p, rng)
        assert s.entries.mean() == pytest.approx(0.5, abs=0.01)


class TestRescale:
    def test_endpoint_mapping(self):
        p = CondProbMatrix(np.array([[0.0, 1.0]]), ("s0",), ("c0", "c1"))
        out = rescale_p(p, 0.25, 0.75)
        assert out.entries.tolist() == [[0.25, 0.75]]

    def test_midpoint_fixed(self):
        p = CondProbMatrix(np.array([[0.0, 0.5], [1.0, 0.5]]),
                           ("s0", "s1"), ("c0", "c1"))
        out = rescale_p(p, 0.25, 0.75)
        assert out.entries[0, 1] == pytest.approx(0.5)
        assert out.entries[1, 1] == pytest.approx(0.5)

    def test_grade_matrix_lands_in_range_and_keeps_order(self):
        rng = np.random.default_rng(8)
        p = generate_p(40, 10, np.full(15, 1 / 15), rng)
        out = rescale_p(p, 0.25, 0.75)
        assert out.entries.min() >= 0.25 and out.entries.max() <= 0.75
        flat_in = p.entries.ravel()
        flat_out = out.entries.ravel()
        order_in = np.argsort(flat_in, kind="stable")
        assert (np.diff(flat_out[order_in]) >= -1e-15).all()

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_monotone_on_random_matrices(self, seed):
        rng = np.random.default_rng(seed)
        entries = rng.random((5, 3))
        if entries.min() == entries.max():  # pragma: no cover
            return
        p = CondProbMatrix(entries, tuple(f"s{i}" for i in range(5)),
                           tuple(f"c{i}" for i in range(3)))
        out = rescale_p(p, 0.25, 0.75)
        a, b = p.entries.ravel(), out.entries.ravel()
        for i in range(a.size):
            for k in range(i + 1, a.size):
                if a[i] < a[k]:
                    assert b[i] < b[k]

    def test_constant_matrix_rejected(self):
        p = CondProbMatrix(np.full((2, 2), 0.4), ("s0", "s1"), ("c0", "c1"))
        with pytest.raises(ValidationError, match="constant"):
            rescale_p(p)


class TestInjectErrors:
    def _symptoms(self, entries):
        e = np.asarray(entries, dtype=float)
        return SymptomMatrix(e, tuple(f"d{i}" for i in range(e.shape[0])),
                             tuple(f"s{i}" for i in range(e.shape[1])))

    def test_zero_rates_identity(self):
        s = self._symptoms([[1.0, 0.0], [0.0, 1.0]])
        out = inject_reporting_errors(s, 0.0, 0.0, np.random.default_rng(9))
        assert (out.entries == s.entries).all()

    def test_unit_rates_complement(self):
        s = self._symptoms([[1.0, 0.0], [0.0, 1.0]])
        out = inject_reporting_errors(s, 1.0, 1.0, np.random.default_rng(10))
        assert (out.entries == 1.0 - s.entries).all()

    def test_flip_fractions(self):
        rng = np.random.default_rng(11)
        entries = (rng.random((1000, 1000)) < 0.5).astype(float)
        s = self._symptoms(entries)
        out = inject_reporting_errors(s, 0.15, 0.10, np.random.default_rng(12))
        ones = entries == 1.0
        fn = (out.entries[ones] == 0.0).mean()
        fp = (out.entries[~ones] == 1.0).mean()
        assert fn == pytest.approx(0.15, abs=0.005)
        assert fp == pytest.approx(0.10, abs=0.005)

    def test_missing_untouched(self):
        s = self._symptoms([[1.0, np.nan], [np.nan, 0.0]])
        out = inject_reporting_errors(s, 1.0, 1.0, np.random.default_rng(13))
        assert np.isnan(out.entries[0, 1]) and np.isnan(out.entries[1, 0])


class TestMakeScenario:
    def test_single_death_certain_cause(self):
        cfg = ScenarioConfig(
            scenario="fair", n_deaths=1, n_causes=2, n_symptoms=3,
            true_csmf=Csmf(np.array([1.0, 0.0]), ("cause1", "cause2")), seed=1,
        )
        ds = make_scenario(cfg)
        assert ds.true_causes.tolist() == [0]
        assert ds.symptoms.n_deaths == 1
        assert ds.p_given_to_methods is ds.p_true

    def test_zero_rate_errors_equal_fair(self):
        base = dict(n_deaths=20, n_causes=3, n_symptoms=10, seed=42)
        fair = make_scenario(ScenarioConfig(scenario="fair", **base))
        noerr = make_scenario(ScenarioConfig(
            scenario="reporting_errors", false_negative_rate=0.0,
            false_positive_rate=0.0, **base,
        ))
        assert (fair.symptoms.entries == noerr.symptoms.entries).all()
        assert (fair.true_causes == noerr.true_causes).all()
        assert (fair.p_given_to_methods.entries == noerr.p_given_to_methods.entries).all()

    def test_rescaled_matrix_in_range_and_used_for_generation(self):
        cfg = ScenarioConfig(scenario="rescaled", n_deaths=10, n_causes=3,
                             n_symptoms=8, seed=7)
        ds = make_scenario(cfg)
        assert ds.p_given_to_methods.entries.min() >= 0.25
        assert ds.p_given_to_methods.entries.max() <= 0.75
        # raw draw keeps the grade values
        assert set(np.unique(ds.p_true.entries)) <= GRADE_SET

    def test_deterministic_given_config(self):
        cfg = ScenarioConfig(scenario="reporting_errors", n_deaths=15,
                             n_causes=4, n_symptoms=6, seed=3)
        a, b = make_scenario(cfg), make_scenario(cfg)
        assert np.array_equal(a.symptoms.entries, b.symptoms.entries, equal_nan=True)
        assert (a.true_causes == b.true_causes).all()
        assert (a.true_csmf.fractions == b.true_csmf.fractions).all()
        assert (a.p_given_to_methods.entries == b.p_given_to_methods.entries).all()

    def test_empirical_distribution_converges_to_truth(self):
        cfg = ScenarioConfig(scenario="fair", n_deaths=100_000, n_causes=5,
                             n_symptoms=1, seed=11)
        ds = make_scenario(cfg)
        freq = np.bincount(ds.true_causes, minlength=5) / cfg.n_deaths
        assert np.abs(freq - ds.true_csmf.fractions).max() < 0.01

    def test_invalid_rate_rejected(self):
        with pytest.raises(ValidationError):
            ScenarioConfig(scenario="reporting_errors", false_negative_rate=1.5)

    def test_unknown_scenario_rejected(self):
        with pytest.raises(ValidationError):
            ScenarioConfig(scenario="weird")

    def test_replicate_configs_distinct_and_stable(self):
        cfg = ScenarioConfig(seed=5)
        reps_a = replicate_configs(cfg, 4)
        reps_b = replicate_configs(cfg, 4)
        assert [r.seed for r in reps_a] == [r.seed for r in reps_b]
        assert len({r.seed for r in reps_a}) == 4
