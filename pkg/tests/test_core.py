import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vacoda.core import (
    GRADE_LABELS,
    GRADE_VALUES,
    CondProbMatrix,
    ConstraintSet,
    ConstraintReferenceError,
    Csmf,
    LessEq,
    ParseError,
    SumEquals,
    SymptomMatrix,
    UnknownLabelError,
    ValidationError,
    decode_letter,
    detect_p_mode,
    dump_cond_prob_matrix,
    dump_csmf,
    dump_symptom_matrix,
    encode_value,
    load_cond_prob_matrix,
    load_constraints,
    load_csmf,
    load_symptom_matrix,
    validate_cond_prob_matrix,
)

TABLE = {
    "I": 1.0, "A+": 0.8, "A": 0.5, "A-": 0.2,
    "B+": 0.1, "B": 0.05, "B-": 0.02,
    "C+": 0.01, "C": 0.005, "C-": 0.002,
    "D+": 0.001, "D": 0.0005, "D-": 0.0001,
    "E": 0.00001, "N": 0.0,
}


class TestDecodeLetter:
    def test_spot_values(self):
        assert decode_letter("I") == 1.0
        assert decode_letter("N") == 0.0
        assert decode_letter("E") == 0.00001

    def test_full_table(self):
        for label, value in TABLE.items():
            assert decode_letter(label) == value

    def test_unknown_label_names_symbol(self):
        with pytest.raises(UnknownLabelError, match="Z"):
            decode_letter("Z")

    def test_bijection(self):
        decoded = [decode_letter(label) for label in GRADE_LABELS]
        assert len(set(decoded)) == len(GRADE_LABELS)
        assert decoded == sorted(decoded, reverse=True)

    @given(st.sampled_from(GRADE_LABELS))
    def test_round_trip(self, label):
        assert encode_value(decode_letter(label)) == label

    @given(st.sampled_from(GRADE_VALUES))
    def test_value_round_trip(self, value):
        assert decode_letter(encode_value(value)) == value

    def test_encode_rejects_non_grade_value(self):
        with pytest.raises(ValidationError):
            encode_value(0.3)


class TestTypes:
    def test_cond_prob_requires_two_causes(self):
        with pytest.raises(ValidationError):
            CondProbMatrix(np.array([[0.5]]), ("s1",), ("c1",))

    def test_cond_prob_rejects_out_of_range(self):
        with pytest.raises(ValidationError, match="outside"):
            CondProbMatrix(np.array([[0.5, 1.5]]), ("s1",), ("c1", "c2"))

    def test_cond_prob_rejects_duplicate_names(self):
        with pytest.raises(ValidationError, match="duplicate"):
            CondProbMatrix(np.array([[0.5, 0.5], [0.2, 0.2]]), ("s1", "s1"), ("c1", "c2"))

    def test_cond_prob_allows_zero_symptom_rows(self):
        p = CondProbMatrix(np.empty((0, 2)), (), ("c1", "c2"))
        assert p.n_symptoms == 0

    def test_entries_immutable(self):
        p = CondProbMatrix(np.array([[0.5, 0.5]]), ("s1",), ("c1", "c2"))
        with pytest.raises(ValueError):
            p.entries[0, 0] = 0.1

    def test_symptom_matrix_rejects_bad_cell(self):
        with pytest.raises(ValidationError):
            SymptomMatrix(np.array([[2.0]]), ("d1",), ("s1",))

    def test_symptom_matrix_missing_counts(self):
        s = SymptomMatrix(np.array([[1.0, np.nan], [0.0, 0.0]]), ("d1", "d2"), ("s1", "s2"))
        assert list(s.missing_counts) == [1, 0]

    def test_csmf_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            Csmf(np.array([0.5, 0.6]), ("c1", "c2"))

    def test_csmf_rejects_negative(self):
        with pytest.raises(ValidationError):
            Csmf(np.array([1.2, -0.2]), ("c1", "c2"))

    def test_csmf_uniform(self):
        c = Csmf.uniform(("a", "b", "c", "d"))
        assert np.allclose(c.fractions, 0.25)


class TestLoadCondProb:
    def test_letter_grid(self):
        text = "symptom,c1,c2\ns1,I,N\ns2,A+,E\n"
        p = load_cond_prob_matrix(io.StringIO(text), mode="letters")
        assert p.entries.tolist() == [[1.0, 0.0], [0.8, 0.00001]]
        assert p.cause_names == ("c1", "c2")
        assert p.symptom_names == ("s1", "s2")

    def test_empty_stream_is_parse_error(self):
        with pytest.raises(ParseError, match="empty"):
            load_cond_prob_matrix(io.StringIO(""), mode="letters")

    def test_numeric_out_of_range_cell(self):
        text = "symptom,c1,c2\ns1,1.5,0.2\n"
        with pytest.raises(ValidationError, match="outside"):
            load_cond_prob_matrix(io.StringIO(text), mode="numeric")

    def test_bad_letter_names_location(self):
        text = "symptom,c1,c2\ns1,I,Q\n"
        with pytest.raises(UnknownLabelError, match="'s1'.*'c2'"):
            load_cond_prob_matrix(io.StringIO(text), mode="letters")

    def test_bad_numeric_cell_names_location(self):
        text = "symptom,c1,c2\ns1,0.5,oops\n"
        with pytest.raises(ParseError, match="oops"):
            load_cond_prob_matrix(io.StringIO(text), mode="numeric")

    def test_tab_delimiter_autodetected(self):
        text = "symptom\tc1\tc2\ns1\t0.5\t0.25\n"
        p = load_cond_prob_matrix(io.StringIO(text), mode="numeric")
        assert p.entries.tolist() == [[0.5, 0.25]]

    def test_ragged_row_rejected(self):
        text = "symptom,c1,c2\ns1,0.5\n"
        with pytest.raises(ParseError, match="row 2"):
            load_cond_prob_matrix(io.StringIO(text), mode="numeric")

    def test_detect_mode(self):
        assert detect_p_mode(io.StringIO("x,c1,c2\ns1,A+,B\n")) == "letters"
        assert detect_p_mode(io.StringIO("x,c1,c2\ns1,0.8,0.1\n")) == "numeric"


class TestRoundTrips:
    def test_numeric_round_trip_bit_exact(self):
        rng = np.random.default_rng(7)
        entries = rng.random((6, 4))
        p = CondProbMatrix(entries, tuple(f"s{i}" for i in range(6)),
                           tuple(f"c{i}" for i in range(4)))
        buf = io.StringIO()
        dump_cond_prob_matrix(p, buf, mode="numeric")
        p2 = load_cond_prob_matrix(io.StringIO(buf.getvalue()), mode="numeric")
        assert (p.entries == p2.entries).all()
        assert p.symptom_names == p2.symptom_names
        assert p.cause_names == p2.cause_names

    def test_letters_round_trip(self):
        rng = np.random.default_rng(11)
        entries = rng.choice(GRADE_VALUES, size=(5, 3))
        p = CondProbMatrix(entries, tuple(f"s{i}" for i in range(5)),
                           tuple(f"c{i}" for i in range(3)))
        buf = io.StringIO()
        dump_cond_prob_matrix(p, buf, mode="letters")
        p2 = load_cond_prob_matrix(io.StringIO(buf.getvalue()), mode="letters")
        assert (p.entries == p2.entries).all()

    def test_symptom_round_trip_with_missing(self):
        s = SymptomMatrix(np.array([[1.0, np.nan], [0.0, 1.0]]),
                          ("d1", "d2"), ("s1", "s2"))
        buf = io.StringIO()
        dump_symptom_matrix(s, buf)
        s2 = load_symptom_matrix(io.StringIO(buf.getvalue()))
        assert np.array_equal(s.entries, s2.entries, equal_nan=True)
        assert s2.death_ids == ("d1", "d2")

    def test_csmf_round_trip(self):
        c = Csmf(np.array([0.25, 0.75]), ("c1", "c2"))
        buf = io.StringIO()
        dump_csmf(c, buf)
        c2 = load_csmf(io.StringIO(buf.getvalue()))
        assert (c.fractions == c2.fractions).all()


class TestSymptomLoad:
    def test_basic(self):
        text = "death,s1,s2\nd1,1,0\nd2,.,1\n"
        s = load_symptom_matrix(io.StringIO(text))
        assert s.entries[0].tolist() == [1.0, 0.0]
        assert np.isnan(s.entries[1, 0])
        assert s.death_ids == ("d1", "d2")

    def test_bad_cell(self):
        with pytest.raises(ParseError, match="'x'"):
            load_symptom_matrix(io.StringIO("death,s1\nd1,x\n"))


class TestConstraints:
    def _matrix(self, a, b, d):
        return CondProbMatrix(
            np.array([[a, a], [b, b], [d, d]]),
            ("a", "b", "d"), ("c1", "c2"),
        )

    def test_sum_violation_residual(self):
        p = self._matrix(0.1, 0.05, 0.1)
        report = validate_cond_prob_matrix(
            p, ConstraintSet((SumEquals(("a", "b"), "d"),))
        )
        assert len(report) == 2  # both cause columns
        v = report[0]
        assert v.cause == "c1"
        assert v.residual == pytest.approx(0.05)
        assert v.observed == (0.1, 0.05, 0.1)

    def test_leq_violation(self):
        p = self._matrix(0.2, 0.5, 0.1)
        report = validate_cond_prob_matrix(p, ConstraintSet((LessEq("a", "d"),)))
        assert len(report) == 2
        assert report[0].residual == pytest.approx(0.1)

    def test_empty_constraint_set(self):
        p = self._matrix(0.1, 0.05, 0.1)
        assert validate_cond_prob_matrix(p, ConstraintSet()) == []

    def test_satisfied_exactly_at_zero_tol(self):
        p = self._matrix(0.125, 0.125, 0.25)
        report = validate_cond_prob_matrix(
            p, ConstraintSet((SumEquals(("a", "b"), "d"), LessEq("a", "d"))), tol=0.0
        )
        assert report == []

    def test_unknown_symptom_reference(self):
        p = self._matrix(0.1, 0.05, 0.1)
        with pytest.raises(ConstraintReferenceError, match="ghost"):
            validate_cond_prob_matrix(p, ConstraintSet((LessEq("ghost", "d"),)))

    def test_cause_scope(self):
        p = CondProbMatrix(np.array([[0.2, 0.1], [0.1, 0.2]]), ("a", "d"), ("c1", "c2"))
        report = validate_cond_prob_matrix(
            p, ConstraintSet((LessEq("a", "d", causes=("c2",)),))
        )
        assert report == []  # only c1 violates and it is out of scope

    def test_parse_constraint_file(self):
        text = "# comment\nSUM a b = d\nLEQ a d\n"
        cs = load_constraints(io.StringIO(text))
        assert len(cs) == 2
        assert isinstance(cs.constraints[0], SumEquals)
        assert cs.constraints[0].lhs == ("a", "b")
        assert cs.constraints[1] == LessEq("a", "d")

    def test_parse_malformed_line(self):
        with pytest.raises(ParseError, match="line 1"):
            load_constraints(io.StringIO("SUM a b d\n"))
        with pytest.raises(ParseError, match="unknown"):
            load_constraints(io.StringIO("FROB a b\n"))
