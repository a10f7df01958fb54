"""Shared domain types, letter-grade decoding, file ingestion and validation.

Everything here is immutable after construction and safe to share across
threads. File formats are plain delimited text (comma or tab, autodetected)
so they can be produced and consumed by spreadsheet tools.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO, Union

import numpy as np

Source = Union[str, Path, TextIO]

SUM_TOLERANCE = 1e-9


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class VacodaError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(VacodaError):
    """Malformed input text (bad cell, wrong row length, empty stream)."""


class UnknownLabelError(ParseError):
    """A cell holds a symbol that is not one of the recognized grades."""


class ValidationError(VacodaError):
    """A constructed object violates one of its invariants."""


class DimensionError(VacodaError):
    """Paired inputs do not agree in shape or in their name lists."""


class ConstraintReferenceError(VacodaError):
    """A constraint names a symptom absent from the matrix under check."""


class UndefinedDeathError(VacodaError):
    """A death is incompatible with every cause (all scores vanish)."""


class AllZeroLikelihoodError(VacodaError):
    """Every cause has zero likelihood for a death (only possible unclamped)."""


class InstanceTooLargeError(VacodaError):
    """Exact enumeration was requested on an instance beyond the guard."""


# ---------------------------------------------------------------------------
# Letter grades
# ---------------------------------------------------------------------------

# Fifteen grades in rank order. Repeated base letters are disambiguated with
# +/- suffixes; the numeric scale runs from "always" (1.0) down to "never" (0.0).
GRADE_LABELS: tuple[str, ...] = (
    "I", "A+", "A", "A-", "B+", "B", "B-",
    "C+", "C", "C-", "D+", "D", "D-", "E", "N",
)
GRADE_VALUES: tuple[float, ...] = (
    1.0, 0.8, 0.5, 0.2, 0.1, 0.05, 0.02,
    0.01, 0.005, 0.002, 0.001, 0.0005, 0.0001, 0.00001, 0.0,
)

_LABEL_TO_VALUE = dict(zip(GRADE_LABELS, GRADE_VALUES))
_VALUE_TO_LABEL = dict(zip(GRADE_VALUES, GRADE_LABELS))


def decode_letter(label: str) -> float:
    """Return the numeric probability for a letter grade.

    Raises UnknownLabelError for anything outside the fifteen grades.
    """
    try:
        return _LABEL_TO_VALUE[label]
    except KeyError:
        raise UnknownLabelError(
            f"unknown grade symbol {label!r}; expected one of {', '.join(GRADE_LABELS)}"
        ) from None


def encode_value(value: float) -> str:
    """Return the letter grade for one of the fifteen grade values."""
    try:
        return _VALUE_TO_LABEL[value]
    except KeyError:
        raise ValidationError(
            f"{value!r} is not one of the fifteen grade values"
        ) from None


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def _check_unique(names: Sequence[str], what: str) -> None:
    seen: set[str] = set()
    for n in names:
        if n in seen:
            raise ValidationError(f"duplicate {what} name {n!r}")
        seen.add(n)


@dataclass(frozen=True)
class CondProbMatrix:
    """Symptom-by-cause conditional probability matrix Pr(symptom | cause).

    entries has shape (n_symptoms, n_causes) with every value in [0, 1].
    Symptom and cause name lists are duplicate-free. Matrices with zero
    symptom rows are permitted for programmatic use (an uninformative
    instrument); file loading requires at least one row.
    """

    entries: np.ndarray
    symptom_names: tuple[str, ...]
    cause_names: tuple[str, ...]

    def __post_init__(self) -> None:
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 2:
            raise ValidationError("conditional probability entries must be 2-D")
        object.__setattr__(self, "entries", _freeze(e))
        object.__setattr__(self, "symptom_names", tuple(self.symptom_names))
        object.__setattr__(self, "cause_names", tuple(self.cause_names))
        k, n = e.shape
        if len(self.symptom_names) != k or len(self.cause_names) != n:
            raise ValidationError("name lists do not match the matrix shape")
        if n < 2:
            raise ValidationError(f"need at least 2 causes, got {n}")
        _check_unique(self.symptom_names, "symptom")
        _check_unique(self.cause_names, "cause")
        if e.size and (np.isnan(e).any() or (e < 0.0).any() or (e > 1.0).any()):
            bad = np.argwhere(~((e >= 0.0) & (e <= 1.0)))[0]
            raise ValidationError(
                f"entry at symptom {self.symptom_names[bad[0]]!r}, "
                f"cause {self.cause_names[bad[1]]!r} is outside [0, 1]"
            )

    @property
    def n_symptoms(self) -> int:
        return self.entries.shape[0]

    @property
    def n_causes(self) -> int:
        return self.entries.shape[1]

    def symptom_index(self, name: str) -> int:
        try:
            return self.symptom_names.index(name)
        except ValueError:
            raise ConstraintReferenceError(
                f"symptom {name!r} not present in the matrix"
            ) from None


@dataclass(frozen=True)
class SymptomMatrix:
    """Per-death binary sign/symptom indicators, one row per death.

    entries has shape (n_deaths, n_symptoms); cells are 1.0 (present),
    0.0 (absent) or NaN (missing). Missing cells are treated as absent
    during inference; the per-death missing count is surfaced so callers
    can report it.
    """

    entries: np.ndarray
    death_ids: tuple[str, ...]
    symptom_names: tuple[str, ...]

    def __post_init__(self) -> None:
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 2:
            raise ValidationError("symptom entries must be 2-D")
        object.__setattr__(self, "entries", _freeze(e))
        object.__setattr__(self, "death_ids", tuple(self.death_ids))
        object.__setattr__(self, "symptom_names", tuple(self.symptom_names))
        j, k = e.shape
        if len(self.death_ids) != j or len(self.symptom_names) != k:
            raise ValidationError("name lists do not match the matrix shape")
        if j < 1:
            raise ValidationError("need at least one death")
        _check_unique(self.death_ids, "death")
        _check_unique(self.symptom_names, "symptom")
        if e.size:
            ok = np.isnan(e) | (e == 0.0) | (e == 1.0)
            if not ok.all():
                bad = np.argwhere(~ok)[0]
                raise ValidationError(
                    f"entry for death {self.death_ids[bad[0]]!r}, symptom "
                    f"{self.symptom_names[bad[1]]!r} is not 0, 1 or missing"
                )

    @property
    def n_deaths(self) -> int:
        return self.entries.shape[0]

    @property
    def n_symptoms(self) -> int:
        return self.entries.shape[1]

    @property
    def missing_counts(self) -> np.ndarray:
        """Number of missing cells per death."""
        return np.isnan(self.entries).sum(axis=1)


@dataclass(frozen=True)
class Csmf:
    """Cause-specific mortality fractions: a point on the probability simplex.

    Used for the prior guess handed to the deterministic method, for
    simulation truths, for point estimates and for posterior draws.
    """

    fractions: np.ndarray
    cause_names: tuple[str, ...]

    def __post_init__(self) -> None:
        f = np.asarray(self.fractions, dtype=float)
        object.__setattr__(self, "fractions", _freeze(f))
        object.__setattr__(self, "cause_names", tuple(self.cause_names))
        if f.ndim != 1 or len(self.cause_names) != f.shape[0]:
            raise ValidationError("fractions must be 1-D and match cause names")
        _check_unique(self.cause_names, "cause")
        if (f < 0.0).any() or np.isnan(f).any():
            raise ValidationError("fractions must be non-negative")
        if abs(float(f.sum()) - 1.0) > SUM_TOLERANCE:
            raise ValidationError(
                f"fractions sum to {float(f.sum())!r}, not 1 within {SUM_TOLERANCE}"
            )

    @classmethod
    def uniform(cls, cause_names: Sequence[str]) -> "Csmf":
        n = len(cause_names)
        return cls(np.full(n, 1.0 / n), tuple(cause_names))

    @property
    def n_causes(self) -> int:
        return self.fractions.shape[0]


# ---------------------------------------------------------------------------
# Constraints
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SumEquals:
    """The probabilities of the lhs symptoms should add up to the rhs symptom's."""

    lhs: tuple[str, ...]
    rhs: str
    causes: tuple[str, ...] | None = None  # None applies to every cause column

    def render(self) -> str:
        return f"SUM {' '.join(self.lhs)} = {self.rhs}"


@dataclass(frozen=True)
class LessEq:
    """Symptom a's probability should not exceed symptom b's."""

    a: str
    b: str
    causes: tuple[str, ...] | None = None

    def render(self) -> str:
        return f"LEQ {self.a} {self.b}"


Constraint = Union[SumEquals, LessEq]


@dataclass(frozen=True)
class ConstraintSet:
    constraints: tuple[Constraint, ...] = ()

    def __iter__(self):
        return iter(self.constraints)

    def __len__(self) -> int:
        return len(self.constraints)


@dataclass(frozen=True)
class Violation:
    """One failed consistency check on one cause column."""

    constraint: str
    cause: str
    observed: tuple[float, ...]
    residual: float


def validate_cond_prob_matrix(
    p: CondProbMatrix,
    constraints: ConstraintSet,
    tol: float = SUM_TOLERANCE,
) -> list[Violation]:
    """Check user-supplied consistency constraints against a matrix.

    Returns one Violation per (constraint, cause column) that fails. An
    empty list means the matrix is consistent under the supplied
    constraints. Elicited matrices are not guaranteed to satisfy any of
    these, which is exactly why the check exists.
    """
    violations: list[Violation] = []
    for c in constraints:
        if isinstance(c, SumEquals):
            idx = [p.symptom_index(s) for s in c.lhs]
            rhs_idx = p.symptom_index(c.rhs)
            scope = _cause_scope(p, c.causes)
            for col in scope:
                lhs_vals = [float(p.entries[i, col]) for i in idx]
                rhs_val = float(p.entries[rhs_idx, col])
                residual = sum(lhs_vals) - rhs_val
                if abs(residual) > tol:
                    violations.append(Violation(
                        constraint=c.render(),
                        cause=p.cause_names[col],
                        observed=tuple(lhs_vals + [rhs_val]),
                        residual=residual,
                    ))
        elif isinstance(c, LessEq):
            a_idx = p.symptom_index(c.a)
            b_idx = p.symptom_index(c.b)
            scope = _cause_scope(p, c.causes)
            for col in scope:
                a_val = float(p.entries[a_idx, col])
                b_val = float(p.entries[b_idx, col])
                if a_val - b_val > tol:
                    violations.append(Violation(
                        constraint=c.render(),
                        cause=p.cause_names[col],
                        observed=(a_val, b_val),
                        residual=a_val - b_val,
                    ))
        else:  # pragma: no cover - sealed union
            raise TypeError(f"unknown constraint type {type(c)!r}")
    return violations


def _cause_scope(p: CondProbMatrix, causes: tuple[str, ...] | None) -> list[int]:
    if causes is None:
        return list(range(p.n_causes))
    out = []
    for name in causes:
        if name not in p.cause_names:
            raise ConstraintReferenceError(f"cause {name!r} not present in the matrix")
        out.append(p.cause_names.index(name))
    return out


# ---------------------------------------------------------------------------
# Delimited text ingestion
# ---------------------------------------------------------------------------

def _read_lines(source: Source) -> list[str]:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    return [line for line in text.splitlines() if line.strip() != ""]


def _sniff_delimiter(line: str) -> str:
    return "\t" if "\t" in line else ","


def _split_rows(lines: list[str], what: str) -> list[list[str]]:
    if not lines:
        raise ParseError(f"empty {what} stream")
    delim = _sniff_delimiter(lines[0])
    rows = [[cell.strip() for cell in line.split(delim)] for line in lines]
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(
                f"{what} row {i + 1} has {len(row)} cells, expected {width}"
            )
    return rows


def detect_p_mode(source: Source) -> str:
    """Guess whether a probability matrix file is letter or numeric coded.

    Grade symbols and decimal literals do not overlap, so the first data
    cell decides.
    """
    rows = _split_rows(_read_lines(source), "conditional probability matrix")
    if len(rows) < 2 or len(rows[0]) < 2:
        raise ParseError("conditional probability matrix needs data cells")
    cell = rows[1][1]
    if cell in _LABEL_TO_VALUE:
        return "letters"
    return "numeric"


def load_cond_prob_matrix(source: Source, mode: str = "numeric") -> CondProbMatrix:
    """Load a conditional probability matrix from delimited text.

    Layout: first row holds cause names (the corner cell is ignored),
    first column holds symptom names. In "letters" mode each cell is a
    grade symbol; in "numeric" mode each cell is a decimal in [0, 1].
    """
    if mode not in ("letters", "numeric"):
        raise ValueError(f"mode must be 'letters' or 'numeric', got {mode!r}")
    rows = _split_rows(_read_lines(source), "conditional probability matrix")
    if len(rows) < 2:
        raise ParseError("conditional probability matrix has no symptom rows")
    if len(rows[0]) < 2:
        raise ParseError("conditional probability matrix has no cause columns")
    cause_names = tuple(rows[0][1:])
    symptom_names = tuple(r[0] for r in rows[1:])
    k, n = len(symptom_names), len(cause_names)
    entries = np.empty((k, n), dtype=float)
    for i, row in enumerate(rows[1:]):
        for j, cell in enumerate(row[1:]):
            if mode == "letters":
                try:
                    entries[i, j] = decode_letter(cell)
                except UnknownLabelError as exc:
                    raise UnknownLabelError(
                        f"row {symptom_names[i]!r}, column {cause_names[j]!r}: {exc}"
                    ) from None
            else:
                try:
                    value = float(cell)
                except ValueError:
                    raise ParseError(
                        f"row {symptom_names[i]!r}, column {cause_names[j]!r}: "
                        f"cannot parse {cell!r} as a probability"
                    ) from None
                entries[i, j] = value
    try:
        return CondProbMatrix(entries, symptom_names, cause_names)
    except ValidationError as exc:
        raise ValidationError(f"conditional probability matrix invalid: {exc}") from None


def dump_cond_prob_matrix(
    p: CondProbMatrix, dest: Source, mode: str = "numeric", delimiter: str = ","
) -> None:
    """Write a matrix back out; numeric mode round-trips bit-exactly."""
    lines = [delimiter.join(["symptom", *p.cause_names])]
    for i, name in enumerate(p.symptom_names):
        if mode == "numeric":
            cells = [repr(float(v)) for v in p.entries[i]]
        elif mode == "letters":
            cells = [encode_value(float(v)) for v in p.entries[i]]
        else:
            raise ValueError(f"mode must be 'letters' or 'numeric', got {mode!r}")
        lines.append(delimiter.join([name, *cells]))
    _write_text(dest, "\n".join(lines) + "\n")


def load_symptom_matrix(source: Source) -> SymptomMatrix:
    """Load per-death indicators: first row symptom names, first column
    death IDs, cells 0, 1 or "." for missing."""
    rows = _split_rows(_read_lines(source), "symptom matrix")
    if len(rows) < 2:
        raise ParseError("symptom matrix has no death rows")
    if len(rows[0]) < 2:
        raise ParseError("symptom matrix has no symptom columns")
    symptom_names = tuple(rows[0][1:])
    death_ids = tuple(r[0] for r in rows[1:])
    entries = np.empty((len(death_ids), len(symptom_names)), dtype=float)
    for i, row in enumerate(rows[1:]):
        for j, cell in enumerate(row[1:]):
            if cell == ".":
                entries[i, j] = np.nan
            elif cell in ("0", "1"):
                entries[i, j] = float(cell)
            else:
                raise ParseError(
                    f"death {death_ids[i]!r}, symptom {symptom_names[j]!r}: "
                    f"cell must be 0, 1 or '.', got {cell!r}"
                )
    try:
        return SymptomMatrix(entries, death_ids, symptom_names)
    except ValidationError as exc:
        raise ValidationError(f"symptom matrix invalid: {exc}") from None


def dump_symptom_matrix(s: SymptomMatrix, dest: Source, delimiter: str = ",") -> None:
    lines = [delimiter.join(["death", *s.symptom_names])]
    for i, death in enumerate(s.death_ids):
        cells = [
            "." if np.isnan(v) else str(int(v))
            for v in s.entries[i]
        ]
        lines.append(delimiter.join([death, *cells]))
    _write_text(dest, "\n".join(lines) + "\n")


def load_csmf(source: Source) -> Csmf:
    """Load cause fractions from two-column text: cause name, fraction."""
    rows = _split_rows(_read_lines(source), "cause fraction table")
    names: list[str] = []
    fracs: list[float] = []
    for i, row in enumerate(rows):
        if len(row) != 2:
            raise ParseError(f"cause fraction row {i + 1} needs exactly 2 columns")
        names.append(row[0])
        try:
            fracs.append(float(row[1]))
        except ValueError:
            raise ParseError(
                f"cause fraction row {i + 1}: cannot parse {row[1]!r}"
            ) from None
    try:
        return Csmf(np.array(fracs), tuple(names))
    except ValidationError as exc:
        raise ValidationError(f"cause fraction table invalid: {exc}") from None


def dump_csmf(csmf: Csmf, dest: Source, delimiter: str = ",") -> None:
    lines = [
        delimiter.join([name, repr(float(f))])
        for name, f in zip(csmf.cause_names, csmf.fractions)
    ]
    _write_text(dest, "\n".join(lines) + "\n")


def load_constraints(source: Source) -> ConstraintSet:
    """Parse one constraint per line: ``SUM a b = d`` or ``LEQ a d``.

    Lines starting with '#' are comments. Constraints from files apply to
    every cause column.
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    constraints: list[Constraint] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        kind = tokens[0].upper()
        if kind == "SUM":
            if "=" not in tokens:
                raise ParseError(f"constraint line {lineno}: SUM needs '='")
            eq = tokens.index("=")
            lhs = tuple(tokens[1:eq])
            rhs = tokens[eq + 1:]
            if len(lhs) < 1 or len(rhs) != 1:
                raise ParseError(
                    f"constraint line {lineno}: expected 'SUM a b ... = d'"
                )
            constraints.append(SumEquals(lhs=lhs, rhs=rhs[0]))
        elif kind == "LEQ":
            if len(tokens) != 3:
                raise ParseError(f"constraint line {lineno}: expected 'LEQ a b'")
            constraints.append(LessEq(a=tokens[1], b=tokens[2]))
        else:
            raise ParseError(
                f"constraint line {lineno}: unknown constraint kind {tokens[0]!r}"
            )
    return ConstraintSet(tuple(constraints))


def _write_text(dest: Source, text: str) -> None:
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text, encoding="utf-8")
    else:
        dest.write(text)


# ---------------------------------------------------------------------------
# Shared numeric plumbing
# ---------------------------------------------------------------------------

def masked_log_dot(mask: np.ndarray, log_values: np.ndarray) -> np.ndarray:
    """Compute ``mask @ log_values`` where log_values may contain -inf.

    A plain matmul would produce NaN from 0 * -inf. Every row/column pair
    whose mask selects at least one -inf entry is forced to -inf; the rest
    is the ordinary product over the finite part.
    """
    neginf = np.isneginf(log_values)
    finite = np.where(neginf, 0.0, log_values)
    out = mask @ finite
    hits = mask @ neginf.astype(float)
    out[hits > 0.0] = -np.inf
    return out


def pair_symptom_names(s: SymptomMatrix, p: CondProbMatrix) -> None:
    """Require that a symptom matrix and a probability matrix agree."""
    if s.symptom_names != p.symptom_names:
        raise DimensionError(
            f"symptom names disagree: data has {len(s.symptom_names)} "
            f"({', '.join(s.symptom_names[:3])}...), matrix has "
            f"{len(p.symptom_names)} ({', '.join(p.symptom_names[:3])}...)"
        )


def pair_cause_names(csmf: Csmf, p: CondProbMatrix) -> None:
    if csmf.cause_names != p.cause_names:
        raise DimensionError(
            "cause names of the fraction vector do not match the matrix"
        )
