"""Connective priors: Pr(second-level sense | connective) from explicit data.

Connectives strongly cue discourse senses, so conditionals estimated from
explicit relations (where the connective is present in the text) rank which
connective best identifies each second-level sense.  The top-ranked
connective per sense is the suggested entry for the hierarchy's connective
layer.

Counting is plain Naive Bayes.  No smoothing is applied unless
``smoothing_alpha`` is set; asking for the conditional of an unseen
connective with alpha = 0 is an error rather than a silent uniform.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple


class PriorError(ValueError):
    pass


class UndefinedConditionalError(PriorError):
    """Conditional requested for an unobserved connective with alpha = 0."""


class ExplicitRecord(NamedTuple):
    connective: str
    sense: str  # second-level label


def normalize_connective(raw: str) -> str:
    """Lowercase, collapse internal whitespace, strip punctuation at the ends."""
    collapsed = " ".join(raw.split()).lower()
    return collapsed.strip(string.punctuation + " ")


@dataclass(frozen=True)
class PriorMatrix:
    """Connective x sense co-occurrence counts plus the smoothing constant."""

    connectives: tuple[str, ...]
    senses: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]  # rows follow connectives, cols senses
    smoothing_alpha: float = 0.0
    _row_index: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.counts) != len(self.connectives):
            raise PriorError("count matrix row count does not match connective list")
        for row in self.counts:
            if len(row) != len(self.senses):
                raise PriorError("count matrix column count does not match sense list")
            if any(c < 0 for c in row):
                raise PriorError("counts must be non-negative")
        if self.smoothing_alpha < 0:
            raise PriorError("smoothing alpha must be non-negative")
        object.__setattr__(
            self, "_row_index", {z: i for i, z in enumerate(self.connectives)}
        )

    def count(self, connective: str, sense: str) -> int:
        z = normalize_connective(connective)
        if z not in self._row_index:
            return 0
        return self.counts[self._row_index[z]][self.senses.index(sense)]

    def row_sum(self, connective: str) -> int:
        z = normalize_connective(connective)
        if z not in self._row_index:
            return 0
        return sum(self.counts[self._row_index[z]])

    def to_json(self) -> dict:
        return {
            "connectives": list(self.connectives),
            "senses": list(self.senses),
            "counts": [list(row) for row in self.counts],
            "alpha": self.smoothing_alpha,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PriorMatrix":
        return cls(
            connectives=tuple(doc["connectives"]),
            senses=tuple(doc["senses"]),
            counts=tuple(tuple(int(c) for c in row) for row in doc["counts"]),
            smoothing_alpha=float(doc.get("alpha", 0.0)),
        )


@dataclass(frozen=True)
class AccumulateResult:
    matrix: PriorMatrix
    n_records: int
    rejected: tuple[tuple[int, str], ...]  # (record index, reason)


def accumulate(
    records: Iterable[ExplicitRecord | tuple[str, str]],
    senses: Iterable[str],
    smoothing_alpha: float = 0.0,
) -> AccumulateResult:
    """Tally (connective, sense) pairs into a PriorMatrix.

    ``senses`` is the hierarchy's second-level label list and fixes column
    order.  Records with a sense outside that list are rejected one by one
    (reported, not fatal).  Connective rows are ordered lexicographically so
    the result is independent of record order.
    """
    sense_list = tuple(senses)
    sense_index = {s.casefold(): i for i, s in enumerate(sense_list)}
    tallies: dict[str, list[int]] = {}
    rejected: list[tuple[int, str]] = []
    n = 0
    for i, rec in enumerate(records):
        n += 1
        connective, sense = rec
        z = normalize_connective(connective)
        if not z:
            rejected.append((i, f"empty connective in record {i}"))
            continue
        col = sense_index.get(" ".join(sense.split()).casefold())
        if col is None:
            rejected.append((i, f"unknown sense {sense!r} in record {i}"))
            continue
        row = tallies.setdefault(z, [0] * len(sense_list))
        row[col] += 1
    ordered = tuple(sorted(tallies))
    matrix = PriorMatrix(
        connectives=ordered,
        senses=sense_list,
        counts=tuple(tuple(tallies[z]) for z in ordered),
        smoothing_alpha=smoothing_alpha,
    )
    return AccumulateResult(matrix=matrix, n_records=n, rejected=tuple(rejected))


def conditional(matrix: PriorMatrix, connective: str) -> tuple[float, ...]:
    """Pr(sense | connective) over the matrix's sense order.

    With alpha = 0 this is the raw count ratio and requires the connective to
    have been observed; with alpha > 0 add-alpha smoothing covers unseen
    connectives too.
    """
    alpha = matrix.smoothing_alpha
    z = normalize_connective(connective)
    idx = matrix._row_index.get(z)
    row = matrix.counts[idx] if idx is not None else (0,) * len(matrix.senses)
    total = sum(row)
    if total == 0 and alpha == 0:
        raise UndefinedConditionalError(
            f"connective {connective!r} was never observed and alpha is 0"
        )
    denom = total + alpha * len(matrix.senses)
    return tuple((c + alpha) / denom for c in row)


@dataclass(frozen=True)
class ConnectiveRanking:
    """Per sense: connectives ordered by Pr(sense | connective), descending."""

    senses: tuple[str, ...]
    ranked: dict[str, tuple[tuple[str, float], ...]]

    def top1(self) -> dict[str, str]:
        """The suggested connective-layer entry for each sense."""
        return {s: pairs[0][0] for s, pairs in self.ranked.items() if pairs}

    def to_json(self) -> dict:
        return {
            "senses": list(self.senses),
            "ranked": {s: [[z, p] for z, p in pairs] for s, pairs in self.ranked.items()},
        }


def rank_connectives(matrix: PriorMatrix) -> ConnectiveRanking:
    """Rank observed connectives per sense; ties break lexicographically."""
    observed = [
        z
        for z in matrix.connectives
        if matrix.row_sum(z) > 0 or matrix.smoothing_alpha > 0
    ]
    if not observed:
        raise PriorError("prior matrix has no observed connective")
    cond = {z: conditional(matrix, z) for z in observed}
    ranked: dict[str, tuple[tuple[str, float], ...]] = {}
    for j, sense in enumerate(matrix.senses):
        pairs = sorted(((z, cond[z][j]) for z in observed), key=lambda zp: (-zp[1], zp[0]))
        ranked[sense] = tuple(pairs)
    return ConnectiveRanking(senses=matrix.senses, ranked=ranked)


def read_explicit_tsv(path: str | Path) -> list[ExplicitRecord]:
    """Read ``connective<TAB>sense`` lines; blank lines are skipped."""
    records: list[ExplicitRecord] = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise PriorError(f"{path}:{line_no}: expected 2 tab-separated columns, got {len(parts)}")
        records.append(ExplicitRecord(connective=parts[0], sense=parts[1]))
    return records


def write_matrix(matrix: PriorMatrix, path: str | Path) -> None:
    Path(path).write_text(json.dumps(matrix.to_json(), indent=2) + "\n", encoding="utf-8")


def read_matrix(path: str | Path) -> PriorMatrix:
    return PriorMatrix.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
