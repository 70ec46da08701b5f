"""Loading decision-history tables and preparing model-ready records.

A table schema declares, per column, whether it is numeric, categorical,
date, or the decision; categorical columns may carry a simplification map
(raw value to simplified level, with an optional fallback level), and
derived features are year differences between two date columns. The
decision column is binarised with the positive class coded 1, which by
default is the decision that marks the guarded-against event as likely.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from datetime import date, datetime
from fractions import Fraction

import numpy as np

from .errors import ConfigError, DataError
from .seeding import rng_stream

COLUMN_KINDS = ("numeric", "categorical", "date", "decision")

_DATE_FORMATS = ("%Y-%m-%d", "%m/%d/%Y", "%Y/%m/%d", "%d/%m/%Y")
DAYS_PER_YEAR = 365.25


@dataclass(frozen=True)
class ColumnSpec:
    """One raw column: its kind and optional categorical simplification.

    ``category_map`` maps raw values (matched case-insensitively, exact
    first and then longest-substring) to simplified levels; values not
    covered fall back to ``fallback`` when declared, otherwise the
    feature is flagged missing.
    """

    name: str
    kind: str
    category_map: dict[str, str] | None = None
    fallback: str | None = None

    def __post_init__(self):
        if self.kind not in COLUMN_KINDS:
            raise ConfigError(
                f"column {self.name!r}: unknown kind {self.kind!r}, "
                f"expected one of {COLUMN_KINDS}"
            )

    def simplify(self, raw: str) -> str | None:
        """Apply the category map; None means no level could be assigned."""
        value = raw.strip()
        if self.category_map is None:
            return value if value else None
        upper = value.upper()
        exact = {k.upper(): v for k, v in self.category_map.items()}
        if upper in exact:
            return exact[upper]
        for key in sorted(exact, key=len, reverse=True):
            if key and key in upper:
                return exact[key]
        return self.fallback


@dataclass(frozen=True)
class DerivedSpec:
    """A feature computed as the year difference end - start (days/365.25)."""

    name: str
    start: str
    end: str
    clamp_min: float | None = None


@dataclass(frozen=True)
class DecisionRule:
    """Maps raw decision strings to the binary response.

    Positive (coded 1) is the decision implying the undesirable event is
    likely; labels are matched case-insensitively after trimming.
    """

    column: str
    positive_labels: tuple[str, ...]
    negative_labels: tuple[str, ...]

    def __post_init__(self):
        pos = {p.strip().upper() for p in self.positive_labels}
        neg = {n.strip().upper() for n in self.negative_labels}
        if pos & neg:
            raise ConfigError(
                f"decision labels appear on both sides: {sorted(pos & neg)}"
            )


def binarize_decision(raw: str, rule: DecisionRule) -> int | None:
    """Return 1 (positive), 0 (negative), or None for an unknown label."""
    label = raw.strip().upper()
    if label in {p.strip().upper() for p in rule.positive_labels}:
        return 1
    if label in {n.strip().upper() for n in rule.negative_labels}:
        return 0
    return None


@dataclass(frozen=True)
class TableSchema:
    columns: tuple[ColumnSpec, ...]
    decision: DecisionRule
    derived: tuple[DerivedSpec, ...] = ()
    id_column: str | None = None

    def __post_init__(self):
        decision_cols = [c for c in self.columns if c.kind == "decision"]
        if len(decision_cols) != 1:
            raise ConfigError("schema must declare exactly one decision column")
        if decision_cols[0].name != self.decision.column:
            raise ConfigError(
                f"decision rule names column {self.decision.column!r} but the "
                f"decision-kind column is {decision_cols[0].name!r}"
            )
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ConfigError("schema declares duplicate column names")
        date_names = {c.name for c in self.columns if c.kind == "date"}
        for spec in self.derived:
            for endpoint in (spec.start, spec.end):
                if endpoint not in date_names:
                    raise ConfigError(
                        f"derived feature {spec.name!r} references "
                        f"{endpoint!r}, which is not a declared date column"
                    )

    def column(self, name: str) -> ColumnSpec:
        for c in self.columns:
            if c.name == name:
                return c
        raise ConfigError(f"no column named {name!r} in schema")


@dataclass(frozen=True)
class CaseRecord:
    """One decision case: typed feature values plus the binary decision."""

    id: str
    features: dict
    decision: int | None
    missing: frozenset = frozenset()
    flags: tuple[str, ...] = ()

    def with_feature(self, name: str, value) -> "CaseRecord":
        features = dict(self.features)
        features[name] = value
        return replace(self, features=features)


@dataclass
class LoadResult:
    records: list[CaseRecord]
    n_rows: int
    dropped_unknown_decision: int


def parse_date(text: str) -> date | None:
    value = text.strip()
    if not value:
        return None
    for fmt in _DATE_FORMATS:
        try:
            return datetime.strptime(value, fmt).date()
        except ValueError:
            continue
    return None


def load_table(path, schema: TableSchema) -> LoadResult:
    """Read a CSV decision table into typed records.

    Rows whose decision label is unknown are dropped and counted. Cell
    values that fail to parse are flagged missing on the record rather
    than dropped here, so callers can decide what completeness to demand.
    """
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        declared = [c.name for c in schema.columns]
        if schema.id_column:
            declared.append(schema.id_column)
        missing_cols = [name for name in declared if name not in header]
        if missing_cols:
            raise DataError(f"input is missing declared columns: {missing_cols}")

        records: list[CaseRecord] = []
        dropped = 0
        n_rows = 0
        for i, row in enumerate(reader):
            n_rows += 1
            label = binarize_decision(row[schema.decision.column] or "", schema.decision)
            if label is None:
                dropped += 1
                continue
            features: dict = {}
            missing: set[str] = set()
            for col in schema.columns:
                if col.kind == "decision":
                    continue
                raw = (row.get(col.name) or "").strip()
                if col.kind == "numeric":
                    try:
                        features[col.name] = float(raw)
                    except ValueError:
                        missing.add(col.name)
                elif col.kind == "date":
                    parsed = parse_date(raw)
                    if parsed is None:
                        missing.add(col.name)
                    else:
                        features[col.name] = parsed
                else:
                    level = col.simplify(raw)
                    if level is None:
                        missing.add(col.name)
                    else:
                        features[col.name] = level
            case_id = f"row{i}"
            if schema.id_column:
                case_id = (row[schema.id_column] or "").strip() or case_id
            records.append(
                CaseRecord(
                    id=case_id,
                    features=features,
                    decision=label,
                    missing=frozenset(missing),
                )
            )
    return LoadResult(records=records, n_rows=n_rows, dropped_unknown_decision=dropped)


def load_cases(path, schema: TableSchema) -> list[CaseRecord]:
    """Read new cases for elicitation: like load_table, but the decision
    column may be absent or blank (decision=None), and a malformed case
    is a fatal error naming the offending fields instead of a drop."""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        feature_cols = [c for c in schema.columns if c.kind != "decision"]
        missing_cols = [c.name for c in feature_cols if c.name not in header]
        if missing_cols:
            raise DataError(f"case file is missing columns: {missing_cols}")
        records = []
        for i, row in enumerate(reader):
            decision = None
            raw_decision = (row.get(schema.decision.column) or "").strip()
            if raw_decision:
                decision = binarize_decision(raw_decision, schema.decision)
            features: dict = {}
            bad: list[str] = []
            for col in feature_cols:
                raw = (row.get(col.name) or "").strip()
                if col.kind == "numeric":
                    try:
                        features[col.name] = float(raw)
                    except ValueError:
                        bad.append(col.name)
                elif col.kind == "date":
                    parsed = parse_date(raw)
                    if parsed is None:
                        bad.append(col.name)
                    else:
                        features[col.name] = parsed
                else:
                    level = col.simplify(raw)
                    if level is None:
                        bad.append(col.name)
                    else:
                        features[col.name] = level
            if bad:
                raise DataError(f"case row {i}: unusable fields {bad}")
            case_id = f"case{i}"
            if schema.id_column and schema.id_column in header:
                case_id = (row.get(schema.id_column) or "").strip() or case_id
            records.append(CaseRecord(id=case_id, features=features, decision=decision))
    return records


def years_between(start: date, end: date) -> float:
    return (end - start).days / DAYS_PER_YEAR


def derive_features(record: CaseRecord, schema: TableSchema) -> CaseRecord:
    """Compute year-difference features declared by the schema.

    A negative difference below a declared clamp is clamped and flagged,
    matching the reading that e.g. a release date before the interview
    encodes an already-due release rather than a data error.
    """
    features = dict(record.features)
    missing = set(record.missing)
    flags = list(record.flags)
    for spec in schema.derived:
        start = features.get(spec.start)
        end = features.get(spec.end)
        if start is None or end is None:
            missing.add(spec.name)
            continue
        value = years_between(start, end)
        if spec.clamp_min is not None and value < spec.clamp_min:
            value = spec.clamp_min
            flags.append(f"{spec.name}:clamped")
        features[spec.name] = value
    return replace(
        record,
        features=features,
        missing=frozenset(missing),
        flags=tuple(flags),
    )


def derive_all(records: list[CaseRecord], schema: TableSchema) -> list[CaseRecord]:
    return [derive_features(r, schema) for r in records]


def drop_incomplete(
    records: list[CaseRecord], required: tuple[str, ...]
) -> tuple[list[CaseRecord], int]:
    """Drop records missing any required feature; no imputation."""
    kept = []
    for record in records:
        if any(name in record.missing or name not in record.features for name in required):
            continue
        kept.append(record)
    return kept, len(records) - len(kept)


@dataclass(frozen=True)
class SplitPlan:
    train_fraction: float
    replicate_count: int
    base_seed: int

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(
                f"train_fraction must lie in (0, 1), got {self.train_fraction}"
            )
        if self.replicate_count < 1:
            raise ConfigError("replicate_count must be >= 1")

    def train_size(self, n: int) -> int:
        """ceil(train_fraction * n), exact for decimal fractions.

        The fraction is rationalised before multiplying so that e.g.
        0.8 * 9580 cannot creep above its true integer value in floats.
        """
        frac = Fraction(self.train_fraction).limit_denominator(1_000_000)
        return int(math.ceil(frac * n))

    def to_dict(self) -> dict:
        return {
            "train_fraction": self.train_fraction,
            "replicate_count": self.replicate_count,
            "base_seed": self.base_seed,
        }


def split_indices(n: int, plan: SplitPlan, replicate: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic disjoint train/test row indices for one replicate."""
    if n < 2:
        raise DataError(f"need at least 2 rows to split, got {n}")
    if not 0 <= replicate < plan.replicate_count:
        raise DataError(
            f"replicate {replicate} outside plan with {plan.replicate_count} replicates"
        )
    rng = rng_stream(plan.base_seed, "split", replicate)
    permutation = rng.permutation(n)
    size = plan.train_size(n)
    train = np.sort(permutation[:size])
    test = np.sort(permutation[size:])
    return train, test


def partition_fingerprint(train: np.ndarray, test: np.ndarray) -> str:
    """Stable hex digest of a partition, for shared-split assertions."""
    import hashlib

    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(train, dtype=np.int64).tobytes())
    digest.update(b"|")
    digest.update(np.ascontiguousarray(test, dtype=np.int64).tobytes())
    return digest.hexdigest()
