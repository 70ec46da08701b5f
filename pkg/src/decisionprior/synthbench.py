"""Synthetic decision makers with known coefficients, plus the oracles
the acceptance suite checks the pipeline against.

A scenario draws case features from a declared recipe, forms the true
design matrix, and samples decisions from Bernoulli(sigmoid(theta @ x)).
Generated records round-trip through the normal ingest CSV path, so the
bench exercises the production pipeline end to end.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError
from .ingest import (
    CaseRecord,
    ColumnSpec,
    DecisionRule,
    TableSchema,
)
from .model import inverse_link
from .sampler import PosteriorChain, pooled_draws
from .seeding import rng_stream

DECISION_COLUMN = "decision"
POSITIVE_LABEL = "act"
NEGATIVE_LABEL = "pass"


@dataclass(frozen=True)
class ScenarioColumn:
    """One feature recipe: standard-normal numeric or categorical levels
    with sampling probabilities. The first level listed is the reference
    (encoded as all-zero dummies)."""

    name: str
    kind: str
    levels: dict | None = None

    def __post_init__(self):
        if self.kind not in ("normal", "categorical"):
            raise ConfigError(f"unknown scenario column kind {self.kind!r}")
        if self.kind == "categorical":
            if not self.levels:
                raise ConfigError(f"categorical column {self.name!r} needs levels")
            total = sum(self.levels.values())
            if abs(total - 1.0) > 1e-9:
                raise ConfigError(
                    f"level probabilities for {self.name!r} sum to {total}, not 1"
                )

    @property
    def dummy_levels(self) -> list[str]:
        if self.kind != "categorical":
            return []
        return list(self.levels)[1:]


@dataclass(frozen=True)
class Scenario:
    name: str
    true_theta: tuple[float, ...]
    columns: tuple[ScenarioColumn, ...]
    n: int
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("scenario needs n >= 1")
        d = 1 + sum(
            1 if c.kind == "normal" else len(c.dummy_levels) for c in self.columns
        )
        if len(self.true_theta) != d:
            raise ConfigError(
                f"true_theta has {len(self.true_theta)} entries, design has {d} "
                "columns (intercept first)"
            )

    @property
    def dim(self) -> int:
        return len(self.true_theta)

    def feature_names(self) -> list[str]:
        names = ["intercept"]
        for col in self.columns:
            if col.kind == "normal":
                names.append(col.name)
            else:
                names.extend(f"{col.name}={level}" for level in col.dummy_levels)
        return names


def generate(scenario: Scenario) -> list[CaseRecord]:
    """Draw cases and decisions; deterministic for a given scenario seed."""
    rng = rng_stream(scenario.seed, "scenario", scenario.name)
    n = scenario.n
    design = np.zeros((n, scenario.dim))
    design[:, 0] = 1.0
    features_per_case: list[dict] = [dict() for _ in range(n)]
    col = 1
    for column in scenario.columns:
        if column.kind == "normal":
            values = rng.standard_normal(n)
            design[:, col] = values
            for i in range(n):
                features_per_case[i][column.name] = float(values[i])
            col += 1
        else:
            level_names = list(column.levels)
            probs = np.array([column.levels[l] for l in level_names])
            choices = rng.choice(len(level_names), size=n, p=probs)
            dummies = column.dummy_levels
            dummy_index = {level: k for k, level in enumerate(dummies)}
            for i in range(n):
                level = level_names[choices[i]]
                features_per_case[i][column.name] = level
                k = dummy_index.get(level)
                if k is not None:
                    design[i, col + k] = 1.0
            col += len(dummies)
    theta = np.asarray(scenario.true_theta)
    p = inverse_link(design @ theta)
    y = (rng.random(n) < p).astype(np.int8)
    return [
        CaseRecord(
            id=f"case{i}",
            features=features_per_case[i],
            decision=int(y[i]),
        )
        for i in range(n)
    ]


def scenario_schema(scenario: Scenario) -> TableSchema:
    """Ingest schema matching write_scenario_csv output."""
    columns = [
        ColumnSpec(name=c.name, kind="numeric" if c.kind == "normal" else "categorical")
        for c in scenario.columns
    ]
    columns.append(ColumnSpec(name=DECISION_COLUMN, kind="decision"))
    return TableSchema(
        columns=tuple(columns),
        decision=DecisionRule(
            column=DECISION_COLUMN,
            positive_labels=(POSITIVE_LABEL,),
            negative_labels=(NEGATIVE_LABEL,),
        ),
        id_column="id",
    )


def scenario_reference_levels(scenario: Scenario) -> dict[str, str]:
    return {
        c.name: list(c.levels)[0] for c in scenario.columns if c.kind == "categorical"
    }


def write_scenario_csv(records: list[CaseRecord], scenario: Scenario, path) -> None:
    """Write generated records in the standard ingest CSV format."""
    feature_cols = [c.name for c in scenario.columns]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + feature_cols + [DECISION_COLUMN])
        for record in records:
            row = [record.id]
            for name in feature_cols:
                value = record.features[name]
                row.append(repr(value) if isinstance(value, float) else str(value))
            row.append(POSITIVE_LABEL if record.decision == 1 else NEGATIVE_LABEL)
            writer.writerow(row)


@dataclass
class PredictiveOracle:
    """High-resolution empirical predictive distribution for one case."""

    sorted_p: np.ndarray

    @property
    def n_draws(self) -> int:
        return self.sorted_p.shape[0]

    def cdf(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        return np.searchsorted(self.sorted_p, x, side="right") / self.n_draws

    def mean(self) -> float:
        return float(self.sorted_p.mean())


def predictive_oracle(
    chains: list[PosteriorChain], case_row, min_draws: int = 100_000
) -> PredictiveOracle:
    """Empirical cdf of the predictive probability over all kept draws.

    This is the brute-force reference the thin m-sample elicitation is
    compared against, so it deliberately shares no thinning logic with
    the elicitation path.
    """
    draws = pooled_draws(chains)
    if draws.shape[0] < min_draws:
        raise DataError(
            f"oracle needs at least {min_draws} pooled draws, got {draws.shape[0]}"
        )
    x = np.asarray(case_row, dtype=np.float64)
    p = inverse_link(draws @ x)
    return PredictiveOracle(sorted_p=np.sort(p))


@dataclass
class BenchProperty:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.detail}"


@dataclass
class BenchReport:
    properties: list[BenchProperty] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.properties)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "properties": [
                {"name": p.name, "passed": p.passed, "detail": p.detail}
                for p in self.properties
            ],
        }
