"""Variable-influence tooling: ablations and counterfactual sweeps.

Ablation refits the model with whole variable groups removed (a numeric
column, or a categorical together with its entire dummy block) under the
same split plan as the full model, so accuracy differences are
attributable to the removed variables rather than to partition luck.
Counterfactual sweeps hold one case fixed, vary a single attribute, and
re-elicit the prior from the same posterior draws.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .diagnostics import DiagnosticsReport, quantile, report_table_rows
from .elicit import FitReport, density_grid, elicit_prior
from .encoding import CaseEncoder
from .errors import ConfigError, DataError
from .ingest import CaseRecord, SplitPlan
from .pipeline import FULL_FIT, ModelSpec, ProtocolResult, run_protocol
from .sampler import PosteriorChain, pooled_draws


@dataclass(frozen=True)
class AblationSpec:
    name: str
    removed_groups: tuple[str, ...]

    def __post_init__(self):
        if not self.removed_groups:
            raise ConfigError(f"ablation {self.name!r} removes nothing")
        if "intercept" in self.removed_groups:
            raise ConfigError("the intercept is not removable")


def apply_ablation(model_spec: ModelSpec, ablation: AblationSpec) -> ModelSpec:
    """Model spec with the ablated variable groups dropped."""
    known = set(model_spec.variables)
    unknown = [g for g in ablation.removed_groups if g not in known]
    if unknown:
        raise ConfigError(
            f"ablation {ablation.name!r} removes unknown variables: {unknown}"
        )
    removed = set(ablation.removed_groups)
    numeric = tuple(v for v in model_spec.numeric if v not in removed)
    categorical = tuple(v for v in model_spec.categorical if v not in removed)
    if not numeric and not categorical:
        raise ConfigError(
            f"ablation {ablation.name!r} would remove every predictor"
        )
    references = {
        k: v for k, v in model_spec.reference_levels.items() if k in set(categorical)
    }
    return replace(
        model_spec,
        numeric=numeric,
        categorical=categorical,
        reference_levels=references,
    )


@dataclass
class ComparativeReport:
    """Averaged diagnostics for the full model and each ablation, plus
    optional per-model elicited priors for designated probe cases."""

    model_names: list[str]
    averaged: dict[str, DiagnosticsReport]
    per_replicate: dict[str, list[DiagnosticsReport]]
    fingerprints: list[str]
    probe_priors: dict[str, dict[str, FitReport]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "model_names": list(self.model_names),
            "averaged": {k: v.to_dict() for k, v in self.averaged.items()},
            "per_replicate": {
                k: [r.to_dict() for r in v] for k, v in self.per_replicate.items()
            },
            "fingerprints": list(self.fingerprints),
            "probe_priors": {
                model: {case: fit.to_dict() for case, fit in cases.items()}
                for model, cases in self.probe_priors.items()
            },
        }


def ablate(
    records: list[CaseRecord],
    model_spec: ModelSpec,
    ablations: list[AblationSpec],
    plan: SplitPlan,
    prior: dict,
    sampler: dict,
    m: int = 100,
    probe_ids: tuple[str, ...] = (),
    entropy_mode: str = "mean",
    workers: int = 1,
) -> ComparativeReport:
    """Run the split protocol for the full model and every ablation.

    All models share the plan's partitions; the shared-split discipline
    is asserted by comparing partition fingerprints across models.
    """
    jobs: list[tuple[str, ModelSpec]] = [(FULL_FIT, model_spec)]
    for ablation in ablations:
        jobs.append((ablation.name, apply_ablation(model_spec, ablation)))

    by_id = {r.id: r for r in records}
    for case_id in probe_ids:
        if case_id not in by_id:
            raise DataError(f"probe case {case_id!r} not found in the records")

    results: dict[str, ProtocolResult] = {}
    for name, spec in jobs:
        results[name] = run_protocol(
            records,
            spec,
            plan,
            prior,
            sampler,
            m=m,
            entropy_mode=entropy_mode,
            workers=workers,
            model_name=name,
        )

    fingerprints = results[FULL_FIT].fingerprints
    for name, result in results.items():
        if result.fingerprints != fingerprints:
            raise DataError(
                f"model {name!r} saw different splits than the full model; "
                "shared-seed discipline violated"
            )

    probe_priors: dict[str, dict[str, FitReport]] = {}
    for name, result in results.items():
        first = result.replicates[0]
        cases = {}
        for case_id in probe_ids:
            row = first.encoder.encode_case(by_id[case_id])
            cases[case_id] = elicit_prior(
                first.chains, row, m=m, case_id=case_id
            )
        if cases:
            probe_priors[name] = cases

    return ComparativeReport(
        model_names=[name for name, _ in jobs],
        averaged={name: results[name].averaged for name, _ in jobs},
        per_replicate={name: results[name].reports for name, _ in jobs},
        fingerprints=fingerprints,
        probe_priors=probe_priors,
    )


def comparison_table(report: ComparativeReport) -> list[list[str]]:
    """Rows of (metric, one column per model), ready for CSV."""
    header = ["Accuracy Measure"] + list(report.model_names)
    rows = [header]
    metric_rows = {
        name: report_table_rows(report.averaged[name]) for name in report.model_names
    }
    labels = [label for label, _ in metric_rows[report.model_names[0]]]
    for i, label in enumerate(labels):
        row = [label]
        for name in report.model_names:
            row.append(repr(round(metric_rows[name][i][1], 6)))
        rows.append(row)
    return rows


def export_comparison_csv(report: ComparativeReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in comparison_table(report):
            fh.write(",".join(row) + "\n")


@dataclass
class CounterfactualResult:
    case_id: str
    attribute: str
    values: list
    fits: list[FitReport]

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "attribute": self.attribute,
            "values": [str(v) for v in self.values],
            "fits": [f.to_dict() for f in self.fits],
        }


def counterfactual(
    chains: list[PosteriorChain],
    encoder: CaseEncoder,
    record: CaseRecord,
    attribute: str,
    values: list,
    m: int = 100,
    families=("beta", "logitnormal"),
) -> CounterfactualResult:
    """Elicit one prior per attribute value, all else held fixed.

    Re-encoding uses the frozen encoder, so a sweep value equal to the
    case's current attribute reproduces the plain elicitation exactly.
    """
    if not values:
        raise DataError("counterfactual sweep needs at least one value")
    if attribute in encoder.categorical:
        known = set(encoder.levels_[attribute])
        for value in values:
            if str(value) not in known:
                raise DataError(
                    f"unknown level {value!r} for {attribute!r}; "
                    f"known levels: {sorted(known)}"
                )
        cast = [str(v) for v in values]
    elif attribute in encoder.numeric:
        try:
            cast = [float(v) for v in values]
        except (TypeError, ValueError) as exc:
            raise DataError(f"non-numeric sweep value for {attribute!r}: {exc}")
    else:
        raise DataError(
            f"{attribute!r} is not a model feature "
            f"(numeric: {list(encoder.numeric)}, categorical: {list(encoder.categorical)})"
        )

    current = record.features.get(attribute)
    fits = []
    for value in cast:
        modified = record.with_feature(attribute, value)
        row = encoder.encode_case(modified)
        # a no-op sweep keeps the plain case id so its output is
        # indistinguishable from ordinary elicitation
        case_id = record.id if value == current else f"{record.id}[{attribute}={value}]"
        fits.append(
            elicit_prior(chains, row, m=m, families=families, case_id=case_id)
        )
    return CounterfactualResult(
        case_id=record.id, attribute=attribute, values=list(values), fits=fits
    )


def counterfactual_density_columns(
    result: CounterfactualResult, points: int = 512
) -> dict[str, np.ndarray]:
    """Multi-series density columns (one per swept value) for overlays."""
    columns: dict[str, np.ndarray] = {}
    for value, fit in zip(result.values, result.fits):
        grid = density_grid(fit.selected, points=points)
        columns.setdefault("x", grid["x"])
        columns[f"pdf[{result.attribute}={value}]"] = grid["pdf_fitted"]
    return columns


@dataclass
class CoefficientSummary:
    name: str
    mean: float
    ci_lo: float
    ci_hi: float
    contains_zero: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "mean": self.mean,
            "ci_lo": self.ci_lo,
            "ci_hi": self.ci_hi,
            "contains_zero": self.contains_zero,
        }


def coefficient_relevance(
    chains: list[PosteriorChain], feature_names: list[str] | None = None
) -> list[CoefficientSummary]:
    """Posterior mean and equal-tailed 95% CI per coefficient, with a
    flag marking coefficients whose CI contains zero."""
    draws = pooled_draws(chains)
    d = draws.shape[1]
    names = feature_names or [f"theta_{j}" for j in range(d)]
    if len(names) != d:
        raise DataError(f"got {len(names)} names for {d} coefficients")
    out = []
    for j in range(d):
        ordered = np.sort(draws[:, j])
        lo = quantile(ordered, 0.025)
        hi = quantile(ordered, 0.975)
        out.append(
            CoefficientSummary(
                name=names[j],
                mean=float(draws[:, j].mean()),
                ci_lo=lo,
                ci_hi=hi,
                contains_zero=bool(lo <= 0.0 <= hi),
            )
        )
    return out
