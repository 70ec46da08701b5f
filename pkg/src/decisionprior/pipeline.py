"""End-to-end orchestration: records -> splits -> fits -> reports.

A fitted model is persisted as a bundle directory: a manifest, plus one
subdirectory per replicate (and optionally a full-data fit) holding the
encoder, the split, the draws, and the convergence report. Every file is
written deterministically, so a rerun with the same config and seed is
byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .diagnostics import (
    CaseSummary,
    DiagnosticsReport,
    diagnostics_report,
    five_split_average,
    summarize_cases,
)
from .encoding import CaseEncoder, EncodedDataset, encode
from .errors import ConfigError, DataError
from .estimator import BayesianLogisticRegression
from .ingest import (
    CaseRecord,
    SplitPlan,
    TableSchema,
    derive_all,
    drop_incomplete,
    load_table,
    partition_fingerprint,
    split_indices,
)
from .sampler import PosteriorChain, export_trace_csv
from .seeding import derive_seed

FULL_FIT = "full"


@dataclass(frozen=True)
class ModelSpec:
    """Which derived features enter the model, and how."""

    numeric: tuple[str, ...]
    categorical: tuple[str, ...]
    reference_levels: dict = field(default_factory=dict)
    standardize: bool = True

    def __post_init__(self):
        overlap = set(self.numeric) & set(self.categorical)
        if overlap:
            raise ConfigError(f"variables listed as both kinds: {sorted(overlap)}")
        if not self.numeric and not self.categorical:
            raise ConfigError("model needs at least one predictor variable")

    @property
    def variables(self) -> tuple[str, ...]:
        return self.numeric + self.categorical

    def encoder(self) -> CaseEncoder:
        return CaseEncoder(
            numeric=self.numeric,
            categorical=self.categorical,
            reference_levels=self.reference_levels,
            standardize=self.standardize,
        )

    def to_dict(self) -> dict:
        return {
            "numeric": list(self.numeric),
            "categorical": list(self.categorical),
            "reference_levels": dict(self.reference_levels),
            "standardize": self.standardize,
        }


@dataclass
class PreparedData:
    records: list[CaseRecord]
    n_rows: int
    dropped_unknown_decision: int
    dropped_incomplete: int


def prepare_records(
    path, schema: TableSchema, model_spec: ModelSpec
) -> PreparedData:
    """Load, derive and filter records to those complete for the model."""
    loaded = load_table(path, schema)
    derived = derive_all(loaded.records, schema)
    kept, dropped = drop_incomplete(derived, model_spec.variables)
    if not kept:
        raise DataError("no usable records after dropping incomplete rows")
    return PreparedData(
        records=kept,
        n_rows=loaded.n_rows,
        dropped_unknown_decision=loaded.dropped_unknown_decision,
        dropped_incomplete=dropped,
    )


@dataclass
class FitArtifacts:
    """Everything produced by fitting one partition of the records."""

    name: str
    estimator: BayesianLogisticRegression
    train: EncodedDataset
    test: EncodedDataset | None
    train_indices: np.ndarray
    test_indices: np.ndarray
    fingerprint: str

    @property
    def chains(self) -> list[PosteriorChain]:
        return self.estimator.chains_

    @property
    def encoder(self) -> CaseEncoder:
        return self.train.encoder


def _make_estimator(
    seed: int, prior: dict, sampler: dict, workers: int
) -> BayesianLogisticRegression:
    return BayesianLogisticRegression(
        prior_mean=prior.get("mean", 0.0),
        prior_scale=prior.get("scale_value", 0.001),
        prior_parameterization=prior.get("scale_parameterization", "precision"),
        chains=sampler.get("chains", 4),
        iterations=sampler.get("iterations", 20000),
        burn_in=sampler.get("burn_in", 5000),
        adapt_window=sampler.get("adapt_window", 50),
        target_acceptance=sampler.get("target_acceptance", 0.234),
        seed=seed,
        add_intercept=False,
        workers=workers,
    )


def fit_partition(
    records: list[CaseRecord],
    train_idx: np.ndarray,
    test_idx: np.ndarray,
    model_spec: ModelSpec,
    seed: int,
    prior: dict,
    sampler: dict,
    workers: int = 1,
    name: str = FULL_FIT,
) -> FitArtifacts:
    """Encode a train/test partition and fit the estimator on train."""
    train_records = [records[i] for i in train_idx]
    test_records = [records[i] for i in test_idx]
    encoder = model_spec.encoder()
    provenance = {"fit": name, "seed": seed}
    train_ds, test_ds = encode(train_records, test_records, encoder, provenance)
    if not test_records:
        test_ds = None
    estimator = _make_estimator(seed, prior, sampler, workers)
    estimator.fit(train_ds.design, train_ds.response)
    return FitArtifacts(
        name=name,
        estimator=estimator,
        train=train_ds,
        test=test_ds,
        train_indices=np.asarray(train_idx),
        test_indices=np.asarray(test_idx),
        fingerprint=partition_fingerprint(np.asarray(train_idx), np.asarray(test_idx)),
    )


def fit_replicate(
    records: list[CaseRecord],
    model_spec: ModelSpec,
    plan: SplitPlan,
    replicate: int,
    prior: dict,
    sampler: dict,
    workers: int = 1,
    model_name: str = FULL_FIT,
) -> FitArtifacts:
    train_idx, test_idx = split_indices(len(records), plan, replicate)
    seed = derive_seed(plan.base_seed, "fit", model_name, replicate)
    return fit_partition(
        records,
        train_idx,
        test_idx,
        model_spec,
        seed,
        prior,
        sampler,
        workers,
        name=f"replicate_{replicate}",
    )


def fit_full(
    records: list[CaseRecord],
    model_spec: ModelSpec,
    base_seed: int,
    prior: dict,
    sampler: dict,
    workers: int = 1,
    model_name: str = FULL_FIT,
) -> FitArtifacts:
    all_idx = np.arange(len(records))
    seed = derive_seed(base_seed, "fit", model_name, FULL_FIT)
    return fit_partition(
        records,
        all_idx,
        np.array([], dtype=int),
        model_spec,
        seed,
        prior,
        sampler,
        workers,
        name=FULL_FIT,
    )


def evaluate_fit(
    artifacts: FitArtifacts,
    m: int = 100,
    entropy_mode: str = "mean",
    include_alternative: bool = False,
    calibration_bins: int = 10,
) -> tuple[list[CaseSummary], DiagnosticsReport]:
    """Score a fitted replicate on its held-out test set."""
    if artifacts.test is None or artifacts.test.n == 0:
        raise DataError("fit has no test partition to evaluate")
    matrix = artifacts.estimator.sample_proba(artifacts.test.design, m=m)
    summaries = summarize_cases(
        matrix,
        artifacts.test.response,
        case_ids=list(artifacts.test.case_ids),
        entropy_mode=entropy_mode,
        include_alternative=include_alternative,
    )
    return summaries, diagnostics_report(summaries, calibration_bins=calibration_bins)


@dataclass
class ProtocolResult:
    model_name: str
    replicates: list[FitArtifacts]
    reports: list[DiagnosticsReport]
    averaged: DiagnosticsReport
    fingerprints: list[str]


def run_protocol(
    records: list[CaseRecord],
    model_spec: ModelSpec,
    plan: SplitPlan,
    prior: dict,
    sampler: dict,
    m: int = 100,
    entropy_mode: str = "mean",
    include_alternative: bool = False,
    workers: int = 1,
    model_name: str = FULL_FIT,
) -> ProtocolResult:
    """Fit and evaluate every replicate of the split plan; average."""
    artifacts = []
    reports = []
    for r in range(plan.replicate_count):
        art = fit_replicate(
            records, model_spec, plan, r, prior, sampler, workers, model_name
        )
        _, report = evaluate_fit(
            art, m=m, entropy_mode=entropy_mode, include_alternative=include_alternative
        )
        artifacts.append(art)
        reports.append(report)
    return ProtocolResult(
        model_name=model_name,
        replicates=artifacts,
        reports=reports,
        averaged=five_split_average(reports),
        fingerprints=[a.fingerprint for a in artifacts],
    )


# ---------------------------------------------------------------------------
# bundle persistence

def write_json(payload: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def save_fit(directory, artifacts: FitArtifacts, sampler_config: dict) -> None:
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    export_trace_csv(artifacts.chains, directory / "draws.csv")
    write_json(artifacts.encoder.to_dict(), directory / "encoder.json")
    write_json(
        {
            "name": artifacts.name,
            "train": [int(i) for i in artifacts.train_indices],
            "test": [int(i) for i in artifacts.test_indices],
            "fingerprint": artifacts.fingerprint,
        },
        directory / "split.json",
    )
    chains_meta = {
        "sampler": dict(sampler_config),
        "seed": artifacts.estimator.seed,
        "chains": [
            {
                "chain_index": c.chain_index,
                "acceptance_rate": c.acceptance_rate,
                "proposal_scales": [float(s) for s in c.proposal_scales],
                "iterations": c.iterations,
                "burn_in": c.burn_in,
            }
            for c in artifacts.chains
        ],
    }
    write_json(chains_meta, directory / "chains.json")
    if artifacts.estimator.convergence_ is not None:
        write_json(
            artifacts.estimator.convergence_.to_dict(), directory / "convergence.json"
        )


@dataclass
class LoadedFit:
    chains: list[PosteriorChain]
    encoder: CaseEncoder
    split: dict
    convergence: dict | None


def load_fit(directory) -> LoadedFit:
    from pathlib import Path

    from .sampler import load_trace_csv

    directory = Path(directory)
    chains = load_trace_csv(directory / "draws.csv")
    meta = read_json(directory / "chains.json")
    by_index = {c["chain_index"]: c for c in meta["chains"]}
    restored = []
    for chain in chains:
        info = by_index[chain.chain_index]
        restored.append(
            replace(
                chain,
                acceptance_rate=info["acceptance_rate"],
                proposal_scales=np.asarray(info["proposal_scales"]),
                seed=meta["seed"],
                iterations=info["iterations"],
                burn_in=info["burn_in"],
            )
        )
    encoder = CaseEncoder.from_dict(read_json(directory / "encoder.json"))
    split = read_json(directory / "split.json")
    convergence_path = directory / "convergence.json"
    convergence = read_json(convergence_path) if convergence_path.exists() else None
    return LoadedFit(
        chains=restored, encoder=encoder, split=split, convergence=convergence
    )
