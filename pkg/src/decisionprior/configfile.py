"""YAML configuration: run configs, table schemas, bench scenarios.

Paths inside a config file are resolved relative to the file itself, so
a config directory can be checked in and run from anywhere.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .analysis import AblationSpec
from .errors import ConfigError
from .ingest import ColumnSpec, DecisionRule, DerivedSpec, SplitPlan, TableSchema
from .pipeline import ModelSpec
from .synthbench import Scenario, ScenarioColumn

DEFAULT_SAMPLER = {
    "chains": 4,
    "iterations": 20000,
    "burn_in": 5000,
    "adapt_window": 50,
    "target_acceptance": 0.234,
}
DEFAULT_PRIOR = {
    "mean": 0.0,
    "scale_parameterization": "precision",
    "scale_value": 0.001,
}


def load_yaml(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            payload = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}")
    if not isinstance(payload, dict):
        raise ConfigError(f"{path} must contain a mapping at top level")
    return payload


def config_digest(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def parse_schema(payload: dict, origin: str = "schema") -> TableSchema:
    try:
        decision_cfg = payload["decision"]
        rule = DecisionRule(
            column=decision_cfg["column"],
            positive_labels=tuple(decision_cfg["positive"]),
            negative_labels=tuple(decision_cfg["negative"]),
        )
        columns = []
        for entry in payload["columns"]:
            columns.append(
                ColumnSpec(
                    name=entry["name"],
                    kind=entry["kind"],
                    category_map=entry.get("map"),
                    fallback=entry.get("fallback"),
                )
            )
        derived = tuple(
            DerivedSpec(
                name=entry["name"],
                start=entry["start"],
                end=entry["end"],
                clamp_min=entry.get("clamp_min"),
            )
            for entry in payload.get("derived", ())
        )
        return TableSchema(
            columns=tuple(columns),
            decision=rule,
            derived=derived,
            id_column=payload.get("id"),
        )
    except KeyError as exc:
        raise ConfigError(f"{origin}: missing required key {exc}")


def load_schema(path) -> TableSchema:
    return parse_schema(load_yaml(path), origin=str(path))


@dataclass
class RunSettings:
    """Everything a CLI command needs, parsed and path-resolved."""

    raw: dict
    config_path: Path
    data_path: Path
    schema_path: Path
    schema: TableSchema
    model: ModelSpec
    plan: SplitPlan
    sampler: dict
    prior: dict
    seed: int
    m: int = 100
    families: tuple[str, ...] = ("beta", "logitnormal")
    entropy_mode: str = "mean"
    include_alternative_entropy: bool = False
    calibration_bins: int = 10
    fit_full: bool = True
    workers: int = 1
    export_design: bool = False
    ablations: list[AblationSpec] = field(default_factory=list)
    probe_cases: tuple[str, ...] = ()

    @property
    def digest(self) -> str:
        return config_digest(self.raw)


def _resolve(base: Path, value: str) -> Path:
    path = Path(value)
    if not path.is_absolute():
        path = (base / path).resolve()
    return path


def parse_run_config(path) -> RunSettings:
    path = Path(path).resolve()
    payload = load_yaml(path)
    base = path.parent
    try:
        seed = payload["seed"]
        if not isinstance(seed, int):
            raise ConfigError(f"{path}: seed must be an integer, got {seed!r}")
        data_path = _resolve(base, payload["data"])
        schema_path = _resolve(base, payload["schema"])
        model_cfg = payload["model"]
        model = ModelSpec(
            numeric=tuple(model_cfg.get("numeric", ())),
            categorical=tuple(model_cfg.get("categorical", ())),
            reference_levels=dict(model_cfg.get("reference_levels", {})),
            standardize=bool(model_cfg.get("standardize", True)),
        )
        split_cfg = payload.get("split", {})
        plan = SplitPlan(
            train_fraction=float(split_cfg.get("train_fraction", 0.8)),
            replicate_count=int(split_cfg.get("replicates", 5)),
            base_seed=seed,
        )
    except KeyError as exc:
        raise ConfigError(f"{path}: missing required key {exc}")

    if not data_path.exists():
        raise ConfigError(f"{path}: data file does not exist: {data_path}")
    if not schema_path.exists():
        raise ConfigError(f"{path}: schema file does not exist: {schema_path}")
    schema = load_schema(schema_path)

    sampler = {**DEFAULT_SAMPLER, **payload.get("sampler", {})}
    prior_cfg = payload.get("prior", {})
    prior = {
        "mean": prior_cfg.get("mean", DEFAULT_PRIOR["mean"]),
        "scale_parameterization": prior_cfg.get(
            "parameterization", DEFAULT_PRIOR["scale_parameterization"]
        ),
        "scale_value": prior_cfg.get("value", DEFAULT_PRIOR["scale_value"]),
    }
    elicit_cfg = payload.get("elicit", {})
    entropy_cfg = payload.get("entropy", {})
    ablations = [
        AblationSpec(name=entry["name"], removed_groups=tuple(entry["remove"]))
        for entry in payload.get("ablations", ())
    ]
    return RunSettings(
        raw=payload,
        config_path=path,
        data_path=data_path,
        schema_path=schema_path,
        schema=schema,
        model=model,
        plan=plan,
        sampler=sampler,
        prior=prior,
        seed=seed,
        m=int(elicit_cfg.get("samples", 100)),
        families=tuple(elicit_cfg.get("families", ("beta", "logitnormal"))),
        entropy_mode=entropy_cfg.get("mode", "mean"),
        include_alternative_entropy=bool(entropy_cfg.get("include_alternative", False)),
        calibration_bins=int(payload.get("calibration_bins", 10)),
        fit_full=bool(payload.get("fit_full", True)),
        workers=int(payload.get("workers", 1)),
        export_design=bool(payload.get("export_design", False)),
        ablations=ablations,
        probe_cases=tuple(payload.get("probe_cases", ())),
    )


def parse_scenario(payload: dict, origin: str = "scenario") -> Scenario:
    try:
        columns = tuple(
            ScenarioColumn(
                name=entry["name"],
                kind=entry["kind"],
                levels=entry.get("levels"),
            )
            for entry in payload["columns"]
        )
        return Scenario(
            name=payload["name"],
            true_theta=tuple(float(v) for v in payload["true_theta"]),
            columns=columns,
            n=int(payload["n"]),
            seed=int(payload["seed"]),
        )
    except KeyError as exc:
        raise ConfigError(f"{origin}: missing required key {exc}")


def load_scenario(path) -> Scenario:
    return parse_scenario(load_yaml(path), origin=str(path))
