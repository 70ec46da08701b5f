"""Command-line front door: fit, diagnose, elicit, ablate,
counterfactual, bench.

Commands hand files between each other through a model bundle directory
and are pure functions of (config, input files): rerunning a command
with the same inputs rewrites identical outputs.

Exit codes: 0 success; 2 usage or config error; 3 data error;
4 finished but convergence was flagged; 5 internal error.
"""

from __future__ import annotations

import re
import sys
from pathlib import Path

import click
import numpy as np

import decisionprior

from .analysis import (
    ablate,
    counterfactual,
    counterfactual_density_columns,
    export_comparison_csv,
)
from .configfile import (
    RunSettings,
    load_scenario,
    parse_run_config,
)
from .diagnostics import five_split_average, report_table_rows
from .elicit import (
    FitReport,
    density_grid,
    export_density_csv,
    export_samples_csv,
    predictive_samples,
)
from .encoding import export_dataset_csv
from .errors import ConfigError, DataError, DecisionPriorError
from .ingest import derive_all, load_cases
from .pipeline import (
    FULL_FIT,
    fit_full,
    fit_replicate,
    load_fit,
    prepare_records,
    read_json,
    save_fit,
    write_json,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4
EXIT_INTERNAL = 5


def _run(step):
    try:
        code = step()
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except (DataError, FileNotFoundError) as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(EXIT_DATA)
    except DecisionPriorError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INTERNAL)
    sys.exit(code or EXIT_OK)


def _load_settings(config, seed, workers, replicates) -> RunSettings:
    from .ingest import SplitPlan

    settings = parse_run_config(config)
    if seed is not None:
        settings.raw["seed"] = seed
        settings.seed = seed
    if workers is not None:
        settings.workers = workers
    if replicates is not None:
        settings.raw.setdefault("split", {})["replicates"] = replicates
    settings.plan = SplitPlan(
        train_fraction=settings.plan.train_fraction,
        replicate_count=(
            replicates if replicates is not None else settings.plan.replicate_count
        ),
        base_seed=settings.seed,
    )
    return settings


def _manifest(settings: RunSettings, prepared) -> dict:
    return {
        "config": settings.raw,
        "config_sha256": settings.digest,
        "config_path": str(settings.config_path),
        "data_path": str(settings.data_path),
        "schema_path": str(settings.schema_path),
        "seed": settings.seed,
        "package_version": decisionprior.__version__,
        "numpy_version": np.__version__,
        "n_rows": prepared.n_rows,
        "n_records": len(prepared.records),
        "dropped_unknown_decision": prepared.dropped_unknown_decision,
        "dropped_incomplete": prepared.dropped_incomplete,
        "model": settings.model.to_dict(),
        "split": settings.plan.to_dict(),
        "sampler": settings.sampler,
        "prior": settings.prior,
        "elicit": {"samples": settings.m, "families": list(settings.families)},
    }


def _safe_name(value: str) -> str:
    return re.sub(r"[^A-Za-z0-9._=-]+", "_", str(value))


@click.group()
@click.version_option(decisionprior.__version__)
def main():
    """Elicit prior distributions from an expert's decision history."""


@main.command("fit")
@click.option("--config", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--workers", type=int, default=None)
@click.option("--replicates", type=int, default=None)
def cmd_fit(config, out, seed, workers, replicates):
    """Fit the model on every replicate split (and the full data)."""

    def step():
        settings = _load_settings(config, seed, workers, replicates)
        prepared = prepare_records(settings.data_path, settings.schema, settings.model)
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_json(_manifest(settings, prepared), out_dir / "manifest.json")
        flagged = []
        for r in range(settings.plan.replicate_count):
            artifacts = fit_replicate(
                prepared.records,
                settings.model,
                settings.plan,
                r,
                settings.prior,
                settings.sampler,
                settings.workers,
            )
            save_fit(out_dir / f"replicate_{r}", artifacts, settings.sampler)
            if settings.export_design:
                export_dataset_csv(
                    artifacts.train, out_dir / f"replicate_{r}" / "design_train.csv"
                )
                export_dataset_csv(
                    artifacts.test, out_dir / f"replicate_{r}" / "design_test.csv"
                )
            report = artifacts.estimator.convergence_
            if report is not None and report.flagged:
                flagged.append(f"replicate_{r}")
            click.echo(f"fitted replicate {r} (fingerprint {artifacts.fingerprint[:12]})")
        if settings.fit_full:
            artifacts = fit_full(
                prepared.records,
                settings.model,
                settings.seed,
                settings.prior,
                settings.sampler,
                settings.workers,
            )
            save_fit(out_dir / FULL_FIT, artifacts, settings.sampler)
            report = artifacts.estimator.convergence_
            if report is not None and report.flagged:
                flagged.append(FULL_FIT)
            click.echo("fitted full-data model")
        if flagged:
            click.echo(f"convergence flagged for: {', '.join(flagged)}", err=True)
            return EXIT_CONVERGENCE
        return EXIT_OK

    _run(step)


def _load_bundle_settings(bundle: Path) -> RunSettings:
    manifest = read_json(bundle / "manifest.json")
    return parse_run_config(manifest["config_path"])


@main.command("diagnose")
@click.option("--bundle", required=True, type=click.Path())
@click.option("--out", type=click.Path(), default=None)
@click.option("--samples", "m", type=int, default=None)
def cmd_diagnose(bundle, out, m):
    """Score every fitted replicate on its test split; average them."""

    def step():
        from .plots import calibration_svg, entropy_histograms_svg

        bundle_dir = Path(bundle)
        if not (bundle_dir / "manifest.json").exists():
            raise DataError(f"no manifest.json under {bundle_dir}")
        settings = _load_bundle_settings(bundle_dir)
        m_eff = m or settings.m
        prepared = prepare_records(settings.data_path, settings.schema, settings.model)
        out_dir = Path(out) if out else bundle_dir / "diagnostics"
        out_dir.mkdir(parents=True, exist_ok=True)

        from .diagnostics import diagnostics_report, summarize_cases
        from .model import inverse_link
        from .sampler import thin_draws

        reports = []
        for r in range(settings.plan.replicate_count):
            fit_dir = bundle_dir / f"replicate_{r}"
            loaded = load_fit(fit_dir)
            test_idx = loaded.split["test"]
            if not test_idx:
                raise DataError(f"replicate {r} has an empty test split")
            test_records = [prepared.records[i] for i in test_idx]
            design = loaded.encoder.transform(test_records)
            labels = [rec.decision for rec in test_records]
            draws = thin_draws(loaded.chains, m_eff)
            matrix = inverse_link(design @ draws.T)
            summaries = summarize_cases(
                matrix,
                labels,
                case_ids=[rec.id for rec in test_records],
                entropy_mode=settings.entropy_mode,
                include_alternative=settings.include_alternative_entropy,
            )
            report = diagnostics_report(
                summaries, calibration_bins=settings.calibration_bins
            )
            reports.append(report)
            write_json(report.to_dict(), out_dir / f"report_replicate_{r}.json")

        averaged = five_split_average(reports)
        write_json(averaged.to_dict(), out_dir / "report_average.json")
        with open(out_dir / "summary_table.csv", "w", encoding="utf-8") as fh:
            fh.write("Accuracy Measure,Average\n")
            for label, value in report_table_rows(averaged):
                fh.write(f"{label},{value!r}\n")
        _write_calibration_csv(averaged, out_dir / "calibration.csv")
        _write_entropy_csv(averaged, out_dir / "entropy_histograms.csv")
        calibration_svg(averaged.calibration, out_dir / "calibration.svg")
        entropy_histograms_svg(averaged, out_dir / "entropy_histograms.svg")
        for label, value in report_table_rows(averaged):
            click.echo(f"{label}: {value:.3f}")
        return EXIT_OK

    _run(step)


def _write_calibration_csv(report, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("lo,hi,count,mean_predicted,observed_positive\n")
        for b in report.calibration.bins:
            mean_pred = "" if b.mean_predicted is None else repr(b.mean_predicted)
            observed = "" if b.observed_positive is None else repr(b.observed_positive)
            fh.write(f"{b.lo!r},{b.hi!r},{b.count},{mean_pred},{observed}\n")


def _write_entropy_csv(report, path) -> None:
    bins = len(report.entropy_all)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("lo,hi,all,correct,incorrect\n")
        for i in range(bins):
            fh.write(
                f"{i / bins!r},{(i + 1) / bins!r},{report.entropy_all[i]},"
                f"{report.entropy_correct[i]},{report.entropy_incorrect[i]}\n"
            )


def _pick_fit_dir(bundle_dir: Path, replicate: int | None) -> Path:
    if replicate is not None:
        return bundle_dir / f"replicate_{replicate}"
    full_dir = bundle_dir / FULL_FIT
    if full_dir.exists():
        return full_dir
    return bundle_dir / "replicate_0"


def _write_prior_outputs(fit: FitReport, out_dir: Path, stem: str) -> None:
    write_json(fit.to_dict(), out_dir / f"{stem}.prior.json")
    columns = density_grid(fit.selected, samples=fit.samples)
    export_density_csv(columns, out_dir / f"{stem}.density.csv")
    from .plots import density_svg

    density_svg(columns, out_dir / f"{stem}.density.svg", title=fit.case_id)


@main.command("elicit")
@click.option("--bundle", required=True, type=click.Path())
@click.option("--cases", required=True, type=click.Path())
@click.option("--out", type=click.Path(), default=None)
@click.option("--samples", "m", type=int, default=None)
@click.option("--replicate", type=int, default=None, help="Use this replicate's fit.")
def cmd_elicit(bundle, cases, out, m, replicate):
    """Elicit a prior distribution for each case in a CSV file."""

    def step():
        bundle_dir = Path(bundle)
        settings = _load_bundle_settings(bundle_dir)
        m_eff = m or settings.m
        fit_dir = _pick_fit_dir(bundle_dir, replicate)
        loaded = load_fit(fit_dir)
        records = derive_all(load_cases(cases, settings.schema), settings.schema)
        out_dir = Path(out) if out else bundle_dir / "elicited"
        out_dir.mkdir(parents=True, exist_ok=True)
        from .elicit import fit_families

        for record in records:
            bad = [
                v
                for v in settings.model.variables
                if v in record.missing or v not in record.features
            ]
            if bad:
                raise DataError(f"case {record.id!r}: missing fields {bad}")
            row = loaded.encoder.encode_case(record)
            samples = predictive_samples(
                loaded.chains, row, m=m_eff, case_id=record.id
            )
            fit = fit_families(samples, families=settings.families)
            stem = _safe_name(record.id)
            _write_prior_outputs(fit, out_dir, stem)
            export_samples_csv(samples, out_dir / f"{stem}.samples.csv")
            click.echo(
                f"{record.id}: {fit.selected.family}{tuple(round(p, 4) for p in fit.selected.params)}"
                f" ks={fit.selected.ks:.4f}"
            )
        return EXIT_OK

    _run(step)


@main.command("ablate")
@click.option("--config", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--replicates", type=int, default=None)
def cmd_ablate(config, out, seed, workers, replicates):
    """Compare the full model against configured variable ablations."""

    def step():
        settings = _load_settings(config, seed, workers, replicates)
        if not settings.ablations:
            click.echo("note: no ablations configured; reporting full model only")
        prepared = prepare_records(settings.data_path, settings.schema, settings.model)
        report = ablate(
            prepared.records,
            settings.model,
            settings.ablations,
            settings.plan,
            settings.prior,
            settings.sampler,
            m=settings.m,
            probe_ids=settings.probe_cases,
            entropy_mode=settings.entropy_mode,
            workers=settings.workers,
        )
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_json(report.to_dict(), out_dir / "comparison.json")
        export_comparison_csv(report, out_dir / "comparison_table.csv")
        for row in open(out_dir / "comparison_table.csv", encoding="utf-8"):
            click.echo(row.rstrip())
        return EXIT_OK

    _run(step)


@main.command("counterfactual")
@click.option("--bundle", required=True, type=click.Path())
@click.option("--cases", required=True, type=click.Path())
@click.option("--case-id", required=True)
@click.option("--attribute", required=True)
@click.option("--values", required=True, help="Comma-separated sweep values.")
@click.option("--out", type=click.Path(), default=None)
@click.option("--samples", "m", type=int, default=None)
@click.option("--replicate", type=int, default=None)
def cmd_counterfactual(bundle, cases, case_id, attribute, values, out, m, replicate):
    """Sweep one attribute of one case and elicit a prior per value."""

    def step():
        from .plots import density_svg

        bundle_dir = Path(bundle)
        settings = _load_bundle_settings(bundle_dir)
        m_eff = m or settings.m
        loaded = load_fit(_pick_fit_dir(bundle_dir, replicate))
        records = derive_all(load_cases(cases, settings.schema), settings.schema)
        matching = [r for r in records if r.id == case_id]
        if not matching:
            raise DataError(f"case id {case_id!r} not found in {cases}")
        sweep_values = [v.strip() for v in values.split(",") if v.strip()]
        result = counterfactual(
            loaded.chains,
            loaded.encoder,
            matching[0],
            attribute,
            sweep_values,
            m=m_eff,
            families=settings.families,
        )
        out_dir = Path(out) if out else bundle_dir / "counterfactual"
        out_dir.mkdir(parents=True, exist_ok=True)
        write_json(result.to_dict(), out_dir / "sweep.json")
        for value, fit in zip(result.values, result.fits):
            stem = _safe_name(f"{case_id}__{attribute}__{value}")
            _write_prior_outputs(fit, out_dir, stem)
        overlay = counterfactual_density_columns(result)
        export_density_csv(overlay, out_dir / "overlay.csv")
        density_svg(
            overlay,
            out_dir / "overlay.svg",
            title=f"{case_id}: {attribute} swept",
        )
        for value, fit in zip(result.values, result.fits):
            click.echo(
                f"{attribute}={value}: mean={fit.sample_mean:.4f} "
                f"{fit.selected.family}{tuple(round(p, 3) for p in fit.selected.params)}"
            )
        return EXIT_OK

    _run(step)


@main.command("bench")
@click.option("--out", type=click.Path(), default=None)
@click.option("--seed", type=int, default=2026)
@click.option("--quick", is_flag=True, help="Reduced sizes for a smoke run.")
def cmd_bench(out, seed, quick):
    """Run the synthetic-decision-maker validation suite."""

    def step():
        from .benchsuite import run_bench_suite

        report = run_bench_suite(seed=seed, quick=quick)
        for prop in report.properties:
            click.echo(prop.line())
        if out:
            out_dir = Path(out)
            out_dir.mkdir(parents=True, exist_ok=True)
            write_json(report.to_dict(), out_dir / "bench.json")
        return EXIT_OK if report.passed else EXIT_INTERNAL

    _run(step)


@main.command("generate")
@click.option("--scenario", "scenario_path", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
def cmd_generate(scenario_path, out):
    """Write a synthetic decision history (ingest CSV) from a scenario file."""

    def step():
        from .synthbench import generate, write_scenario_csv

        scenario = load_scenario(scenario_path)
        records = generate(scenario)
        write_scenario_csv(records, scenario, out)
        positives = sum(r.decision for r in records)
        click.echo(
            f"wrote {len(records)} cases ({positives} positive) to {out}"
        )
        return EXIT_OK

    _run(step)


if __name__ == "__main__":
    main()
