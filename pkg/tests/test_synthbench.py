"""Synthetic decision makers and the predictive oracle."""

import math

import numpy as np
import pytest

from decisionprior.elicit import ks_statistic
from decisionprior.errors import ConfigError, DataError
from decisionprior.ingest import load_table
from decisionprior.sampler import PosteriorChain
from decisionprior.synthbench import (
    Scenario,
    ScenarioColumn,
    generate,
    predictive_oracle,
    scenario_reference_levels,
    scenario_schema,
    write_scenario_csv,
)


def numeric_scenario(theta=(0.0, 0.0), n=1000, seed=5, name="s"):
    columns = tuple(
        ScenarioColumn(name=f"x{j}", kind="normal") for j in range(1, len(theta))
    )
    return Scenario(name=name, true_theta=theta, columns=columns, n=n, seed=seed)


class TestGenerate:
    def test_flat_theta_rate_half(self):
        records = generate(numeric_scenario(n=10_000))
        rate = np.mean([r.decision for r in records])
        assert abs(rate - 0.5) <= 0.02

    def test_intercept_log3_rate_three_quarters(self):
        scenario = Scenario(
            name="skew", true_theta=(math.log(3.0),), columns=(), n=10_000, seed=9
        )
        rate = np.mean([r.decision for r in generate(scenario)])
        assert abs(rate - 0.75) <= 0.02

    def test_same_seed_identical(self):
        a = generate(numeric_scenario(seed=77))
        b = generate(numeric_scenario(seed=77))
        assert [r.decision for r in a] == [r.decision for r in b]
        assert a[0].features == b[0].features

    def test_categorical_levels_sampled_by_probability(self):
        scenario = Scenario(
            name="cat",
            true_theta=(0.0, 0.5, -0.5),
            columns=(
                ScenarioColumn(
                    name="grp",
                    kind="categorical",
                    levels={"a": 0.5, "b": 0.3, "c": 0.2},
                ),
            ),
            n=20_000,
            seed=4,
        )
        records = generate(scenario)
        counts = {}
        for r in records:
            counts[r.features["grp"]] = counts.get(r.features["grp"], 0) + 1
        assert abs(counts["a"] / 20_000 - 0.5) < 0.02
        assert abs(counts["c"] / 20_000 - 0.2) < 0.02
        assert scenario_reference_levels(scenario) == {"grp": "a"}

    def test_theta_dimension_validated(self):
        with pytest.raises(ConfigError):
            Scenario(
                name="bad",
                true_theta=(0.0, 1.0),
                columns=(
                    ScenarioColumn(
                        name="grp", kind="categorical", levels={"a": 0.5, "b": 0.5}
                    ),
                    ScenarioColumn(name="x", kind="normal"),
                ),
                n=10,
                seed=0,
            )

    def test_level_probabilities_must_sum_to_one(self):
        with pytest.raises(ConfigError):
            ScenarioColumn(name="g", kind="categorical", levels={"a": 0.5, "b": 0.4})


class TestCsvRoundTrip:
    def test_generated_csv_flows_through_ingest(self, tmp_path):
        scenario = Scenario(
            name="rt",
            true_theta=(0.2, 1.0, -0.5),
            columns=(
                ScenarioColumn(name="x1", kind="normal"),
                ScenarioColumn(
                    name="grp", kind="categorical", levels={"lo": 0.6, "hi": 0.4}
                ),
            ),
            n=200,
            seed=11,
        )
        records = generate(scenario)
        path = tmp_path / "scenario.csv"
        write_scenario_csv(records, scenario, path)
        loaded = load_table(path, scenario_schema(scenario))
        assert len(loaded.records) == 200
        assert loaded.dropped_unknown_decision == 0
        for original, trip in zip(records, loaded.records):
            assert trip.decision == original.decision
            assert trip.features["x1"] == original.features["x1"]
            assert trip.features["grp"] == original.features["grp"]


def chain_of(draws):
    draws = np.asarray(draws, dtype=np.float64)
    return PosteriorChain(
        draws=draws,
        acceptance_rate=0.4,
        proposal_scales=np.ones(draws.shape[1]),
        chain_index=0,
        seed=0,
        iterations=draws.shape[0],
        burn_in=0,
    )


class TestPredictiveOracle:
    def test_oracle_against_itself_is_exact(self):
        rng = np.random.default_rng(3)
        chains = [chain_of(rng.normal(0, 0.5, (120_000, 2)))]
        oracle = predictive_oracle(chains, np.array([1.0, 0.5]))
        d = ks_statistic(oracle.sorted_p, oracle.cdf)
        assert d <= 1.0 / oracle.n_draws + 1e-12

    def test_minimum_draw_requirement(self):
        chains = [chain_of(np.zeros((100, 1)))]
        with pytest.raises(DataError):
            predictive_oracle(chains, np.array([1.0]), min_draws=1000)

    def test_mean_matches_sample_mean(self):
        rng = np.random.default_rng(4)
        chains = [chain_of(rng.normal(-1.0, 0.3, (100_000, 1)))]
        oracle = predictive_oracle(chains, np.array([1.0]))
        p = 1.0 / (1.0 + np.exp(-chains[0].draws[:, 0]))
        assert oracle.mean() == pytest.approx(p.mean(), abs=1e-12)
