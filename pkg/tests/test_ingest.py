"""Loading, feature derivation, encoding and splitting."""

import math
from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from decisionprior.encoding import CaseEncoder, EncodedDataset, encode, export_dataset_csv
from decisionprior.errors import ConfigError, DataError, UnseenLevelWarning
from decisionprior.ingest import (
    CaseRecord,
    ColumnSpec,
    DecisionRule,
    DerivedSpec,
    SplitPlan,
    TableSchema,
    binarize_decision,
    derive_features,
    drop_incomplete,
    load_cases,
    load_table,
    partition_fingerprint,
    split_indices,
)

PAROLE_RULE = DecisionRule(
    column="decision",
    positive_labels=("Denied", "Not Granted"),
    negative_labels=("Open Date", "Granted", "Paroled"),
)


def small_schema():
    return TableSchema(
        columns=(
            ColumnSpec(name="age", kind="numeric"),
            ColumnSpec(name="color", kind="categorical"),
            ColumnSpec(name="decision", kind="decision"),
        ),
        decision=DecisionRule(
            column="decision", positive_labels=("deny",), negative_labels=("grant",)
        ),
    )


class TestBinarize:
    def test_negative_labels(self):
        assert binarize_decision("Paroled", PAROLE_RULE) == 0
        assert binarize_decision("Open Date", PAROLE_RULE) == 0
        assert binarize_decision("GRANTED", PAROLE_RULE) == 0

    def test_positive_labels(self):
        assert binarize_decision("Denied", PAROLE_RULE) == 1
        assert binarize_decision("not granted", PAROLE_RULE) == 1

    def test_unknown_label_is_none(self):
        assert binarize_decision("ADJOURNED", PAROLE_RULE) is None

    def test_overlapping_labels_rejected(self):
        with pytest.raises(ConfigError):
            DecisionRule(column="d", positive_labels=("x",), negative_labels=("X ",))


class TestLoadTable:
    def test_counts_dropped_decisions(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text(
            "age,color,decision\n30,red,deny\n40,blue,grant\n50,red,ADJOURNED\n"
        )
        result = load_table(path, small_schema())
        assert len(result.records) == 2
        assert result.dropped_unknown_decision == 1
        assert result.n_rows == 3
        assert result.records[0].decision == 1
        assert result.records[1].decision == 0

    def test_header_only_is_empty_not_error(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("age,color,decision\n")
        result = load_table(path, small_schema())
        assert result.records == []
        assert result.dropped_unknown_decision == 0

    def test_missing_declared_column_fatal(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("age,decision\n30,deny\n")
        with pytest.raises(DataError, match="color"):
            load_table(path, small_schema())

    def test_unparseable_numeric_flags_missing(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("age,color,decision\nxx,red,deny\n")
        result = load_table(path, small_schema())
        record = result.records[0]
        assert "age" in record.missing
        kept, dropped = drop_incomplete(result.records, ("age",))
        assert kept == [] and dropped == 1


def parole_like_schema():
    conviction_map = {
        "BURGLARY": "Burglary",
        "POSS": "Possession",
        "GRAND LARCENY": "Grand Larceny",
    }
    return TableSchema(
        columns=(
            ColumnSpec(name="birth date", kind="date"),
            ColumnSpec(name="interview date", kind="date"),
            ColumnSpec(name="release date", kind="date"),
            ColumnSpec(
                name="conviction",
                kind="categorical",
                category_map=conviction_map,
                fallback="Other",
            ),
            ColumnSpec(name="decision", kind="decision"),
        ),
        decision=PAROLE_RULE,
        derived=(
            DerivedSpec(name="age", start="birth date", end="interview date"),
            DerivedSpec(
                name="years_to_release",
                start="interview date",
                end="release date",
                clamp_min=0.0,
            ),
        ),
    )


class TestDeriveFeatures:
    def test_age_from_dates(self):
        record = CaseRecord(
            id="a",
            features={
                "birth date": date(1990, 1, 1),
                "interview date": date(2024, 1, 1),
                "release date": date(2024, 6, 1),
                "conviction": "Burglary",
            },
            decision=0,
        )
        derived = derive_features(record, parole_like_schema())
        exact = (date(2024, 1, 1) - date(1990, 1, 1)).days / 365.25
        assert derived.features["age"] == exact
        assert abs(derived.features["age"] - 34.0) < 0.01

    def test_release_before_interview_clamped_and_flagged(self):
        record = CaseRecord(
            id="a",
            features={
                "birth date": date(1990, 1, 1),
                "interview date": date(2024, 1, 1),
                "release date": date(2023, 6, 1),
                "conviction": "Burglary",
            },
            decision=1,
        )
        derived = derive_features(record, parole_like_schema())
        assert derived.features["years_to_release"] == 0.0
        assert any("years_to_release" in f for f in derived.flags)

    def test_missing_date_marks_derived_missing(self):
        record = CaseRecord(
            id="a",
            features={"interview date": date(2024, 1, 1)},
            decision=1,
            missing=frozenset({"birth date", "release date"}),
        )
        derived = derive_features(record, parole_like_schema())
        assert "age" in derived.missing


class TestCategorySimplification:
    def test_substring_match(self):
        spec = parole_like_schema().column("conviction")
        assert spec.simplify("BURGLARY 2ND") == "Burglary"
        assert spec.simplify("CRIM POSS CONTR SUBST") == "Possession"

    def test_unmapped_goes_to_fallback(self):
        spec = parole_like_schema().column("conviction")
        assert spec.simplify("JOSTLING") == "Other"

    def test_exact_match_beats_substring(self):
        spec = ColumnSpec(
            name="c",
            kind="categorical",
            category_map={"GRAND LARCENY 4": "Special", "GRAND LARCENY": "Grand Larceny"},
            fallback="Other",
        )
        assert spec.simplify("grand larceny 4") == "Special"
        assert spec.simplify("GRAND LARCENY 3") == "Grand Larceny"

    def test_no_fallback_means_missing(self):
        spec = ColumnSpec(name="c", kind="categorical", category_map={"A": "a"})
        assert spec.simplify("UNKNOWN") is None


def records_from(rows, decision=0):
    out = []
    for i, row in enumerate(rows):
        out.append(CaseRecord(id=f"r{i}", features=dict(row), decision=decision))
    return out


class TestEncoder:
    def test_zscore_uses_population_sd(self):
        records = records_from([{"age": 20.0}, {"age": 30.0}, {"age": 40.0}])
        enc = CaseEncoder(numeric=("age",)).fit(records)
        X = enc.transform(records)
        sd = math.sqrt(((20 - 30) ** 2 + 0 + (40 - 30) ** 2) / 3.0)
        expected = [(20 - 30) / sd, 0.0, (40 - 30) / sd]
        np.testing.assert_allclose(X[:, 1], expected, atol=1e-12)
        assert abs(expected[0] + 1.224744871) < 1e-8

    def test_four_level_categorical_gives_three_dummies(self):
        rows = [{"eth": lvl} for lvl in ("Black", "White", "Hispanic", "Other")]
        enc = CaseEncoder(
            categorical=("eth",), reference_levels={"eth": "Black"}
        ).fit(records_from(rows))
        assert enc.feature_names_ == [
            "intercept",
            "eth=Hispanic",
            "eth=Other",
            "eth=White",
        ]
        X = enc.transform(records_from(rows))
        # reference level row encodes to all-zero dummies
        np.testing.assert_array_equal(X[0], [1.0, 0.0, 0.0, 0.0])
        assert X[:, 1:].sum() == 3.0

    def test_unseen_level_maps_to_reference_with_warning(self):
        train = records_from([{"eth": "Black"}, {"eth": "White"}])
        enc = CaseEncoder(categorical=("eth",), reference_levels={"eth": "Black"}).fit(
            train
        )
        with pytest.warns(UnseenLevelWarning):
            X = enc.transform(records_from([{"eth": "Martian"}]))
        np.testing.assert_array_equal(X, [[1.0, 0.0]])

    def test_zero_variance_numeric_fatal_names_column(self):
        records = records_from([{"age": 30.0}, {"age": 30.0}])
        with pytest.raises(DataError, match="age"):
            CaseEncoder(numeric=("age",)).fit(records)

    def test_reference_level_must_occur_in_training(self):
        train = records_from([{"eth": "White"}])
        with pytest.raises(DataError, match="Black"):
            CaseEncoder(categorical=("eth",), reference_levels={"eth": "Black"}).fit(train)

    def test_column_count_invariant(self):
        rows = [
            {"a": 1.0, "b": 2.0, "c": "x", "d": "p"},
            {"a": 2.0, "b": 1.0, "c": "y", "d": "q"},
            {"a": 3.0, "b": 4.0, "c": "z", "d": "p"},
        ]
        enc = CaseEncoder(numeric=("a", "b"), categorical=("c", "d")).fit(
            records_from(rows)
        )
        # d = 1 + #numeric + sum(k_c - 1) = 1 + 2 + (3-1) + (2-1)
        assert enc.n_features_out_ == 1 + 2 + 2 + 1

    def test_decode_round_trip_within_1e9(self):
        rng = np.random.default_rng(2)
        ages = rng.uniform(18, 80, 50)
        records = records_from([{"age": float(a)} for a in ages])
        enc = CaseEncoder(numeric=("age",)).fit(records)
        X = enc.transform(records)
        recovered = enc.decode_numeric(X)["age"]
        np.testing.assert_allclose(recovered, ages, atol=1e-9)

    def test_serialisation_round_trip(self):
        rows = [{"a": 1.0, "c": "x"}, {"a": 2.0, "c": "y"}]
        enc = CaseEncoder(numeric=("a",), categorical=("c",)).fit(records_from(rows))
        clone = CaseEncoder.from_dict(enc.to_dict())
        X1 = enc.transform(records_from(rows))
        X2 = clone.transform(records_from(rows))
        np.testing.assert_array_equal(X1, X2)
        assert clone.feature_names_ == enc.feature_names_

    def test_encode_builds_datasets_with_train_statistics(self):
        train = records_from([{"age": 20.0}, {"age": 40.0}], decision=1)
        test = records_from([{"age": 30.0}], decision=0)
        train_ds, test_ds = encode(train, test, CaseEncoder(numeric=("age",)))
        assert isinstance(train_ds, EncodedDataset)
        # test row standardised by train stats: (30-30)/10 = 0
        assert test_ds.design[0, 1] == 0.0
        assert train_ds.response.tolist() == [1, 1]
        assert test_ds.response.tolist() == [0]

    def test_export_csv(self, tmp_path):
        train = records_from([{"age": 20.0}, {"age": 40.0}], decision=1)
        train_ds, _ = encode(train, [], CaseEncoder(numeric=("age",)))
        path = tmp_path / "design.csv"
        export_dataset_csv(train_ds, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "case_id,response,intercept,age"
        assert lines[1].startswith("r0,1,1.0,")


class TestSplit:
    def test_sizes_match_declared_fraction(self):
        plan = SplitPlan(train_fraction=0.8, replicate_count=5, base_seed=99)
        assert plan.train_size(9580) == 7664
        train, test = split_indices(9580, plan, 0)
        assert train.shape[0] == 7664
        assert test.shape[0] == 1916

    def test_ceil_applied_to_awkward_sizes(self):
        plan = SplitPlan(train_fraction=0.8, replicate_count=1, base_seed=0)
        assert plan.train_size(11) == 9  # ceil(8.8)

    def test_same_seed_same_partition(self):
        plan = SplitPlan(train_fraction=0.75, replicate_count=3, base_seed=7)
        a = split_indices(100, plan, 2)
        b = split_indices(100, plan, 2)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])
        assert partition_fingerprint(*a) == partition_fingerprint(*b)

    def test_golden_fixture_replicates_differ(self):
        # frozen output of seed 123 on 20 rows; guards cross-version drift
        plan = SplitPlan(train_fraction=0.8, replicate_count=2, base_seed=123)
        train0, test0 = split_indices(20, plan, 0)
        train1, test1 = split_indices(20, plan, 1)
        assert train0.tolist() == [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 15, 17, 18, 19]
        assert test0.tolist() == [0, 13, 14, 16]
        assert train1.tolist() == [0, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 13, 14, 15, 18, 19]
        assert test1.tolist() == [1, 11, 16, 17]
        assert train0.tolist() != train1.tolist()

    @settings(max_examples=60, deadline=None)
    @given(
        n=st.integers(min_value=2, max_value=400),
        fraction=st.sampled_from([0.5, 0.6, 0.75, 0.8, 0.9]),
        replicate=st.integers(min_value=0, max_value=4),
        seed=st.integers(min_value=0, max_value=2**32),
    )
    def test_partition_disjoint_exhaustive_sized(self, n, fraction, replicate, seed):
        plan = SplitPlan(train_fraction=fraction, replicate_count=5, base_seed=seed)
        train, test = split_indices(n, plan, replicate)
        assert len(set(train.tolist()) & set(test.tolist())) == 0
        assert sorted(train.tolist() + test.tolist()) == list(range(n))
        assert train.shape[0] == plan.train_size(n)

    def test_too_small_fatal(self):
        plan = SplitPlan(train_fraction=0.8, replicate_count=1, base_seed=0)
        with pytest.raises(DataError):
            split_indices(1, plan, 0)

    def test_replicate_out_of_range(self):
        plan = SplitPlan(train_fraction=0.8, replicate_count=2, base_seed=0)
        with pytest.raises(DataError):
            split_indices(10, plan, 2)

    def test_standardization_invariant_per_replicate(self):
        rng = np.random.default_rng(17)
        records = records_from(
            [{"age": float(a)} for a in rng.uniform(20, 60, 50)], decision=1
        )
        plan = SplitPlan(train_fraction=0.8, replicate_count=3, base_seed=5)
        for r in range(3):
            train_idx, test_idx = split_indices(len(records), plan, r)
            train = [records[i] for i in train_idx]
            test = [records[i] for i in test_idx]
            train_ds, _ = encode(train, test, CaseEncoder(numeric=("age",)))
            assert abs(train_ds.design[:, 1].mean()) < 1e-9
            assert abs(train_ds.design[:, 1].std() - 1.0) < 1e-9


class TestLoadCases:
    def test_decision_optional(self, tmp_path):
        path = tmp_path / "cases.csv"
        path.write_text("age,color\n33,red\n")
        records = load_cases(path, small_schema())
        assert records[0].decision is None
        assert records[0].features["age"] == 33.0

    def test_schema_mismatch_fatal_lists_fields(self, tmp_path):
        path = tmp_path / "cases.csv"
        path.write_text("age\n33\n")
        with pytest.raises(DataError, match="color"):
            load_cases(path, small_schema())

    def test_bad_field_fatal_names_field(self, tmp_path):
        path = tmp_path / "cases.csv"
        path.write_text("age,color\nxx,red\n")
        with pytest.raises(DataError, match="age"):
            load_cases(path, small_schema())
