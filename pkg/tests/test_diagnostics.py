"""Per-case summaries and set-level metrics against brute-force values."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bruteforce import HAND_FIXTURE, brute_metrics, brute_summary
from decisionprior.diagnostics import (
    CaseSummary,
    auc_accuracy,
    calibration,
    ci_accuracy,
    confusion_matrix,
    diagnostics_report,
    entropy,
    entropy_histogram,
    f_score,
    five_split_average,
    histogram_entropy,
    point_accuracy,
    summarize_case,
    summarize_cases,
)
from decisionprior.errors import DataError


def summaries_from_fixture():
    return [
        summarize_case(np.array(values), label, case_id=f"case{i}")
        for i, (values, label) in enumerate(HAND_FIXTURE)
    ]


class TestSummarizeCase:
    def test_constant_samples(self):
        s = summarize_case(np.full(8, 0.2), 0)
        assert s.mean == 0.2
        assert s.median == 0.2
        assert (s.ci_lo, s.ci_hi) == (0.2, 0.2)
        # histogram mode is exact to half a bin: bin [0.20, 0.22) -> 0.21
        assert s.mode == 0.21
        assert abs(s.mode - 0.2) <= 0.01

    def test_symmetric_bimodal(self):
        values = np.array([0.1] * 50 + [0.9] * 50)
        s = summarize_case(values, 1)
        assert s.mean == 0.5
        assert s.above_mass == 0.5

    def test_against_brute_force_exactly(self):
        for i, (values, label) in enumerate(HAND_FIXTURE):
            ours = summarize_case(np.array(values), label)
            brute = brute_summary(values, label)
            assert ours.mean == brute["mean"]
            assert ours.median == brute["median"]
            assert ours.mode == brute["mode"]
            assert ours.ci_lo == brute["ci_lo"]
            assert ours.ci_hi == brute["ci_hi"]
            assert ours.above_mass == brute["above_mass"]
            assert ours.entropy == brute["entropy"]

    def test_ordering_invariant(self):
        s = summaries_from_fixture()
        for case in s:
            assert case.ci_lo <= case.median <= case.ci_hi
            assert 0.0 <= case.entropy <= 1.0

    def test_too_few_samples(self):
        with pytest.raises(DataError):
            summarize_case(np.array([0.5]), 1)


class TestEntropy:
    def test_endpoints(self):
        assert entropy(0.5) == 1.0
        assert entropy(0.0) == 0.0
        assert entropy(1.0) == 0.0

    def test_closed_form_089(self):
        expected = -(0.89 * math.log2(0.89) + 0.11 * math.log2(0.11))
        assert entropy(0.89) == pytest.approx(expected, abs=1e-15)
        assert entropy(0.89) == pytest.approx(0.4999, abs=5e-4)

    def test_symmetry_grid(self):
        for i in range(1, 1000):
            p = i / 1000.0
            assert abs(entropy(p) - entropy(1.0 - p)) <= 1e-12

    def test_histogram_entropy_variants(self):
        assert histogram_entropy(np.full(100, 0.31)) == 0.0
        spread = np.linspace(0.001, 0.999, 2000)
        assert histogram_entropy(spread) > 0.99

    def test_alternative_entropy_switch(self):
        s = summarize_case(
            np.array([0.2, 0.4, 0.6, 0.8]), 1, include_alternative=True
        )
        assert s.entropy_alt is not None
        s2 = summarize_case(
            np.array([0.2, 0.4, 0.6, 0.8]), 1, entropy_mode="histogram"
        )
        assert s2.entropy == pytest.approx(s.entropy_alt)


class TestPointAccuracy:
    def test_all_confident_correct(self):
        s = [
            summarize_case(np.full(8, 0.9), 1, case_id=str(i)) for i in range(5)
        ]
        assert point_accuracy(s, "mean") == 100.0

    def test_tie_labels_positive(self):
        s = [summarize_case(np.full(8, 0.5), 1)]
        assert point_accuracy(s, "mean") == 100.0
        s = [summarize_case(np.full(8, 0.5), 0)]
        assert point_accuracy(s, "mean") == 0.0

    def test_hand_fixture_matches_hand_count(self):
        ours = point_accuracy(summaries_from_fixture(), "mean")
        brute = brute_metrics(HAND_FIXTURE)["mean_accuracy"]
        assert ours == brute

    def test_unknown_statistic(self):
        with pytest.raises(DataError):
            point_accuracy(summaries_from_fixture(), "max")


class TestAucAccuracy:
    def test_majority_side_wins(self):
        values = np.array([0.6] * 6 + [0.4] * 4)  # 60% above 0.5
        s = [summarize_case(values, 1)]
        assert auc_accuracy(s) == 100.0

    def test_tie_labels_positive(self):
        values = np.array([0.4, 0.4, 0.6, 0.6])
        s = [summarize_case(values, 1)]
        assert auc_accuracy(s) == 100.0

    def test_fixture(self):
        assert auc_accuracy(summaries_from_fixture()) == brute_metrics(HAND_FIXTURE)[
            "auc_accuracy"
        ]


class TestCiAccuracy:
    def test_interval_containing_half_correct_either_label(self):
        values = np.linspace(0.4, 0.6, 8)
        for label in (0, 1):
            acc, containing, one_sided = ci_accuracy([summarize_case(values, label)])
            assert acc == 100.0
            assert containing == 100.0
            assert one_sided == 0.0

    def test_one_sided_correct(self):
        values = np.linspace(0.6, 0.8, 8)
        acc, containing, one_sided = ci_accuracy([summarize_case(values, 1)])
        assert (acc, containing, one_sided) == (100.0, 0.0, 100.0)
        acc, _, _ = ci_accuracy([summarize_case(values, 0)])
        assert acc == 0.0

    def test_breakdown_sums_to_hundred(self):
        acc, containing, one_sided = ci_accuracy(summaries_from_fixture())
        assert containing + one_sided == pytest.approx(100.0, abs=1e-9)

    def test_fixture(self):
        brute = brute_metrics(HAND_FIXTURE)
        acc, containing, one_sided = ci_accuracy(summaries_from_fixture())
        assert acc == brute["ci_accuracy"]
        assert containing == brute["ci_correct_containing_half"]
        assert one_sided == brute["ci_correct_one_sided"]


class TestFScore:
    def test_perfect(self):
        s = [summarize_case(np.full(8, 0.9), 1), summarize_case(np.full(8, 0.1), 0)]
        assert f_score(s) == 1.0

    def test_direct_arithmetic(self):
        # specificity 0.8 (8/10 negatives right), sensitivity 0.9 (9/10)
        s = []
        s += [summarize_case(np.full(8, 0.2), 0) for _ in range(8)]
        s += [summarize_case(np.full(8, 0.8), 0) for _ in range(2)]
        s += [summarize_case(np.full(8, 0.8), 1) for _ in range(9)]
        s += [summarize_case(np.full(8, 0.2), 1) for _ in range(1)]
        assert f_score(s) == pytest.approx(2.0 * 0.72 / 1.7, abs=1e-12)

    def test_missing_class_names_it(self):
        s = [summarize_case(np.full(8, 0.9), 1)]
        with pytest.raises(DataError, match="negative"):
            f_score(s)
        s = [summarize_case(np.full(8, 0.1), 0)]
        with pytest.raises(DataError, match="positive"):
            f_score(s)


class TestConfusionMatrix:
    def test_perfect_balanced(self):
        s = [summarize_case(np.full(8, 0.9), 1) for _ in range(5)]
        s += [summarize_case(np.full(8, 0.1), 0) for _ in range(5)]
        cm = confusion_matrix(s)
        assert cm == {"tp": 50.0, "fp": 0.0, "tn": 50.0, "fn": 0.0}

    def test_all_positive_predictor(self):
        s = [summarize_case(np.full(8, 0.9), 1) for _ in range(7)]
        s += [summarize_case(np.full(8, 0.9), 0) for _ in range(3)]
        cm = confusion_matrix(s)
        assert cm["tp"] == 70.0 and cm["fp"] == 30.0

    def test_hand_fixture_and_reconstruction(self):
        cm = confusion_matrix(summaries_from_fixture())
        brute = brute_metrics(HAND_FIXTURE)
        assert cm == brute["confusion"]
        # TP + TN reconstructs mean accuracy
        assert cm["tp"] + cm["tn"] == pytest.approx(
            point_accuracy(summaries_from_fixture(), "mean"), abs=1e-9
        )
        assert sum(cm.values()) == pytest.approx(100.0, abs=1e-9)


class TestCalibration:
    def test_well_calibrated_synthetic(self):
        rng = np.random.default_rng(20)
        n = 100_000
        preds = rng.uniform(0.0, 1.0, n)
        labels = (rng.random(n) < preds).astype(int)
        summaries = [
            CaseSummary(
                case_id=str(i),
                true_label=int(labels[i]),
                mean=float(preds[i]),
                median=float(preds[i]),
                mode=float(preds[i]),
                ci_lo=float(preds[i]),
                ci_hi=float(preds[i]),
                above_mass=float(preds[i] > 0.5),
                entropy=0.0,
            )
            for i in range(n)
        ]
        table = calibration(summaries, bins=10)
        assert table.total == n
        for b in table.bins:
            assert b.count > 0
            assert abs(b.observed_positive - b.mean_predicted) < 0.02

    def test_single_occupied_bin(self):
        s = [summarize_case(np.full(8, 0.999), 1) for _ in range(4)]
        table = calibration(s, bins=10)
        occupied = [b for b in table.bins if b.count]
        assert len(occupied) == 1
        assert occupied[0].observed_positive == 1.0
        assert sum(b.count for b in table.bins) == 4

    def test_hand_fixture_binning(self):
        table = calibration(summaries_from_fixture(), bins=10)
        brute = brute_metrics(HAND_FIXTURE)["calibration"]
        for ours, theirs in zip(table.bins, brute):
            assert ours.count == theirs["count"]
            if theirs["count"]:
                assert ours.mean_predicted == theirs["mean_predicted"]
                assert ours.observed_positive == theirs["observed_positive"]

    def test_bins_partition_unit_interval(self):
        table = calibration(summaries_from_fixture(), bins=10)
        assert table.bins[0].lo == 0.0
        assert table.bins[-1].hi == 1.0
        for left, right in zip(table.bins, table.bins[1:]):
            assert left.hi == right.lo


class TestReportAndAveraging:
    def test_full_report_matches_brute_force(self):
        report = diagnostics_report(summaries_from_fixture())
        brute = brute_metrics(HAND_FIXTURE)
        assert report.mean_accuracy == brute["mean_accuracy"]
        assert report.mode_accuracy == brute["mode_accuracy"]
        assert report.median_accuracy == brute["median_accuracy"]
        assert report.auc_accuracy == brute["auc_accuracy"]
        assert report.ci_accuracy == brute["ci_accuracy"]
        assert report.f_score == brute["f_score"]
        assert report.confusion == brute["confusion"]
        assert report.entropy_all == brute["entropy_all"]
        assert report.entropy_correct == brute["entropy_correct"]
        assert report.entropy_incorrect == brute["entropy_incorrect"]

    def test_average_of_identical_reports_is_identity(self):
        report = diagnostics_report(summaries_from_fixture())
        avg = five_split_average([report] * 5)
        assert avg.mean_accuracy == report.mean_accuracy
        assert avg.f_score == report.f_score
        assert avg.n_reports == 5
        # histograms pool by summation
        assert avg.entropy_all == [5 * c for c in report.entropy_all]

    def test_scalar_average(self):
        r1 = diagnostics_report(summaries_from_fixture())
        r2 = diagnostics_report(summaries_from_fixture())
        r1.mean_accuracy, r2.mean_accuracy = 78.0, 80.0
        avg = five_split_average([r1, r2])
        assert avg.mean_accuracy == 79.0

    def test_report_serialises(self):
        payload = diagnostics_report(summaries_from_fixture()).to_dict()
        assert "mean_accuracy" in payload
        assert "calibration" in payload
        assert "entropy_histograms" in payload

    def test_summarize_cases_matrix(self):
        matrix = np.vstack([np.array(v) for v, _ in HAND_FIXTURE])
        labels = [label for _, label in HAND_FIXTURE]
        summaries = summarize_cases(matrix, labels)
        assert len(summaries) == 10
        assert summaries[0].mean == HAND_FIXTURE[0][0][0]


class TestAccuracyBounds:
    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=5000))
    def test_all_accuracies_within_bounds_and_deterministic(self, seed):
        rng = np.random.default_rng(seed)
        summaries = [
            summarize_case(rng.uniform(0.01, 0.99, 16), int(rng.random() < 0.5))
            for _ in range(8)
        ]
        for stat in ("mean", "median", "mode"):
            value = point_accuracy(summaries, stat)
            assert 0.0 <= value <= 100.0
            assert value == point_accuracy(summaries, stat)
        acc, containing, one_sided = ci_accuracy(summaries)
        assert 0.0 <= acc <= 100.0
        if acc > 0:
            assert containing + one_sided == pytest.approx(100.0, abs=1e-9)
