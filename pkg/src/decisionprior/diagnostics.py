"""Model-selection diagnostics over per-case predictive samples.

Per test case the predictive probability samples are reduced to central
tendencies (mean, median, histogram mode), a 95% equal-tailed credible
interval, the share of samples above 0.5, and an entropy. Set-level
measures then score how often each rule labels cases correctly, plus
specificity/sensitivity summaries, a calibration table, and entropy
histograms split by correctness.

Labelling convention used throughout: a statistic of exactly 0.5 labels
the case positive, so every implementation of these rules agrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_float_vector
from .errors import DataError

MODE_BINS = 50
ENTROPY_HIST_BINS = 20
# equal-tailed 95% credible interval bounds, kept as literals so the
# quantile probabilities are not perturbed by derived-float arithmetic
CI_LO_Q = 0.025
CI_HI_Q = 0.975


def quantile(sorted_values: np.ndarray, q: float) -> float:
    """Linear-interpolation quantile on pre-sorted values.

    Implemented here (rather than via library helpers) so that the exact
    arithmetic is pinned: h = (m-1) q, result = x[i] + (h-i)(x[i+1]-x[i]).
    """
    m = sorted_values.shape[0]
    h = (m - 1) * q
    i = int(math.floor(h))
    if i >= m - 1:
        return float(sorted_values[m - 1])
    frac = h - i
    lo = float(sorted_values[i])
    hi = float(sorted_values[i + 1])
    return lo + frac * (hi - lo)


def histogram_mode(samples: np.ndarray, bins: int = MODE_BINS) -> float:
    """Midpoint of the fullest equal-width bin on [0, 1]; ties take the
    lower bin, so the statistic is deterministic."""
    idx = np.minimum((samples * bins).astype(int), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    best = int(np.argmax(counts))
    return (best + 0.5) / bins


def entropy(p_bar: float) -> float:
    """Binary entropy of a probability, in bits, clamped to [0, 1]."""
    if p_bar <= 0.0 or p_bar >= 1.0:
        return 0.0
    h = -p_bar * math.log2(p_bar) - (1.0 - p_bar) * math.log2(1.0 - p_bar)
    return min(max(h, 0.0), 1.0)


def histogram_entropy(samples: np.ndarray, bins: int = ENTROPY_HIST_BINS) -> float:
    """Normalised Shannon entropy of the sample histogram (alternative
    uncertainty measure, behind the entropy_mode switch)."""
    idx = np.minimum((samples * bins).astype(int), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    props = counts[counts > 0] / counts.sum()
    h = -float(np.sum(props * np.log2(props)))
    return min(max(h / math.log2(bins), 0.0), 1.0)


@dataclass
class CaseSummary:
    case_id: str
    true_label: int
    mean: float
    median: float
    mode: float
    ci_lo: float
    ci_hi: float
    above_mass: float
    entropy: float
    entropy_alt: float | None = None

    def statistic(self, name: str) -> float:
        if name not in ("mean", "median", "mode"):
            raise DataError(f"unknown point statistic {name!r}")
        return getattr(self, name)


def summarize_case(
    samples,
    true_label: int,
    case_id: str = "case",
    entropy_mode: str = "mean",
    include_alternative: bool = False,
) -> CaseSummary:
    """Reduce one case's probability samples to its summary statistics.

    ``entropy_mode`` selects the primary uncertainty measure: "mean" is
    the binary entropy of the mean probability; "histogram" is the
    normalised entropy of a 20-bin sample histogram.
    """
    values = as_float_vector(getattr(samples, "samples", samples), "samples")
    if values.shape[0] < 2:
        raise DataError("case summaries need at least 2 samples")
    if entropy_mode not in ("mean", "histogram"):
        raise DataError(f"unknown entropy_mode {entropy_mode!r}")
    case_id = getattr(samples, "case_id", case_id)
    ordered = np.sort(values)
    mean = float(values.mean())
    primary = entropy(mean) if entropy_mode == "mean" else histogram_entropy(values)
    alternative = None
    if include_alternative:
        alternative = (
            histogram_entropy(values) if entropy_mode == "mean" else entropy(mean)
        )
    return CaseSummary(
        case_id=case_id,
        true_label=int(true_label),
        mean=mean,
        median=quantile(ordered, 0.5),
        mode=histogram_mode(values),
        ci_lo=quantile(ordered, CI_LO_Q),
        ci_hi=quantile(ordered, CI_HI_Q),
        above_mass=float(np.mean(values > 0.5)),
        entropy=primary,
        entropy_alt=alternative,
    )


def summarize_cases(
    sample_matrix: np.ndarray,
    labels,
    case_ids=None,
    entropy_mode: str = "mean",
    include_alternative: bool = False,
) -> list[CaseSummary]:
    """Summaries for an (n_cases, m) matrix of predictive samples."""
    n = sample_matrix.shape[0]
    ids = case_ids if case_ids is not None else [f"case{i}" for i in range(n)]
    return [
        summarize_case(
            sample_matrix[i],
            labels[i],
            case_id=ids[i],
            entropy_mode=entropy_mode,
            include_alternative=include_alternative,
        )
        for i in range(n)
    ]


def _predicted(summary: CaseSummary, statistic: str = "mean") -> int:
    return 1 if summary.statistic(statistic) >= 0.5 else 0


def point_accuracy(summaries: list[CaseSummary], statistic: str = "mean") -> float:
    """Percent of cases labelled correctly by a point statistic."""
    if not summaries:
        raise DataError("no case summaries given")
    hits = sum(1 for s in summaries if _predicted(s, statistic) == s.true_label)
    return hits / len(summaries) * 100.0


def auc_accuracy(summaries: list[CaseSummary]) -> float:
    """Percent labelled correctly by the larger sample mass around 0.5."""
    if not summaries:
        raise DataError("no case summaries given")
    hits = sum(
        1
        for s in summaries
        if (1 if s.above_mass >= 0.5 else 0) == s.true_label
    )
    return hits / len(summaries) * 100.0


def ci_accuracy(summaries: list[CaseSummary]) -> tuple[float, float, float]:
    """Credible-interval accuracy and its breakdown.

    A case counts as correct when its CI contains 0.5 (either label is
    then acceptable), or lies entirely above 0.5 with a positive label,
    or entirely below with a negative label. The two breakdown
    percentages are shares of the correct cases only and sum to 100.
    """
    if not summaries:
        raise DataError("no case summaries given")
    correct = 0
    containing = 0
    one_sided = 0
    for s in summaries:
        if s.ci_lo <= 0.5 <= s.ci_hi:
            correct += 1
            containing += 1
        elif s.ci_lo > 0.5 and s.true_label == 1:
            correct += 1
            one_sided += 1
        elif s.ci_hi < 0.5 and s.true_label == 0:
            correct += 1
            one_sided += 1
    accuracy = correct / len(summaries) * 100.0
    if correct == 0:
        return accuracy, 0.0, 0.0
    return accuracy, containing / correct * 100.0, one_sided / correct * 100.0


def _confusion_counts(summaries: list[CaseSummary], statistic: str = "mean"):
    tp = fp = tn = fn = 0
    for s in summaries:
        pred = _predicted(s, statistic)
        if pred == 1 and s.true_label == 1:
            tp += 1
        elif pred == 1 and s.true_label == 0:
            fp += 1
        elif pred == 0 and s.true_label == 0:
            tn += 1
        else:
            fn += 1
    return tp, fp, tn, fn


def confusion_matrix(summaries: list[CaseSummary]) -> dict[str, float]:
    """TP/FP/TN/FN as percentages of the test size (mean-statistic labels)."""
    if not summaries:
        raise DataError("no case summaries given")
    tp, fp, tn, fn = _confusion_counts(summaries)
    n = len(summaries)
    return {
        "tp": tp / n * 100.0,
        "fp": fp / n * 100.0,
        "tn": tn / n * 100.0,
        "fn": fn / n * 100.0,
    }


def f_score(summaries: list[CaseSummary]) -> float:
    """Harmonic-style combination of specificity and sensitivity:
    F = 2 * specificity * sensitivity / (specificity + sensitivity)."""
    tp, fp, tn, fn = _confusion_counts(summaries)
    if tp + fn == 0:
        raise DataError("test set lacks the positive class")
    if tn + fp == 0:
        raise DataError("test set lacks the negative class")
    sensitivity = tp / (tp + fn)
    specificity = tn / (tn + fp)
    if sensitivity + specificity == 0.0:
        return 0.0
    return 2.0 * specificity * sensitivity / (specificity + sensitivity)


@dataclass
class CalibrationBin:
    lo: float
    hi: float
    count: int
    mean_predicted: float | None
    observed_positive: float | None

    def to_dict(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "count": self.count,
            "mean_predicted": self.mean_predicted,
            "observed_positive": self.observed_positive,
        }


@dataclass
class CalibrationTable:
    bins: list[CalibrationBin]

    def to_dict(self) -> dict:
        return {"bins": [b.to_dict() for b in self.bins]}

    @property
    def total(self) -> int:
        return sum(b.count for b in self.bins)


def calibration(summaries: list[CaseSummary], bins: int = 10) -> CalibrationTable:
    """Equal-width calibration table over the mean predicted probability."""
    if bins < 2:
        raise DataError("calibration needs at least 2 bins")
    table = []
    means = np.array([s.mean for s in summaries])
    labels = np.array([s.true_label for s in summaries])
    idx = np.minimum((means * bins).astype(int), bins - 1)
    for b in range(bins):
        mask = idx == b
        count = int(mask.sum())
        if count == 0:
            table.append(CalibrationBin(b / bins, (b + 1) / bins, 0, None, None))
        else:
            table.append(
                CalibrationBin(
                    b / bins,
                    (b + 1) / bins,
                    count,
                    float(means[mask].mean()),
                    float(labels[mask].mean()),
                )
            )
    return CalibrationTable(table)


def entropy_histogram(
    values: list[float], bins: int = ENTROPY_HIST_BINS
) -> list[int]:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return [0] * bins
    idx = np.minimum((arr * bins).astype(int), bins - 1)
    return np.bincount(idx, minlength=bins).astype(int).tolist()


SCALAR_METRICS = (
    "mean_accuracy",
    "mode_accuracy",
    "median_accuracy",
    "auc_accuracy",
    "ci_accuracy",
    "ci_correct_containing_half",
    "ci_correct_one_sided",
    "f_score",
)


@dataclass
class DiagnosticsReport:
    """Every set-level measure for one fitted model on one test set."""

    n_cases: int
    mean_accuracy: float
    mode_accuracy: float
    median_accuracy: float
    auc_accuracy: float
    ci_accuracy: float
    ci_correct_containing_half: float
    ci_correct_one_sided: float
    f_score: float
    confusion: dict[str, float]
    calibration: CalibrationTable
    entropy_all: list[int]
    entropy_correct: list[int]
    entropy_incorrect: list[int]
    entropy_alt_all: list[int] | None = None
    n_reports: int = 1
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "n_cases": self.n_cases,
            "n_reports": self.n_reports,
            "confusion": dict(self.confusion),
            "calibration": self.calibration.to_dict(),
            "entropy_histograms": {
                "all": list(self.entropy_all),
                "correct": list(self.entropy_correct),
                "incorrect": list(self.entropy_incorrect),
            },
        }
        for name in SCALAR_METRICS:
            out[name] = getattr(self, name)
        if self.entropy_alt_all is not None:
            out["entropy_histograms"]["alternative_all"] = list(self.entropy_alt_all)
        if self.extras:
            out["extras"] = dict(self.extras)
        return out


def diagnostics_report(
    summaries: list[CaseSummary], calibration_bins: int = 10
) -> DiagnosticsReport:
    """Assemble the full report from per-case summaries."""
    if not summaries:
        raise DataError("no case summaries given")
    ci_acc, containing, one_sided = ci_accuracy(summaries)
    correct = [s for s in summaries if _predicted(s) == s.true_label]
    incorrect = [s for s in summaries if _predicted(s) != s.true_label]
    alt = None
    if all(s.entropy_alt is not None for s in summaries):
        alt = entropy_histogram([s.entropy_alt for s in summaries])
    return DiagnosticsReport(
        n_cases=len(summaries),
        mean_accuracy=point_accuracy(summaries, "mean"),
        mode_accuracy=point_accuracy(summaries, "mode"),
        median_accuracy=point_accuracy(summaries, "median"),
        auc_accuracy=auc_accuracy(summaries),
        ci_accuracy=ci_acc,
        ci_correct_containing_half=containing,
        ci_correct_one_sided=one_sided,
        f_score=f_score(summaries),
        confusion=confusion_matrix(summaries),
        calibration=calibration(summaries, bins=calibration_bins),
        entropy_all=entropy_histogram([s.entropy for s in summaries]),
        entropy_correct=entropy_histogram([s.entropy for s in correct]),
        entropy_incorrect=entropy_histogram([s.entropy for s in incorrect]),
        entropy_alt_all=alt,
    )


def _pool_calibration(tables: list[CalibrationTable]) -> CalibrationTable:
    bins = len(tables[0].bins)
    pooled = []
    for b in range(bins):
        cells = [t.bins[b] for t in tables]
        count = sum(c.count for c in cells)
        if count == 0:
            pooled.append(CalibrationBin(cells[0].lo, cells[0].hi, 0, None, None))
            continue
        mean_pred = sum(c.mean_predicted * c.count for c in cells if c.count) / count
        observed = sum(c.observed_positive * c.count for c in cells if c.count) / count
        pooled.append(
            CalibrationBin(cells[0].lo, cells[0].hi, count, mean_pred, observed)
        )
    return CalibrationTable(pooled)


def _pool_histograms(histograms: list[list[int]]) -> list[int]:
    return np.sum(np.asarray(histograms), axis=0).astype(int).tolist()


def five_split_average(reports: list[DiagnosticsReport]) -> DiagnosticsReport:
    """Average scalar metrics across replicates; pool histograms and
    calibration counts."""
    if not reports:
        raise DataError("no reports to average")
    k = len(reports)
    scalars = {
        name: sum(getattr(r, name) for r in reports) / k for name in SCALAR_METRICS
    }
    confusion = {
        cell: sum(r.confusion[cell] for r in reports) / k
        for cell in ("tp", "fp", "tn", "fn")
    }
    alt = None
    if all(r.entropy_alt_all is not None for r in reports):
        alt = _pool_histograms([r.entropy_alt_all for r in reports])
    return DiagnosticsReport(
        n_cases=sum(r.n_cases for r in reports),
        confusion=confusion,
        calibration=_pool_calibration([r.calibration for r in reports]),
        entropy_all=_pool_histograms([r.entropy_all for r in reports]),
        entropy_correct=_pool_histograms([r.entropy_correct for r in reports]),
        entropy_incorrect=_pool_histograms([r.entropy_incorrect for r in reports]),
        entropy_alt_all=alt,
        n_reports=k,
        **scalars,
    )


def report_table_rows(report: DiagnosticsReport) -> list[tuple[str, float]]:
    """Accuracy-table rows in the conventional presentation order."""
    return [
        ("Mean Accuracy (%)", report.mean_accuracy),
        ("Mode Accuracy (%)", report.mode_accuracy),
        ("Median Accuracy (%)", report.median_accuracy),
        ("AUC Accuracy (%)", report.auc_accuracy),
        ("95% CI Accuracy (%)", report.ci_accuracy),
        ("CI correct containing 0.5 (%)", report.ci_correct_containing_half),
        ("CI correct either side of 0.5 (%)", report.ci_correct_one_sided),
        ("F-Score", report.f_score),
    ]
