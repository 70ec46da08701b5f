"""Pure-Python brute-force recomputation of every case statistic and
set-level metric, kept free of numpy so it shares no code with the
implementation under test.

The hand fixture uses only multiples of 1/64, so every partial sum is
exact in float64 and summation order cannot perturb the comparison.
"""

import math

MODE_BINS = 50
ENTROPY_BINS = 20


def parts64(values):
    return [v / 64.0 for v in values]


# 10 cases, 8 samples each, labels chosen to exercise every rule branch:
# ties at 0.5, CIs containing / above / below 0.5, correct and incorrect
# predictions for both classes.
HAND_FIXTURE = [
    (parts64([16] * 8), 0),
    (parts64([48] * 8), 1),
    (parts64([24, 26, 28, 30, 34, 36, 38, 40]), 0),
    (parts64([20, 20, 20, 20, 44, 44, 44, 44]), 0),
    (parts64([32] * 8), 1),
    (parts64([2, 3, 4, 5, 6, 7, 8, 8]), 0),
    (parts64([56, 57, 58, 59, 60, 61, 62, 62]), 0),
    (parts64([2, 10, 18, 26, 38, 46, 54, 62]), 1),
    (parts64([28, 28, 28, 28, 28, 36, 36, 36]), 1),
    (parts64([28, 28, 30, 30, 34, 34, 36, 36]), 1),
]


def brute_mean(values):
    return sum(values) / len(values)


def brute_quantile(values, q):
    ordered = sorted(values)
    m = len(ordered)
    h = (m - 1) * q
    i = math.floor(h)
    if i >= m - 1:
        return float(ordered[m - 1])
    frac = h - i
    lo = float(ordered[i])
    hi = float(ordered[i + 1])
    return lo + frac * (hi - lo)


def brute_mode(values):
    counts = [0] * MODE_BINS
    for s in values:
        b = int(s * MODE_BINS)
        if b > MODE_BINS - 1:
            b = MODE_BINS - 1
        counts[b] += 1
    best = 0
    for b in range(MODE_BINS):
        if counts[b] > counts[best]:
            best = b
    return (best + 0.5) / MODE_BINS


def brute_entropy(p):
    if p <= 0.0 or p >= 1.0:
        return 0.0
    h = -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)
    return min(max(h, 0.0), 1.0)


def brute_summary(values, label):
    mean = brute_mean(values)
    return {
        "true_label": label,
        "mean": mean,
        "median": brute_quantile(values, 0.5),
        "mode": brute_mode(values),
        "ci_lo": brute_quantile(values, 0.025),
        "ci_hi": brute_quantile(values, 0.975),
        "above_mass": sum(1 for s in values if s > 0.5) / len(values),
        "entropy": brute_entropy(mean),
    }


def brute_metrics(cases, calibration_bins=10):
    summaries = [brute_summary(values, label) for values, label in cases]
    n = len(summaries)

    def point_accuracy(stat):
        hits = 0
        for s in summaries:
            pred = 1 if s[stat] >= 0.5 else 0
            if pred == s["true_label"]:
                hits += 1
        return hits / n * 100.0

    auc_hits = 0
    for s in summaries:
        pred = 1 if s["above_mass"] >= 0.5 else 0
        if pred == s["true_label"]:
            auc_hits += 1

    ci_correct = 0
    containing = 0
    one_sided = 0
    for s in summaries:
        if s["ci_lo"] <= 0.5 <= s["ci_hi"]:
            ci_correct += 1
            containing += 1
        elif s["ci_lo"] > 0.5 and s["true_label"] == 1:
            ci_correct += 1
            one_sided += 1
        elif s["ci_hi"] < 0.5 and s["true_label"] == 0:
            ci_correct += 1
            one_sided += 1

    tp = fp = tn = fn = 0
    for s in summaries:
        pred = 1 if s["mean"] >= 0.5 else 0
        if pred == 1 and s["true_label"] == 1:
            tp += 1
        elif pred == 1 and s["true_label"] == 0:
            fp += 1
        elif pred == 0 and s["true_label"] == 0:
            tn += 1
        else:
            fn += 1
    sensitivity = tp / (tp + fn)
    specificity = tn / (tn + fp)
    if sensitivity + specificity == 0.0:
        f = 0.0
    else:
        f = 2.0 * specificity * sensitivity / (specificity + sensitivity)

    bins = []
    for b in range(calibration_bins):
        members = []
        for s in summaries:
            idx = int(s["mean"] * calibration_bins)
            if idx > calibration_bins - 1:
                idx = calibration_bins - 1
            if idx == b:
                members.append(s)
        if members:
            bins.append(
                {
                    "count": len(members),
                    "mean_predicted": brute_mean([s["mean"] for s in members]),
                    "observed_positive": brute_mean(
                        [s["true_label"] for s in members]
                    ),
                }
            )
        else:
            bins.append({"count": 0, "mean_predicted": None, "observed_positive": None})

    def entropy_hist(subset):
        counts = [0] * ENTROPY_BINS
        for s in subset:
            idx = int(s["entropy"] * ENTROPY_BINS)
            if idx > ENTROPY_BINS - 1:
                idx = ENTROPY_BINS - 1
            counts[idx] += 1
        return counts

    correct = [s for s in summaries if (1 if s["mean"] >= 0.5 else 0) == s["true_label"]]
    incorrect = [
        s for s in summaries if (1 if s["mean"] >= 0.5 else 0) != s["true_label"]
    ]

    return {
        "summaries": summaries,
        "mean_accuracy": point_accuracy("mean"),
        "mode_accuracy": point_accuracy("mode"),
        "median_accuracy": point_accuracy("median"),
        "auc_accuracy": auc_hits / n * 100.0,
        "ci_accuracy": ci_correct / n * 100.0,
        "ci_correct_containing_half": (
            containing / ci_correct * 100.0 if ci_correct else 0.0
        ),
        "ci_correct_one_sided": one_sided / ci_correct * 100.0 if ci_correct else 0.0,
        "f_score": f,
        "confusion": {
            "tp": tp / n * 100.0,
            "fp": fp / n * 100.0,
            "tn": tn / n * 100.0,
            "fn": fn / n * 100.0,
        },
        "calibration": bins,
        "entropy_all": entropy_hist(summaries),
        "entropy_correct": entropy_hist(correct),
        "entropy_incorrect": entropy_hist(incorrect),
    }
