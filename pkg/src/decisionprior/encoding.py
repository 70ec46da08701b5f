"""Design-matrix encoding: standardised numerics, reference-coded dummies.

CaseEncoder is a fit/transform transformer in the scikit-learn mould: fit
learns numeric means and standard deviations and categorical level sets
from the training records only, transform applies them to any records, so
test data never leaks into the encoder. The design matrix always carries
an intercept column of ones first, then numeric columns in declared
order, then one dummy block per categorical (k levels -> k-1 columns,
levels sorted, reference level omitted).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_is_fitted
from .errors import DataError, UnseenLevelWarning
from .ingest import CaseRecord


class CaseEncoder(BaseEstimator, TransformerMixin):
    """Encode CaseRecords into a numeric design matrix.

    Parameters
    ----------
    numeric : ordered names of numeric features.
    categorical : ordered names of categorical features.
    reference_levels : optional mapping categorical name -> reference
        level. Unlisted categoricals use their lexicographically smallest
        training level, so encodings are deterministic.
    standardize : when True (default) numeric columns are centred and
        scaled by training mean and population standard deviation.
    """

    def __init__(
        self,
        numeric=(),
        categorical=(),
        reference_levels=None,
        standardize=True,
    ):
        self.numeric = tuple(numeric)
        self.categorical = tuple(categorical)
        self.reference_levels = dict(reference_levels or {})
        self.standardize = standardize

    def fit(self, records: list[CaseRecord], y=None):
        if not records:
            raise DataError("cannot fit encoder on an empty training set")
        self.numeric_stats_ = {}
        for name in self.numeric:
            values = np.array(
                [float(r.features[name]) for r in records], dtype=np.float64
            )
            mean = float(values.mean())
            sd = float(values.std()) if self.standardize else 1.0
            if self.standardize and sd == 0.0:
                raise DataError(f"numeric column {name!r} has zero variance")
            center = mean if self.standardize else 0.0
            self.numeric_stats_[name] = (center, sd)

        self.levels_ = {}
        self.references_ = {}
        self.dummy_levels_ = {}
        for name in self.categorical:
            observed = sorted({str(r.features[name]) for r in records})
            reference = self.reference_levels.get(name, observed[0])
            if reference not in observed:
                raise DataError(
                    f"reference level {reference!r} for {name!r} does not "
                    f"occur in the training data (levels: {observed})"
                )
            self.levels_[name] = observed
            self.references_[name] = reference
            self.dummy_levels_[name] = [l for l in observed if l != reference]

        names = ["intercept"]
        names.extend(self.numeric)
        for name in self.categorical:
            names.extend(f"{name}={level}" for level in self.dummy_levels_[name])
        self.feature_names_ = names
        self.n_features_out_ = len(names)
        return self

    def transform(self, records: list[CaseRecord]) -> np.ndarray:
        check_is_fitted(self, "feature_names_")
        n = len(records)
        X = np.zeros((n, self.n_features_out_))
        X[:, 0] = 1.0
        col = 1
        for name in self.numeric:
            center, sd = self.numeric_stats_[name]
            raw = np.array([float(r.features[name]) for r in records])
            X[:, col] = (raw - center) / sd
            col += 1
        for name in self.categorical:
            dummies = self.dummy_levels_[name]
            index = {level: i for i, level in enumerate(dummies)}
            known = set(self.levels_[name])
            unseen: dict[str, int] = {}
            for row, record in enumerate(records):
                level = str(record.features[name])
                if level not in known:
                    unseen[level] = unseen.get(level, 0) + 1
                    continue  # reference encoding: all dummies zero
                j = index.get(level)
                if j is not None:
                    X[row, col + j] = 1.0
            for level, count in sorted(unseen.items()):
                warnings.warn(
                    f"{count} record(s) carry level {level!r} of {name!r} "
                    f"not seen in training; encoded as reference "
                    f"{self.references_[name]!r}",
                    UnseenLevelWarning,
                    stacklevel=2,
                )
            col += len(dummies)
        return X

    def encode_case(self, record: CaseRecord) -> np.ndarray:
        """Encode a single record as a 1-D design row."""
        return self.transform([record])[0]

    def decode_numeric(self, X: np.ndarray) -> dict[str, np.ndarray]:
        """Invert standardisation for the numeric columns of a design."""
        check_is_fitted(self, "feature_names_")
        out = {}
        for offset, name in enumerate(self.numeric):
            center, sd = self.numeric_stats_[name]
            out[name] = X[:, 1 + offset] * sd + center
        return out

    def to_dict(self) -> dict:
        check_is_fitted(self, "feature_names_")
        return {
            "numeric": list(self.numeric),
            "categorical": list(self.categorical),
            "reference_levels": dict(self.reference_levels),
            "standardize": self.standardize,
            "numeric_stats": {k: list(v) for k, v in self.numeric_stats_.items()},
            "levels": {k: list(v) for k, v in self.levels_.items()},
            "references": dict(self.references_),
            "feature_names": list(self.feature_names_),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "CaseEncoder":
        enc = cls(
            numeric=payload["numeric"],
            categorical=payload["categorical"],
            reference_levels=payload["reference_levels"],
            standardize=payload["standardize"],
        )
        enc.numeric_stats_ = {k: tuple(v) for k, v in payload["numeric_stats"].items()}
        enc.levels_ = {k: list(v) for k, v in payload["levels"].items()}
        enc.references_ = dict(payload["references"])
        enc.dummy_levels_ = {
            name: [l for l in levels if l != enc.references_[name]]
            for name, levels in enc.levels_.items()
        }
        enc.feature_names_ = list(payload["feature_names"])
        enc.n_features_out_ = len(enc.feature_names_)
        return enc


@dataclass
class EncodedDataset:
    """Design matrix (intercept first), response vector and provenance."""

    design: np.ndarray
    response: np.ndarray
    encoder: CaseEncoder
    case_ids: tuple[str, ...]
    provenance: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.design.shape[0]

    @property
    def dim(self) -> int:
        return self.design.shape[1]

    @property
    def feature_names(self) -> list[str]:
        return list(self.encoder.feature_names_)


def encode(
    train: list[CaseRecord],
    test: list[CaseRecord],
    encoder: CaseEncoder,
    provenance: dict | None = None,
) -> tuple[EncodedDataset, EncodedDataset]:
    """Fit the encoder on train only; encode both partitions."""
    encoder.fit(train)
    prov = dict(provenance or {})

    def build(records, role):
        if any(r.decision is None for r in records):
            raise DataError("all records must carry a binary decision to encode")
        X = encoder.transform(records)
        y = np.array([r.decision for r in records], dtype=np.int8)
        return EncodedDataset(
            design=X,
            response=y,
            encoder=encoder,
            case_ids=tuple(r.id for r in records),
            provenance={**prov, "role": role},
        )

    return build(train, "train"), build(test, "test")


def export_dataset_csv(dataset: EncodedDataset, path) -> None:
    """Write the encoded design and response as an audit CSV."""
    header = ["case_id", "response"] + dataset.feature_names
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(dataset.n):
            cells = [dataset.case_ids[i], str(int(dataset.response[i]))]
            cells.extend(repr(float(v)) for v in dataset.design[i])
            fh.write(",".join(cells) + "\n")
