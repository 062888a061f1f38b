"""Labeled dataset container used by training, evaluation and the CLI."""

from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatch


@dataclass(frozen=True)
class Dataset:
    """n samples of p-dimensional features with class labels.

    Labels are strings; class order is first appearance in the data, which
    makes every downstream class ordering (priors, score vectors, reports)
    deterministic for a given file or sampler output.
    """

    features: np.ndarray
    labels: tuple
    class_labels: tuple = field(init=False)

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        if features.ndim != 2:
            raise LengthMismatch(f"features must be 2-d, got {features.shape}")
        if features.shape[0] != len(self.labels):
            raise LengthMismatch(
                f"{features.shape[0]} rows but {len(self.labels)} labels")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", tuple(str(l) for l in self.labels))
        seen = dict.fromkeys(self.labels)
        object.__setattr__(self, "class_labels", tuple(seen))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def class_indices(self, label) -> np.ndarray:
        """Row indices of the samples carrying ``label``."""
        label = str(label)
        return np.flatnonzero(np.fromiter(
            (l == label for l in self.labels), dtype=bool, count=self.n))

    def class_counts(self) -> dict:
        counts = {}
        for l in self.labels:
            counts[l] = counts.get(l, 0) + 1
        return counts

    def without_row(self, i: int) -> "Dataset":
        """Copy of the dataset with row ``i`` removed (LOOCV folds)."""
        keep = np.arange(self.n) != i
        return Dataset(self.features[keep], tuple(
            l for j, l in enumerate(self.labels) if j != i))
