"""Training matrix, information-gain importance and feature selection."""

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.metrics.cluster import contingency_matrix

from apps.knowledge.exceptions import FeatureSelectionError

from .paths import AnchoredPath, PathFeatures

logger = logging.getLogger(__name__)

LABEL_COLUMN = "label"


@dataclass(frozen=True)
class FeatureMatrix:
    X: np.ndarray
    y: np.ndarray
    columns: List[AnchoredPath]
    row_pairs: List[Tuple[int, int]]
    importance: Optional[np.ndarray] = None

    @property
    def shape(self):
        return self.X.shape

    def take_columns(self, indices: Sequence[int]) -> "FeatureMatrix":
        indices = list(indices)
        return replace(
            self,
            X=self.X[:, indices],
            columns=[self.columns[j] for j in indices],
            importance=None if self.importance is None else self.importance[indices],
        )

    def negative_sums(self) -> np.ndarray:
        return self.X[~self.y].sum(axis=0)

    def to_frame(self, entity_names: Optional[Sequence[str]] = None) -> pd.DataFrame:
        """One row per pair, one column per path text, trailing label column."""
        frame = pd.DataFrame(self.X, columns=[c.text for c in self.columns])
        if entity_names is not None:
            frame.insert(0, "subject", [entity_names[s] for s, _ in self.row_pairs])
            frame.insert(1, "object", [entity_names[t] for _, t in self.row_pairs])
        frame[LABEL_COLUMN] = self.y.astype(int)
        return frame

    def write_csv(self, path, entity_names: Optional[Sequence[str]] = None) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame(entity_names).to_csv(path, index=False, lineterminator="\n")
        return path


def build_matrix(
    path_features: PathFeatures,
    positives: Sequence[Tuple[int, int]],
    negatives: Sequence[Tuple[int, int]],
) -> FeatureMatrix:
    """Rows are positives then negatives; columns with no nonzero cell are dropped."""
    if not positives or not negatives:
        raise FeatureSelectionError("both positive and negative pairs are required to build a training matrix")

    by_pair = dict(zip(path_features.pairs, path_features.counts))
    rows = list(positives) + list(negatives)
    X = np.zeros((len(rows), len(path_features.columns)), dtype=np.int64)
    for i, pair in enumerate(rows):
        for j, count in by_pair.get(tuple(pair), {}).items():
            X[i, j] = count

    y = np.zeros(len(rows), dtype=bool)
    y[: len(positives)] = True
    keep = np.flatnonzero(X.any(axis=0))
    logger.debug("Training matrix %d x %d (%d empty columns dropped)", len(rows), len(keep), X.shape[1] - len(keep))
    return FeatureMatrix(
        X=X[:, keep],
        y=y,
        columns=[path_features.columns[j] for j in keep],
        row_pairs=[tuple(pair) for pair in rows],
    )


def information_gain(column, y) -> float:
    """Mutual information I(column; y) in bits, each distinct count one outcome."""
    column = np.asarray(column)
    y = np.asarray(y)
    if column.shape != y.shape or column.ndim != 1:
        raise ValueError("column and labels must be 1-d vectors of equal length")
    if len(y) < 2 or np.unique(y).size < 2:
        raise FeatureSelectionError("information gain is undefined for constant labels")

    joint = contingency_matrix(y, column).astype(float)
    n = joint.sum()
    p_y = joint.sum(axis=1, keepdims=True) / n
    p_x = joint.sum(axis=0, keepdims=True) / n
    p_xy = joint / n
    nz = p_xy > 0
    gain = float(np.sum(p_xy[nz] * np.log2(p_xy[nz] / (p_y @ p_x)[nz])))
    return max(gain, 0.0)


def importance_vector(matrix: FeatureMatrix) -> np.ndarray:
    return np.array([information_gain(matrix.X[:, j], matrix.y) for j in range(matrix.X.shape[1])])


def select_features(matrix: FeatureMatrix, w, delta: float) -> FeatureMatrix:
    """Columns with ``w_j >= delta`` in their original order."""
    w = np.asarray(w, dtype=float)
    if w.shape != (len(matrix.columns),):
        raise ValueError("importance vector is not aligned with the matrix columns")
    keep = np.flatnonzero(w >= delta)
    if keep.size == 0:
        raise FeatureSelectionError(
            f"no path has importance >= {delta:g} (max {w.max() if w.size else 0:g}); lower the threshold"
        )
    return replace(matrix.take_columns(keep), importance=w[keep])


def select_top(matrix: FeatureMatrix, w, top: int) -> FeatureMatrix:
    """The ``top`` most important columns, ties broken by column order."""
    w = np.asarray(w, dtype=float)
    if top < 1:
        raise FeatureSelectionError(f"top-N selection needs N >= 1, got {top}")
    if w.size == 0:
        raise FeatureSelectionError("no paths to select from; the training pairs share no paths")
    order = np.argsort(-w, kind="stable")[:top]
    keep = np.sort(order)
    return replace(matrix.take_columns(keep), importance=w[keep])

