"""
Tests for the training matrix, information gain and feature selection.
"""
import math
import tempfile
from collections import Counter
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import mutual_info_score

from apps.factcheck.services.features import (
    FeatureMatrix, build_matrix, importance_vector, information_gain, select_features, select_top,
)
from apps.factcheck.services.paths import AnchoredPath, PathFeatures, count_features, mine_pairs
from apps.knowledge.exceptions import FeatureSelectionError
from apps.knowledge.loaders import load_graph
from apps.knowledge.synthetic import capital_world


def histogram_gain(column, y):
    """Direct contingency-table mutual information in bits."""
    n = len(y)
    joint = Counter(zip(column, y))
    px = Counter(column)
    py = Counter(y)
    return sum(
        (c / n) * math.log2((c / n) / ((px[x] / n) * (py[label] / n)))
        for (x, label), c in joint.items()
    )


def path(name):
    return AnchoredPath(((name, False),), frozenset({"a"}), frozenset({"b"}))


def random_matrix(rng, n=20, m=8):
    X = rng.integers(0, 4, size=(n, m))
    y = np.zeros(n, dtype=bool)
    y[: n // 3] = True
    return FeatureMatrix(X=X, y=y, columns=[path(f"p{j}") for j in range(m)],
                         row_pairs=[(i, i + 1000) for i in range(n)])


# ============================================================================
# INFORMATION GAIN
# ============================================================================

class InformationGainTest(SimpleTestCase):

    def test_matches_histogram_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            n = int(rng.integers(2, 30))
            y = rng.integers(0, 2, size=n).astype(bool)
            if y.all() or not y.any():
                y[0] = not y[0]
            column = rng.integers(0, int(rng.integers(1, 6)), size=n)
            self.assertAlmostEqual(information_gain(column, y), max(histogram_gain(column.tolist(), y.tolist()), 0.0),
                                   delta=1e-12)

    def test_agrees_with_sklearn_mutual_information(self):
        rng = np.random.default_rng(1)
        column = rng.integers(0, 3, size=40)
        y = rng.integers(0, 2, size=40).astype(bool)
        self.assertAlmostEqual(information_gain(column, y), mutual_info_score(y, column) / math.log(2), places=12)

    def test_perfect_balanced_separation_is_one_bit(self):
        y = np.array([True, False] * 4)
        self.assertEqual(information_gain(y.astype(int), y), 1.0)

    def test_constant_column_is_zero(self):
        self.assertEqual(information_gain(np.full(8, 3), np.array([True, False] * 4)), 0.0)

    def test_constant_labels_rejected(self):
        with self.assertRaises(FeatureSelectionError):
            information_gain(np.arange(4), np.ones(4, dtype=bool))

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 4), st.booleans()), min_size=2, max_size=25))
    def test_bounded_by_entropies(self, cells):
        column = np.array([c for c, _ in cells])
        y = np.array([label for _, label in cells])
        if y.all() or not y.any():
            return
        gain = information_gain(column, y)
        p = y.mean()
        h_y = -(p * math.log2(p) + (1 - p) * math.log2(1 - p))
        h_x = -sum((c / len(column)) * math.log2(c / len(column)) for c in Counter(column.tolist()).values())
        self.assertGreaterEqual(gain, 0.0)
        self.assertLessEqual(gain, min(h_x, h_y) + 1e-12)

    def test_row_permutation_leaves_importance_unchanged(self):
        rng = np.random.default_rng(3)
        matrix = random_matrix(rng)
        order = rng.permutation(len(matrix.y))
        shuffled = FeatureMatrix(matrix.X[order], matrix.y[order], matrix.columns,
                                 [matrix.row_pairs[i] for i in order])
        np.testing.assert_allclose(importance_vector(matrix), importance_vector(shuffled), atol=1e-15)


# ============================================================================
# SELECTION
# ============================================================================

class SelectFeaturesTest(SimpleTestCase):

    def setUp(self):
        self.matrix = random_matrix(np.random.default_rng(11))
        self.w = importance_vector(self.matrix)

    def test_zero_threshold_keeps_everything(self):
        selected = select_features(self.matrix, self.w, 0.0)
        np.testing.assert_array_equal(selected.X, self.matrix.X)

    def test_threshold_above_max_is_an_error(self):
        with self.assertRaises(FeatureSelectionError):
            select_features(self.matrix, self.w, self.w.max() + 0.01)

    def test_median_threshold_matches_recount(self):
        delta = float(np.median(self.w))
        selected = select_features(self.matrix, self.w, delta)
        expected = [self.matrix.columns[j] for j in range(len(self.w)) if self.w[j] >= delta]
        self.assertEqual(selected.columns, expected)

    def test_selection_is_idempotent(self):
        delta = float(np.median(self.w))
        once = select_features(self.matrix, self.w, delta)
        twice = select_features(once, once.importance, delta)
        self.assertEqual(once.columns, twice.columns)
        np.testing.assert_array_equal(once.X, twice.X)

    def test_top_n_breaks_ties_by_column_order(self):
        w = np.array([0.2, 0.9, 0.2, 0.1, 0.2, 0.0, 0.0, 0.0])
        selected = select_top(self.matrix, w, 3)
        self.assertEqual(selected.columns, [self.matrix.columns[j] for j in (0, 1, 2)])


# ============================================================================
# MATRIX ASSEMBLY
# ============================================================================

class BuildMatrixTest(SimpleTestCase):

    def test_rows_and_empty_columns(self):
        columns = [path("p"), path("q"), path("r")]
        features = PathFeatures(columns, [(1, 2), (3, 4)], [{0: 2}, {1: 1}], [0.0, 0.0])
        matrix = build_matrix(features, positives=[(1, 2)], negatives=[(3, 4), (5, 6)])
        self.assertEqual(matrix.columns, [path("p"), path("q")])
        np.testing.assert_array_equal(matrix.X, [[2, 0], [0, 1], [0, 0]])
        np.testing.assert_array_equal(matrix.y, [True, False, False])

    def test_requires_both_classes(self):
        features = PathFeatures([path("p")], [(1, 2)], [{0: 1}], [0.0])
        with self.assertRaises(FeatureSelectionError):
            build_matrix(features, positives=[(1, 2)], negatives=[])

    def test_positive_column_sums_equal_mined_instances(self):
        world = capital_world(states=15, seed=0)
        graph = load_graph(world.edge_lines(), world.label_lines())
        pos = [(graph.entity_id(s), graph.entity_id(t)) for s, t in world.true_pairs[:5]]
        neg = [(graph.entity_id(s), graph.entity_id(t)) for s, t in world.confounders[:10]]
        mined = mine_pairs(graph.masked_view("capitalOf"), pos + neg, 3)
        matrix = build_matrix(count_features(mined), pos, neg)
        total = sum(sum(m.instances.values()) for m in mined[:5])
        self.assertEqual(int(matrix.X[matrix.y].sum()), total)

    def test_csv_export(self):
        matrix = random_matrix(np.random.default_rng(0), n=4, m=2)
        with tempfile.TemporaryDirectory() as tmp:
            out = matrix.write_csv(Path(tmp) / "matrix.csv")
            frame = pd.read_csv(out)
        self.assertEqual(list(frame.columns), [c.text for c in matrix.columns] + ["label"])
        self.assertEqual(frame["label"].tolist(), matrix.y.astype(int).tolist())
