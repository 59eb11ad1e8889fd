"""
Tests for AUROC, stratified folds and cross validation.
"""
from unittest import mock

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import roc_auc_score

from apps.factcheck.services import evaluation
from apps.factcheck.services.evaluation import (
    PREDPATH, auroc, cross_validate, evaluate, report_frame, resample_rows, stratified_folds, subset_frame,
    subset_search,
)
from apps.factcheck.services.pipeline import PipelineConfig, fit_model
from apps.knowledge.exceptions import EvaluationError
from apps.knowledge.loaders import load_graph

scored_labels = st.lists(
    st.tuples(st.floats(-100, 100, allow_nan=False), st.booleans()), min_size=2, max_size=40
).filter(lambda rows: 0 < sum(y for _, y in rows) < len(rows))
integer_scored_labels = st.lists(
    st.tuples(st.integers(-1000, 1000), st.booleans()), min_size=2, max_size=40
).filter(lambda rows: 0 < sum(y for _, y in rows) < len(rows))


class AurocTest(SimpleTestCase):

    @settings(max_examples=100, deadline=None)
    @given(scored_labels)
    def test_matches_sklearn(self, rows):
        scores = [s for s, _ in rows]
        labels = [y for _, y in rows]
        self.assertAlmostEqual(auroc(scores, labels), roc_auc_score(labels, scores), places=12)

    @settings(max_examples=100, deadline=None)
    @given(scored_labels)
    def test_flipping_labels_complements(self, rows):
        scores = [s for s, _ in rows]
        labels = np.array([y for _, y in rows])
        value = auroc(scores, labels)
        self.assertGreaterEqual(value, 0.0)
        self.assertLessEqual(value, 1.0)
        self.assertAlmostEqual(auroc(scores, ~labels), 1.0 - value, places=12)

    @settings(max_examples=100, deadline=None)
    @given(integer_scored_labels)
    def test_monotone_transform_is_invariant(self, rows):
        scores = np.array([s for s, _ in rows], dtype=float)
        labels = [y for _, y in rows]
        self.assertEqual(auroc(scores ** 3 + scores, labels), auroc(scores, labels))

    def test_perfect_and_tied_rankings(self):
        self.assertEqual(auroc([0.9, 0.8, 0.1], [True, True, False]), 1.0)
        self.assertEqual(auroc([0.5, 0.5], [True, False]), 0.5)

    def test_single_class_is_an_error(self):
        with self.assertRaises(EvaluationError):
            auroc([0.1, 0.2], [True, True])


class StratifiedFoldsTest(SimpleTestCase):

    def test_folds_are_seeded_and_stratified(self):
        labels = np.array([True] * 10 + [False] * 40)
        first = stratified_folds(labels, 5, seed=3)
        again = stratified_folds(labels, 5, seed=3)
        for (a_train, a_test), (b_train, b_test) in zip(first, again):
            np.testing.assert_array_equal(a_test, b_test)
        for _, test in first:
            self.assertEqual(int(labels[test].sum()), 2)
        covered = np.sort(np.concatenate([test for _, test in first]))
        np.testing.assert_array_equal(covered, np.arange(50))

    def test_too_few_statements_per_class(self):
        with self.assertRaises(EvaluationError):
            stratified_folds(np.array([True] * 3 + [False] * 20), 5, seed=0)


def leak_world():
    """Positives linked by ``q``, negatives by ``w``; one positive only reachable through ``secret``."""
    triples = []
    for i in range(12):
        triples += [(f"s{i}", "p", f"t{i}"), (f"s{i}", "q", f"t{i}")]
        triples += [(f"u{i}", "w", f"v{i}")]
    triples += [("x", "p", "y"), ("x", "secret", "y")]
    graph = load_graph([f"{s}\t{p}\t{o}\n" for s, p, o in triples])
    rows = [(graph.entity_id(f"s{i}"), graph.entity_id(f"t{i}"), True) for i in range(12)]
    rows += [(graph.entity_id(f"u{i}"), graph.entity_id(f"v{i}"), False) for i in range(12)]
    rows.append((graph.entity_id("x"), graph.entity_id("y"), True))
    return graph, rows


class CrossValidateTest(SimpleTestCase):

    def setUp(self):
        self.graph, self.rows = leak_world()
        self.leak = self.rows[-1][:2]
        self.config = PipelineConfig(folds=3, seed=1)

    def test_held_out_paths_never_reach_the_fold_model(self):
        calls = []

        def spy(mined, labels, predicate, config):
            trained = fit_model(mined, labels, predicate, config)
            calls.append(({m.pair for m in mined}, {c.steps for c in trained.model.columns}))
            return trained

        with mock.patch.object(evaluation, "fit_model", side_effect=spy):
            cross_validate(self.graph, "p", self.rows, self.config)

        self.assertEqual(len(calls), 3)
        for pairs, steps in calls:
            self.assertEqual(self.leak in pairs, (("secret", False),) in steps)

    def test_separable_case_scores_perfectly(self):
        report = cross_validate(self.graph, "p", self.rows[:-1], self.config)
        self.assertEqual(report.auroc, 1.0)
        self.assertEqual(report.method, PREDPATH)
        self.assertEqual(sorted(set(report.fold_of.tolist())), [0, 1, 2])

    def test_thread_count_does_not_change_scores(self):
        single = cross_validate(self.graph, "p", self.rows, self.config)
        pooled = cross_validate(self.graph, "p", self.rows, PipelineConfig(folds=3, seed=1, threads=4))
        np.testing.assert_array_equal(single.scores, pooled.scores)

    def test_unknown_method_and_degenerate_statements(self):
        with self.assertRaises(EvaluationError):
            evaluate(self.graph, "p", self.rows, ["oracle"], self.config)
        s = self.rows[0][0]
        with self.assertRaises(EvaluationError):
            evaluate(self.graph, "p", self.rows + [(s, s, False)], [PREDPATH], self.config)

    def test_report_columns(self):
        reports = evaluate(self.graph, "p", self.rows[:-1], [PREDPATH, "pa"], self.config)
        frame = report_frame(reports)
        self.assertEqual(frame["method"].tolist(), [PREDPATH, "pa"])
        self.assertEqual(frame["statements"].tolist(), [24, 24])
        self.assertIn("fold_auroc_std", frame.columns)


    def test_subset_search_flags_one_best_size_per_mode(self):
        scores = subset_search(self.graph, "p", self.rows[:-1], self.config, [5, 1, 5, 100])
        frame = subset_frame(scores)
        self.assertEqual(frame["feature_mode"].tolist(), ["anchored"] * 3 + ["metapath"] * 3)
        self.assertEqual(frame["delta_top"].tolist(), [1, 5, 100] * 2)
        for mode, rows in frame.groupby("feature_mode"):
            self.assertEqual(rows["best"].sum(), 1, mode)
            best = rows[rows["best"] == 1].iloc[0]
            self.assertEqual(best["auroc"], rows["auroc"].max())
            self.assertEqual(best["delta_top"], rows[rows["auroc"] == rows["auroc"].max()]["delta_top"].min())
        # the single q path already separates the classes
        self.assertEqual(frame.loc[0, "auroc"], 1.0)
        self.assertEqual(frame.loc[0, "best"], 1)

    def test_subset_search_rejects_bad_sizes_and_modes(self):
        with self.assertRaises(EvaluationError):
            subset_search(self.graph, "p", self.rows, self.config, [0, 5])
        with self.assertRaises(EvaluationError):
            subset_search(self.graph, "p", self.rows, self.config, [5], modes=["typed"])


class ResampleTest(SimpleTestCase):

    def test_ratio_resampling_keeps_the_requested_fraction(self):
        rows = [(i, 100 + i, True) for i in range(20)] + [(i, 200 + i, False) for i in range(80)]
        resampled = resample_rows(rows, 0.5, seed=0)
        trues = sum(1 for *_, y in resampled if y)
        self.assertEqual((trues, len(resampled)), (20, 40))
        self.assertTrue(set(resampled) <= set(rows))
