"""
Tests for path ranking, definition pruning and explanations.
"""
import math

import numpy as np
from django.test import SimpleTestCase

from apps.factcheck.services.features import FeatureMatrix
from apps.factcheck.services.interpret import Explanation, collect_evidence, prune_to_definition, rank_paths
from apps.factcheck.services.paths import AnchoredPath, PathInstance, enumerate_paths
from apps.knowledge.graph import Step
from apps.knowledge.loaders import load_graph


def paths(*names):
    return [AnchoredPath(((n, False),)) for n in names]


def matrix_with_negative_sums(sums):
    # one positive row of ones, then negatives whose column totals are ``sums``
    X = np.vstack([np.ones(len(sums), dtype=int), np.array(sums, dtype=int)])
    return FeatureMatrix(X=X, y=np.array([True, False]), columns=paths(*(f"p{j}" for j in range(len(sums)))),
                         row_pairs=[(0, 1), (2, 3)])


class RankPathsTest(SimpleTestCase):

    def test_descending_importance(self):
        ranked = rank_paths([0.2, 0.9, 0.2], paths("a", "b", "c"))
        self.assertEqual([r.column for r in ranked], [1, 0, 2])
        self.assertEqual(ranked[0].path, AnchoredPath((("b", False),)))

    def test_equal_importance_keeps_column_order(self):
        ranked = rank_paths([0.5] * 4, paths("a", "b", "c", "d"))
        self.assertEqual([r.column for r in ranked], [0, 1, 2, 3])

    def test_misaligned_input(self):
        with self.assertRaises(ValueError):
            rank_paths([0.1], paths("a", "b"))


class PruneTest(SimpleTestCase):

    def setUp(self):
        self.matrix = matrix_with_negative_sums([25, 3, 15, 14])
        self.ranked = rank_paths([0.9, 0.8, 0.7, 0.6], self.matrix.columns)

    def test_frequent_negative_paths_are_removed(self):
        kept = prune_to_definition(self.ranked, self.matrix, 15.0)
        self.assertEqual([r.column for r in kept], [1, 3])

    def test_infinite_threshold_keeps_everything(self):
        self.assertEqual(prune_to_definition(self.ranked, self.matrix, math.inf), self.ranked)

    def test_larger_threshold_never_removes_more(self):
        previous = set()
        for theta in (1, 4, 15, 16, 26, 100):
            kept = {r.column for r in prune_to_definition(self.ranked, self.matrix, theta)}
            self.assertLessEqual(previous, kept)
            previous = kept

    def test_non_positive_threshold_rejected(self):
        for theta in (0, -1.0):
            with self.assertRaises(ValueError):
                prune_to_definition(self.ranked, self.matrix, theta)


class ExplanationTest(SimpleTestCase):

    def setUp(self):
        self.graph = load_graph(
            ["IDOT\theadquarter\tSpringfield\n", "IDOT\tjurisdiction\tIllinois\n"],
            ["Springfield\tcity\n", "Illinois\tstate\n", "IDOT\tagency\n"],
        )
        g = self.graph
        self.instances = list(enumerate_paths(g, g.entity_id("Springfield"), g.entity_id("Illinois"), 3))
        self.path = AnchoredPath((("headquarter", True), ("jurisdiction", False)),
                                 frozenset({"city"}), frozenset({"state"}))

    def test_evidence_is_rendered_as_a_readable_walk(self):
        evidence = collect_evidence(self.graph, [(self.path, 0.97)], {self.path: self.instances})
        explanation = Explanation("Springfield", "capitalOf", "Illinois", 0.91, evidence, self.graph)
        text = explanation.to_text()
        self.assertIn("verdict: TRUE (p=0.9100)", text)
        self.assertIn("Springfield <-headquarter- IDOT -jurisdiction-> Illinois", text)
        self.assertEqual(explanation.as_dict()["definition"][0]["evidence"], [["Springfield", "IDOT", "Illinois"]])

    def test_missing_evidence_is_reported(self):
        evidence = collect_evidence(self.graph, [(self.path, 0.5)], {})
        explanation = Explanation("Chicago", "capitalOf", "Illinois", 0.2, evidence, self.graph)
        self.assertFalse(explanation.verdict)
        self.assertIn("(no evidence)", explanation.to_text())

    def test_forged_instance_is_rejected(self):
        g = self.graph
        forged = PathInstance(
            (g.entity_id("Springfield"), g.entity_id("Illinois")),
            (Step(g.predicate_id("headquarter"), False),),
        )
        with self.assertRaises(RuntimeError):
            collect_evidence(g, [(self.path, 0.5)], {self.path: [forged]})
