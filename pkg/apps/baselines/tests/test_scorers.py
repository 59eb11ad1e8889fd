"""
Tests for the link-prediction baselines and the compare_baselines command.
"""
import math
import random
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.test import SimpleTestCase, TestCase

from apps.baselines.scorers import (
    BASELINES, UndirectedProjection, adamic_adar, katz, personalized_pagerank, preferential_attachment,
    semantic_proximity, simrank, simrank_matrix,
)
from apps.factcheck.models import PipelineRun
from apps.knowledge.loaders import load_graph


def graph_of(*triples):
    return load_graph([f"{s}\t{p}\t{o}\n" for s, p, o in triples])


def ids(graph, *names):
    return [graph.entity_id(n) for n in names]


def random_graph(rng, nodes=8, edges=14):
    triples = [(f"n{rng.randrange(nodes)}", "r", f"n{rng.randrange(nodes)}") for _ in range(edges)]
    return graph_of(*triples)


class RegistryTest(SimpleTestCase):

    def test_every_baseline_is_registered(self):
        self.assertEqual(set(BASELINES), {"aa", "pa", "katz", "sp", "ppr", "simrank"})


class NeighborhoodScoresTest(SimpleTestCase):

    def test_no_common_neighbor_scores_zero(self):
        g = graph_of(("a", "p", "b"), ("c", "p", "d"))
        a, c = ids(g, "a", "c")
        self.assertEqual(adamic_adar(g, a, c), 0.0)

    def test_adamic_adar_weights_by_log_degree(self):
        g = graph_of(("u", "p", "w"), ("w", "q", "v"))
        u, v = ids(g, "u", "v")
        self.assertAlmostEqual(adamic_adar(g, u, v), 1.0 / math.log(2))

    def test_preferential_attachment_multiplies_degrees(self):
        g = graph_of(("u", "p", "a"), ("u", "p", "b"), ("u", "q", "c"),
                     ("v", "p", "a"), ("v", "p", "d"), ("v", "p", "e"), ("v", "p", "f"))
        u, v = ids(g, "u", "v")
        self.assertEqual(preferential_attachment(g, u, v), 12.0)

    def test_projection_ignores_direction_and_predicate(self):
        forward = graph_of(("a", "p", "b"), ("b", "q", "c"))
        backward = graph_of(("b", "r", "a"), ("c", "s", "b"))
        for g in (forward, backward):
            a, c = ids(g, "a", "c")
            self.assertAlmostEqual(adamic_adar(g, a, c), 1.0 / math.log(2))

    def test_random_graphs_match_neighbor_and_degree_oracles(self):
        rng = random.Random(23)
        for _ in range(20):
            triples = [(f"n{rng.randrange(9)}", f"p{rng.randrange(3)}", f"n{rng.randrange(9)}") for _ in range(18)]
            g = graph_of(*triples)
            proj = UndirectedProjection(g)
            neighbors = {v: set() for v in range(g.num_entities)}
            degree = [0] * g.num_entities
            for s, _, o in triples:
                s, o = g.entity_id(s), g.entity_id(o)
                degree[s] += 1
                degree[o] += 1
                if s != o:
                    neighbors[s].add(o)
                    neighbors[o].add(s)
            for u in range(g.num_entities):
                for v in range(g.num_entities):
                    if u == v:
                        continue
                    expected_aa = sum(1.0 / math.log(degree[w]) for w in neighbors[u] & neighbors[v])
                    self.assertAlmostEqual(adamic_adar(proj, u, v), expected_aa, places=12)
                    self.assertEqual(preferential_attachment(proj, u, v), float(degree[u] * degree[v]))

    def test_symmetric_baselines(self):
        rng = random.Random(31)
        for _ in range(5):
            proj = UndirectedProjection(random_graph(rng))
            for u in range(proj.num_nodes):
                for v in range(u + 1, proj.num_nodes):
                    for scorer in (adamic_adar, preferential_attachment, simrank):
                        self.assertAlmostEqual(scorer(proj, u, v), scorer(proj, v, u), places=12)


class KatzTest(SimpleTestCase):

    def test_disconnected_pair(self):
        g = graph_of(("a", "p", "b"), ("c", "p", "d"))
        a, d = ids(g, "a", "d")
        self.assertEqual(katz(g, a, d), 0.0)

    def test_single_edge_counts_walks_up_to_three(self):
        g = graph_of(("u", "p", "v"))
        u, v = ids(g, "u", "v")
        self.assertAlmostEqual(katz(g, u, v), 0.05 + 0.05 ** 3, places=15)

    def test_matches_matrix_powers(self):
        rng = random.Random(5)
        for _ in range(20):
            g = random_graph(rng)
            proj = UndirectedProjection(g)
            A = proj.adjacency.toarray()
            oracle = sum(0.05 ** i * np.linalg.matrix_power(A, i) for i in range(1, 4))
            u, v = rng.randrange(g.num_entities), rng.randrange(g.num_entities)
            self.assertAlmostEqual(katz(proj, u, v), oracle[u, v], places=12)


def brute_force_proximity(proj, u, v, k=3):
    best = math.inf
    stack = [(u, [u], 0.0)]
    while stack:
        x, path, cost = stack.pop()
        for y in proj.neighbors(x).tolist():
            if y == v:
                best = min(best, cost)
            elif y not in path and len(path) < k:
                stack.append((y, path + [y], cost + math.log(proj.degree[y])))
    return 0.0 if math.isinf(best) else 1.0 / (1.0 + best)


class SemanticProximityTest(SimpleTestCase):

    def test_direct_edge_scores_one(self):
        g = graph_of(("u", "p", "v"), ("u", "p", "w"), ("w", "p", "v"))
        u, v = ids(g, "u", "v")
        self.assertEqual(semantic_proximity(g, u, v), 1.0)

    def test_interior_degree_penalty(self):
        g = graph_of(("u", "p", "w"), ("w", "p", "v"))
        u, v = ids(g, "u", "v")
        self.assertAlmostEqual(semantic_proximity(g, u, v), 1.0 / (1.0 + math.log(2)))

    def test_paths_longer_than_three_hops_are_ignored(self):
        g = graph_of(("a", "p", "b"), ("b", "p", "c"), ("c", "p", "d"), ("d", "p", "e"))
        a, e = ids(g, "a", "e")
        self.assertEqual(semantic_proximity(g, a, e), 0.0)

    def test_matches_brute_force(self):
        rng = random.Random(9)
        for _ in range(30):
            g = random_graph(rng)
            proj = UndirectedProjection(g)
            u, v = rng.sample(range(g.num_entities), 2) if g.num_entities > 1 else (0, 0)
            if u == v:
                continue
            self.assertAlmostEqual(semantic_proximity(proj, u, v), brute_force_proximity(proj, u, v), places=12)


class PersonalizedPageRankTest(SimpleTestCase):

    def test_source_without_other_neighbors_keeps_all_mass(self):
        g = graph_of(("u", "p", "v"), ("c", "p", "c"))
        (c,) = ids(g, "c")
        self.assertAlmostEqual(personalized_pagerank(g, c, c), 1.0, places=9)

    def test_two_node_graph(self):
        g = graph_of(("u", "p", "v"))
        u, v = ids(g, "u", "v")
        self.assertAlmostEqual(personalized_pagerank(g, u, u), 0.15 / (1 - 0.85 ** 2), places=9)
        self.assertAlmostEqual(personalized_pagerank(g, u, v), 0.85 * 0.15 / (1 - 0.85 ** 2), places=9)

    def test_vector_is_a_distribution(self):
        rng = random.Random(3)
        for _ in range(10):
            proj = UndirectedProjection(random_graph(rng))
            u = rng.randrange(proj.num_nodes)
            total = sum(personalized_pagerank(proj, u, v) for v in range(proj.num_nodes))
            self.assertAlmostEqual(total, 1.0, places=8)


def simrank_oracle(proj, c=0.8, iterations=100):
    n = proj.num_nodes
    nbrs = [proj.neighbors(u).tolist() for u in range(n)]
    S = np.eye(n)
    for _ in range(iterations):
        nxt = np.eye(n)
        for a in range(n):
            for b in range(n):
                if a != b and nbrs[a] and nbrs[b]:
                    nxt[a, b] = c * sum(S[i, j] for i in nbrs[a] for j in nbrs[b]) / (len(nbrs[a]) * len(nbrs[b]))
        S = nxt
    return S


class SimRankTest(SimpleTestCase):

    def test_self_similarity_and_isolated_nodes(self):
        g = graph_of(("a", "p", "b"), ("c", "p", "c"))
        a, c = ids(g, "a", "c")
        self.assertEqual(simrank(g, a, a), 1.0)
        self.assertEqual(simrank(g, a, c), 0.0)

    def test_matches_fixed_point_oracle(self):
        rng = random.Random(17)
        for _ in range(5):
            proj = UndirectedProjection(random_graph(rng, nodes=6, edges=9))
            S = simrank_matrix(proj)
            np.testing.assert_allclose(S, simrank_oracle(proj), atol=1e-8)
            np.testing.assert_allclose(S, S.T, atol=1e-12)


class CompareBaselinesCommandTest(TestCase):

    def test_table_has_every_method(self):
        with tempfile.TemporaryDirectory() as tmp:
            call_command("generate_fixture", tmp, states=15, seed=0, stdout=StringIO())
            out = Path(tmp) / "table.csv"
            call_command(
                "compare_baselines", str(Path(tmp) / "capital_edges.tsv"), str(Path(tmp) / "capital_testcase.tsv"),
                labels=str(Path(tmp) / "capital_labels.tsv"), folds=5, out=str(out), stdout=StringIO(),
            )
            table = pd.read_csv(out)
        self.assertEqual(table["method"].tolist(), ["predpath", "aa", "pa", "katz", "sp", "ppr", "simrank"])
        self.assertTrue(table["auroc"].between(0, 1).all())
        self.assertEqual(PipelineRun.objects.get().kind, "baseline")
