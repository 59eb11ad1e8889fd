"""Link-prediction baselines on the symmetrized, type-blind projection of a graph.

Every scorer takes a ``KnowledgeGraph`` (or a prebuilt ``UndirectedProjection``,
which caches per-source vectors) and two entity ids.  Degrees count edge
multiplicity; neighbor sets do not.
"""

import logging
import math
from typing import Callable, Dict, Union

import numpy as np
from scipy import sparse

from apps.knowledge.exceptions import ConvergenceError, EvaluationError
from apps.knowledge.graph import KnowledgeGraph

logger = logging.getLogger(__name__)

SIMRANK_MAX_NODES = 6000

BASELINES: Dict[str, Callable] = {}


def baseline(name: str):
    def register(func):
        BASELINES[name] = func
        return func

    return register


class UndirectedProjection:
    """Weighted symmetric adjacency ``A[u, v]`` = number of edges between u and v."""

    def __init__(self, graph: KnowledgeGraph):
        src, _, dst, mult = graph.edge_arrays()
        n = graph.num_entities
        weights = np.concatenate([mult, mult]).astype(float)
        rows = np.concatenate([src, dst])
        cols = np.concatenate([dst, src])
        self.adjacency = sparse.csr_matrix((weights, (rows, cols)), shape=(n, n))
        self.degree = np.asarray(self.adjacency.sum(axis=1)).ravel()

        binary = self.adjacency.tolil()
        binary.setdiag(0)
        binary = binary.tocsr()
        binary.eliminate_zeros()
        binary.data[:] = 1.0
        self.binary = binary
        self.num_nodes = n
        self._katz: Dict = {}
        self._ppr: Dict = {}
        self._simrank: Dict = {}

    def neighbors(self, u: int) -> np.ndarray:
        return self.binary.indices[self.binary.indptr[u]:self.binary.indptr[u + 1]]


def projection(graph: Union[KnowledgeGraph, UndirectedProjection]) -> UndirectedProjection:
    if isinstance(graph, UndirectedProjection):
        return graph
    return UndirectedProjection(graph)


@baseline("aa")
def adamic_adar(graph, u: int, v: int) -> float:
    proj = projection(graph)
    common = np.intersect1d(proj.neighbors(u), proj.neighbors(v), assume_unique=True)
    deg = proj.degree[common]
    deg = deg[deg > 1]
    return float(np.sum(1.0 / np.log(deg))) if deg.size else 0.0


@baseline("pa")
def preferential_attachment(graph, u: int, v: int) -> float:
    proj = projection(graph)
    return float(proj.degree[u] * proj.degree[v])


@baseline("katz")
def katz(graph, u: int, v: int, k: int = 3, beta: float = 0.05) -> float:
    """Sum over i <= k of beta^i times the number of length-i walks from u to v.

    Walks may revisit nodes, so a single edge u-v also scores the u-v-u-v walk:
    0.05 + 0.05**3 = 0.050125 rather than 0.05.
    """
    proj = projection(graph)
    key = (u, k, beta)
    if key not in proj._katz:
        walk = np.zeros(proj.num_nodes)
        walk[u] = 1.0
        total = np.zeros(proj.num_nodes)
        for i in range(1, k + 1):
            walk = proj.adjacency @ walk
            total += beta ** i * walk
        proj._katz[key] = total
    return float(proj._katz[key][v])


@baseline("sp")
def semantic_proximity(graph, u: int, v: int, k: int = 3) -> float:
    """Best path of at most k hops, scored 1 / (1 + sum of log degree over interior nodes)."""
    if u == v:
        return 1.0
    proj = projection(graph)
    best = math.inf

    def walk(x, depth, penalty, visited):
        nonlocal best
        for y in proj.neighbors(x).tolist():
            if y == v:
                best = min(best, penalty)
                continue
            if depth + 1 >= k or y in visited:
                continue
            cost = penalty + math.log(proj.degree[y])
            if cost < best:
                visited.add(y)
                walk(y, depth + 1, cost, visited)
                visited.discard(y)

    walk(u, 0, 0.0, {u})
    return 0.0 if math.isinf(best) else 1.0 / (1.0 + best)


def pagerank_vector(proj: UndirectedProjection, u: int, d: float = 0.15, tol: float = 1e-10, max_iter: int = 100000):
    """Stationary distribution of the walk that restarts at ``u`` with probability ``d``.

    Mass at nodes without neighbors returns to ``u``.
    """
    key = (u, d)
    if key in proj._ppr:
        return proj._ppr[key]
    deg = proj.degree
    dangling = deg == 0
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=~dangling)
    x = np.zeros(proj.num_nodes)
    x[u] = 1.0
    for _ in range(max_iter):
        nxt = (1.0 - d) * (proj.adjacency @ (x * inv))
        nxt[u] += d + (1.0 - d) * x[dangling].sum()
        if np.abs(nxt - x).sum() < tol:
            proj._ppr[key] = nxt
            return nxt
        x = nxt
    raise ConvergenceError("personalized PageRank did not converge", iterations=max_iter)


@baseline("ppr")
def personalized_pagerank(graph, u: int, v: int, d: float = 0.15) -> float:
    return float(pagerank_vector(projection(graph), u, d)[v])


def simrank_matrix(proj: UndirectedProjection, c: float = 0.8, iterations: int = 100, tol: float = 1e-12) -> np.ndarray:
    """Exact SimRank over neighbor sets: S = c * W^T S W with unit diagonal."""
    key = (c, iterations)
    if key in proj._simrank:
        return proj._simrank[key]
    n = proj.num_nodes
    if n > SIMRANK_MAX_NODES:
        raise EvaluationError(f"exact SimRank is limited to {SIMRANK_MAX_NODES} nodes, graph has {n}")
    counts = np.asarray(proj.binary.sum(axis=0)).ravel()
    inv = np.divide(1.0, counts, out=np.zeros_like(counts), where=counts > 0)
    W = (proj.binary @ sparse.diags(inv)).tocsr()
    Wt = W.T.tocsr()

    S = np.eye(n)
    for step in range(iterations):
        left = Wt @ S
        nxt = c * (Wt @ left.T).T
        np.fill_diagonal(nxt, 1.0)
        delta = np.abs(nxt - S).max()
        S = nxt
        if delta < tol:
            logger.debug("SimRank converged after %d iterations", step + 1)
            break
    proj._simrank[key] = S
    return S


@baseline("simrank")
def simrank(graph, u: int, v: int, c: float = 0.8, iterations: int = 100) -> float:
    return float(simrank_matrix(projection(graph), c, iterations)[u, v])
