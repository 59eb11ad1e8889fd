"""In-memory typed multigraph.

Edges are interned to dense integer ids and stored twice, as forward and
reverse compressed adjacency (CSR) arrays sorted by (node, predicate,
neighbor).  Parallel triples are collapsed into one edge key carrying a
multiplicity count.  A graph is immutable once built; ``masked_view`` returns
a shallow copy that shares every array and only adds predicates to a filter.
"""

import copy
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .exceptions import UnknownEntityError, UnknownPredicateError


class Step(NamedTuple):
    """One hop of a path: a predicate followed forward or against its direction."""

    predicate: int
    inverse: bool


class Neighbor(NamedTuple):
    step: Step
    node: int
    multiplicity: int


@dataclass(frozen=True)
class Statement:
    subject: int
    predicate: str
    object: int
    label: Optional[bool] = None


@dataclass(frozen=True)
class GraphStatistics:
    entities: int
    edges: int
    edge_keys: int
    predicates: int
    labels: int
    unlabeled: int
    multi_labeled: int

    def as_rows(self):
        return [
            ("|V|", self.entities),
            ("|E|", self.edges),
            ("|R|", self.predicates),
            ("|O|", self.labels),
            ("unlabeled", self.unlabeled),
            ("multi-label", self.multi_labeled),
            ("edge keys", self.edge_keys),
        ]


def _csr(nodes, preds, nbrs, mults, num_nodes):
    order = np.lexsort((nbrs, preds, nodes))
    nodes = nodes[order]
    indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(nodes, minlength=num_nodes), out=indptr[1:])
    return indptr, preds[order], nbrs[order], mults[order]


class KnowledgeGraph:
    """Directed labeled multigraph with per-entity ontology label sets."""

    def __init__(
        self,
        entity_names: Sequence[str],
        predicate_names: Sequence[str],
        label_names: Sequence[str],
        entity_labels: Sequence[Tuple[int, ...]],
        src: np.ndarray,
        pred: np.ndarray,
        dst: np.ndarray,
        multiplicity: np.ndarray,
    ):
        self.entity_names: List[str] = list(entity_names)
        self.predicate_names: List[str] = list(predicate_names)
        self.label_names: List[str] = list(label_names)
        self._entity_index: Dict[str, int] = {n: i for i, n in enumerate(self.entity_names)}
        self._predicate_index: Dict[str, int] = {n: i for i, n in enumerate(self.predicate_names)}
        self._label_index: Dict[str, int] = {n: i for i, n in enumerate(self.label_names)}
        self._entity_labels: List[FrozenSet[int]] = [frozenset(ids) for ids in entity_labels]
        self._masked: FrozenSet[int] = frozenset()

        n = len(self.entity_names)
        src = np.asarray(src, dtype=np.int64)
        pred = np.asarray(pred, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        multiplicity = np.asarray(multiplicity, dtype=np.int64)
        self._fwd = _csr(src, pred, dst, multiplicity, n)
        self._rev = _csr(dst, pred, src, multiplicity, n)

    # -- id tables -----------------------------------------------------------

    @property
    def num_entities(self) -> int:
        return len(self.entity_names)

    @property
    def num_predicates(self) -> int:
        return len(self.predicate_names)

    def entity_id(self, name: str) -> int:
        try:
            return self._entity_index[name]
        except KeyError:
            raise UnknownEntityError(name) from None

    def predicate_id(self, name: str) -> int:
        try:
            return self._predicate_index[name]
        except KeyError:
            raise UnknownPredicateError(name) from None

    def has_predicate(self, name: str) -> bool:
        return name in self._predicate_index

    def entity_labels(self, v: int) -> FrozenSet[int]:
        """Ontology label ids of ``v``; empty for unlabeled entities."""
        return self._entity_labels[v]

    def entity_label_names(self, v: int) -> FrozenSet[str]:
        return frozenset(self.label_names[i] for i in self._entity_labels[v])

    def entities_with_any_label(self, label_names) -> List[int]:
        """Entities sharing at least one label with ``label_names``, in id order."""
        wanted = {self._label_index[n] for n in label_names if n in self._label_index}
        if not wanted:
            return []
        return [v for v, labels in enumerate(self._entity_labels) if labels & wanted]

    def statement(self, subject: str, predicate: str, obj: str, label: Optional[bool] = None) -> Statement:
        return Statement(self.entity_id(subject), predicate, self.entity_id(obj), label)

    # -- adjacency -----------------------------------------------------------

    def _slice(self, arrays, v, p=None):
        indptr, preds, nbrs, mults = arrays
        lo, hi = int(indptr[v]), int(indptr[v + 1])
        if p is not None:
            block = preds[lo:hi]
            lo, hi = lo + int(np.searchsorted(block, p, "left")), lo + int(np.searchsorted(block, p, "right"))
        return preds[lo:hi].tolist(), nbrs[lo:hi].tolist(), mults[lo:hi].tolist()

    def closure(self, v: int, p: int) -> List[Neighbor]:
        """Nodes reached from ``v`` over ``p`` in either direction, with multiplicities."""
        if p in self._masked:
            return []
        out = []
        for inverse, arrays in ((False, self._fwd), (True, self._rev)):
            _, nbrs, mults = self._slice(arrays, v, p)
            step = Step(p, inverse)
            out.extend(Neighbor(step, u, m) for u, m in zip(nbrs, mults))
        return out

    def neighbors(self, v: int) -> List[Neighbor]:
        """Union of ``closure(v, p)`` over every unmasked predicate."""
        masked = self._masked
        out = []
        for inverse, arrays in ((False, self._fwd), (True, self._rev)):
            preds, nbrs, mults = self._slice(arrays, v)
            for p, u, m in zip(preds, nbrs, mults):
                if p not in masked:
                    out.append(Neighbor(Step(p, inverse), u, m))
        return out

    def edge_multiplicity(self, s: int, p: int, t: int) -> int:
        if p in self._masked:
            return 0
        _, nbrs, mults = self._slice(self._fwd, s, p)
        for u, m in zip(nbrs, mults):
            if u == t:
                return m
        return 0

    def has_edge(self, s: int, p: int, t: int) -> bool:
        return self.edge_multiplicity(s, p, t) > 0

    def edge_arrays(self, reverse: bool = False) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(src, pred, dst, multiplicity) of every unmasked edge key."""
        indptr, preds, nbrs, mults = self._rev if reverse else self._fwd
        nodes = np.repeat(np.arange(self.num_entities, dtype=np.int64), np.diff(indptr))
        keep = ~np.isin(preds, list(self._masked)) if self._masked else slice(None)
        if reverse:
            return nbrs[keep], preds[keep], nodes[keep], mults[keep]
        return nodes[keep], preds[keep], nbrs[keep], mults[keep]

    def predicate_edges(self, p: int) -> List[Tuple[int, int]]:
        """Distinct (subject, object) pairs joined by ``p``, sorted."""
        if p in self._masked:
            return []
        src, pred, dst, _ = self.edge_arrays()
        hit = pred == p
        return sorted(zip(src[hit].tolist(), dst[hit].tolist()))

    def num_edges(self) -> int:
        return int(self.edge_arrays()[3].sum())

    def num_edge_keys(self) -> int:
        return int(len(self.edge_arrays()[3]))

    # -- views ---------------------------------------------------------------

    def masked_view(self, p) -> "KnowledgeGraph":
        """View of the graph with every ``p``-labeled edge hidden; arrays are shared."""
        if isinstance(p, str):
            p = self.predicate_id(p)
        elif not 0 <= p < self.num_predicates:
            raise UnknownPredicateError(str(p))
        view = copy.copy(self)
        view._masked = self._masked | {p}
        return view

    def statistics(self) -> GraphStatistics:
        return GraphStatistics(
            entities=self.num_entities,
            edges=self.num_edges(),
            edge_keys=self.num_edge_keys(),
            predicates=self.num_predicates,
            labels=len(self.label_names),
            unlabeled=sum(1 for labels in self._entity_labels if not labels),
            multi_labeled=sum(1 for labels in self._entity_labels if len(labels) > 1),
        )

    def __repr__(self):
        masked = ""
        if self._masked:
            masked = f" masked={sorted(self.predicate_names[p] for p in self._masked)}"
        return f"<KnowledgeGraph |V|={self.num_entities} |R|={self.num_predicates}{masked}>"
