"""Path mining: bounded simple-path enumeration and anchored predicate paths.

Paths between a subject and an object are enumerated by a depth-first search
that follows every edge in both directions, never revisits a node and stops
after ``k`` hops.  Each path instance is reduced to an anchored predicate
path: its predicate/direction sequence plus the label sets of its two
endpoints.  Endpoint anchors of the same step sequence are merged when they
share at least one label.
"""

import logging
import re
import time
from collections import Counter, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from apps.knowledge.exceptions import ModelFormatError, StatementError
from apps.knowledge.graph import KnowledgeGraph, Step

logger = logging.getLogger(__name__)

ANCHORED = "anchored"
METAPATH = "metapath"
FEATURE_MODES = (ANCHORED, METAPATH)

LabelNames = FrozenSet[str]
NamedStep = Tuple[str, bool]


class PathInstance(NamedTuple):
    nodes: Tuple[int, ...]
    steps: Tuple[Step, ...]


@dataclass(frozen=True)
class MetaPath:
    node_labels: Tuple[LabelNames, ...]
    steps: Tuple[NamedStep, ...]

    def __post_init__(self):
        if not self.steps or len(self.node_labels) != len(self.steps) + 1:
            raise ValueError("a meta path needs L >= 1 steps and L + 1 label sets")


def _step_text(step: NamedStep) -> str:
    name, inverse = step
    return f"{name}^-1" if inverse else name


def _labels_text(labels) -> str:
    return "{" + ",".join(sorted(labels)) + "}"


def _parse_labels(text: str) -> LabelNames:
    return frozenset(label.strip() for label in text.split(",") if label.strip())


_PATH_RE = re.compile(r"^\{(?P<src>[^{}]*)\} <(?P<steps>.*)> \{(?P<dst>[^{}]*)\}$")
_STEP_RE = re.compile(r"^(?P<name>.+?)(?P<inv>\^-1)?(?: \[(?P<labels>[^\[\]]*)\])?$")


@dataclass(frozen=True)
class AnchoredPath:
    """Step sequence anchored by endpoint label sets.

    ``interior`` is only set for meta-path features, where every interior
    node's label set is part of the key.
    """

    steps: Tuple[NamedStep, ...]
    source_labels: LabelNames = frozenset()
    target_labels: LabelNames = frozenset()
    interior: Optional[Tuple[LabelNames, ...]] = None

    def __post_init__(self):
        if not self.steps:
            raise ValueError("an anchored path needs at least one step")

    @property
    def text(self) -> str:
        parts = []
        for i, step in enumerate(self.steps):
            part = _step_text(step)
            if self.interior is not None and i < len(self.interior):
                part = f"{part} {_labels_text(self.interior[i]).replace('{', '[').replace('}', ']')}"
            parts.append(part)
        return f"{_labels_text(self.source_labels)} <{', '.join(parts)}> {_labels_text(self.target_labels)}"

    def __str__(self):
        return self.text

    @classmethod
    def parse(cls, text: str, metapath: bool = False) -> "AnchoredPath":
        match = _PATH_RE.match(text.strip())
        if not match:
            raise ModelFormatError(f"not an anchored path: '{text}'")
        steps, interior = [], []
        for part in match.group("steps").split(", "):
            step = _STEP_RE.match(part.strip())
            if not step:
                raise ModelFormatError(f"bad path step '{part}' in '{text}'")
            steps.append((step.group("name"), step.group("inv") is not None))
            if step.group("labels") is not None:
                interior.append(_parse_labels(step.group("labels")))
        if metapath and len(interior) != len(steps) - 1:
            raise ModelFormatError(f"meta path '{text}' needs one label set per interior node")
        if interior and not metapath:
            raise ModelFormatError(f"interior labels are only allowed in meta paths: '{text}'")
        return cls(
            steps=tuple(steps),
            source_labels=_parse_labels(match.group("src")),
            target_labels=_parse_labels(match.group("dst")),
            interior=tuple(interior) if metapath else None,
        )

    def sort_key(self):
        interior = tuple(tuple(sorted(s)) for s in self.interior) if self.interior is not None else ()
        return (
            self.steps,
            tuple(sorted(self.source_labels)),
            tuple(sorted(self.target_labels)),
            interior,
        )

    def matches(self, meta: MetaPath) -> bool:
        if meta.steps != self.steps:
            return False
        if self.interior is not None:
            return (
                meta.node_labels[0] == self.source_labels
                and meta.node_labels[-1] == self.target_labels
                and tuple(meta.node_labels[1:-1]) == self.interior
            )
        return endpoint_compatible(meta.node_labels[0], self.source_labels) and endpoint_compatible(
            meta.node_labels[-1], self.target_labels
        )


# -- traversal ---------------------------------------------------------------


def transition(graph: KnowledgeGraph, prefix: Sequence[int]) -> List[Tuple[Step, int]]:
    """Next (step, node) moves from the end of ``prefix`` that avoid its nodes."""
    if not prefix:
        raise ValueError("prefix must contain at least one node")
    visited = set(prefix)
    moves = {(n.step, n.node) for n in graph.neighbors(prefix[-1]) if n.node not in visited}
    return sorted(moves)


def _distances_to(graph: KnowledgeGraph, target: int, limit: int) -> Dict[int, int]:
    """Hop distance to ``target`` on the symmetrized graph, for nodes within ``limit``."""
    dist = {target: 0}
    queue = deque([target])
    while queue:
        v = queue.popleft()
        d = dist[v]
        if d == limit:
            continue
        for n in graph.neighbors(v):
            if n.node not in dist:
                dist[n.node] = d + 1
                queue.append(n.node)
    return dist


def enumerate_paths(
    graph: KnowledgeGraph, s: int, t: int, k: int, hub_cap: Optional[int] = None
) -> Counter:
    """All simple s-to-t paths of at most ``k`` hops, as a multiset of instances.

    Parallel edges yield distinct instances, so an instance's count is the
    product of the multiplicities along it.  Branches that cannot reach
    ``t`` within the remaining hops are pruned.  ``hub_cap`` truncates the
    fan-out of high-degree nodes and breaks exhaustiveness.
    """
    if s == t:
        raise StatementError(f"statement endpoints must differ (entity {s})")
    if k < 1:
        raise ValueError(f"maximum path length must be >= 1, got {k}")

    dist = _distances_to(graph, t, k - 1)
    results: Counter = Counter()

    nodes, steps, visited = [s], [], {s}
    capped = []

    def dfs(v, depth, weight):
        nbrs = graph.neighbors(v)
        if hub_cap is not None and len(nbrs) > hub_cap:
            capped.append(v)
            nbrs = nbrs[:hub_cap]
        for step, u, m in nbrs:
            if u in visited:
                continue
            if u == t:
                results[PathInstance(tuple(nodes) + (t,), tuple(steps) + (step,))] += weight * m
                continue
            remaining = k - depth - 1
            if remaining < 1 or dist.get(u, k) > remaining:
                continue
            visited.add(u)
            nodes.append(u)
            steps.append(step)
            dfs(u, depth + 1, weight * m)
            steps.pop()
            nodes.pop()
            visited.discard(u)

    dfs(s, 0, 1)
    if capped:
        logger.warning(
            "Hub cap %d truncated fan-out at %d node(s) between %s and %s; path enumeration is not exhaustive",
            hub_cap, len(set(capped)), graph.entity_names[s], graph.entity_names[t],
        )
    return results


# -- anchoring ---------------------------------------------------------------


def jaccard(a: Iterable, b: Iterable) -> Fraction:
    a, b = set(a), set(b)
    union = a | b
    if not union:
        return Fraction(1)
    return Fraction(len(a & b), len(union))


def endpoint_compatible(a: Iterable, b: Iterable) -> bool:
    """Endpoint merge rule: J(a, b) >= 1 / |a | b|, i.e. at least one shared label."""
    a, b = set(a), set(b)
    union = a | b
    if not union:
        return True
    return jaccard(a, b) >= Fraction(1, len(union))


def meta_path(graph: KnowledgeGraph, instance: PathInstance, label_cache=None) -> MetaPath:
    if label_cache is None:
        label_cache = {}
    labels = []
    for v in instance.nodes:
        if v not in label_cache:
            label_cache[v] = graph.entity_label_names(v)
        labels.append(label_cache[v])
    steps = tuple((graph.predicate_names[s.predicate], s.inverse) for s in instance.steps)
    return MetaPath(tuple(labels), steps)


@dataclass
class _AnchorGroup:
    steps: Tuple[NamedStep, ...]
    source: set
    target: set

    def freeze(self) -> AnchoredPath:
        return AnchoredPath(self.steps, frozenset(self.source), frozenset(self.target))


class AnchorPolicy:
    """Per-run registry of anchored paths observed so far.

    A meta path joins the first registered path with the same steps whose
    endpoint anchors are compatible with its own, widening those anchors to
    the union; otherwise it registers a new anchored path.  A widened path
    absorbs every other path it has become compatible with, so no two
    registered paths with the same steps are ever compatible.
    """

    def __init__(self):
        self._groups: Dict[Tuple[NamedStep, ...], List[_AnchorGroup]] = {}

    def merge(self, meta: MetaPath) -> _AnchorGroup:
        source, target = meta.node_labels[0], meta.node_labels[-1]
        groups = self._groups.setdefault(meta.steps, [])
        for group in groups:
            if endpoint_compatible(source, group.source) and endpoint_compatible(target, group.target):
                group.source |= source
                group.target |= target
                self._absorb(groups, group)
                return group
        group = _AnchorGroup(meta.steps, set(source), set(target))
        groups.append(group)
        return group

    @staticmethod
    def _absorb(groups: List[_AnchorGroup], group: _AnchorGroup) -> None:
        while True:
            other = next(
                (
                    g for g in groups
                    if g is not group
                    and endpoint_compatible(g.source, group.source)
                    and endpoint_compatible(g.target, group.target)
                ),
                None,
            )
            if other is None:
                return
            group.source |= other.source
            group.target |= other.target
            groups[:] = [g for g in groups if g is not other]

    def paths(self) -> List[AnchoredPath]:
        frozen = {g.freeze() for groups in self._groups.values() for g in groups}
        return sorted(frozen, key=AnchoredPath.sort_key)


def to_anchored(meta: MetaPath, endpoint_policy: Optional[AnchorPolicy] = None) -> AnchoredPath:
    """Erase interior labels; with a policy, merge the anchors into an observed path."""
    if endpoint_policy is None:
        return AnchoredPath(meta.steps, meta.node_labels[0], meta.node_labels[-1])
    return endpoint_policy.merge(meta).freeze()


def to_metapath_feature(meta: MetaPath) -> AnchoredPath:
    return AnchoredPath(meta.steps, meta.node_labels[0], meta.node_labels[-1], tuple(meta.node_labels[1:-1]))


# -- feature extraction --------------------------------------------------------


@dataclass
class MinedPair:
    pair: Tuple[int, int]
    instances: Counter
    seconds: float
    metas: List[Tuple[MetaPath, int]] = field(default_factory=list)


def mine_pairs(
    graph: KnowledgeGraph,
    pairs: Sequence[Tuple[int, int]],
    k: int,
    threads: int = 1,
    hub_cap: Optional[int] = None,
) -> List[MinedPair]:
    """Enumerate path instances for every pair; results keep the order of ``pairs``."""

    def work(pair):
        started = time.perf_counter()
        instances = enumerate_paths(graph, pair[0], pair[1], k, hub_cap=hub_cap)
        labels = {}
        metas = [(meta_path(graph, inst, labels), count) for inst, count in sorted(instances.items())]
        return MinedPair(tuple(pair), instances, time.perf_counter() - started, metas)

    if threads <= 1:
        mined = [work(pair) for pair in pairs]
    else:
        with ThreadPoolExecutor(max_workers=threads, thread_name_prefix="path-miner") as executor:
            mined = list(executor.map(work, pairs))
    logger.debug("Mined paths for %d pair(s) with k=%d", len(mined), k)
    return mined


def discover_columns(mined: Sequence[MinedPair], mode: str = ANCHORED) -> List[AnchoredPath]:
    """Feature universe over ``mined`` pairs in deterministic order."""
    if mode == METAPATH:
        found = {to_metapath_feature(meta) for m in mined for meta, _ in m.metas}
        return sorted(found, key=AnchoredPath.sort_key)
    if mode != ANCHORED:
        raise ValueError(f"unknown feature mode '{mode}'; expected one of {FEATURE_MODES}")
    policy = AnchorPolicy()
    for m in mined:
        for meta, _ in m.metas:
            policy.merge(meta)
    return policy.paths()


class ColumnIndex:
    """Maps meta paths onto a fixed column list; first matching column wins.

    Discovered columns are pairwise incompatible, so every meta path seen
    during discovery matches exactly the column it was merged into.
    """

    def __init__(self, columns: Sequence[AnchoredPath]):
        self.columns = list(columns)
        self._by_steps: Dict[Tuple[NamedStep, ...], List[int]] = {}
        for j, column in enumerate(self.columns):
            self._by_steps.setdefault(column.steps, []).append(j)

    def column_of(self, meta: MetaPath) -> Optional[int]:
        for j in self._by_steps.get(meta.steps, ()):
            if self.columns[j].matches(meta):
                return j
        return None

    def count(self, mined: MinedPair) -> Dict[int, int]:
        counts: Dict[int, int] = {}
        for meta, n in mined.metas:
            j = self.column_of(meta)
            if j is not None:
                counts[j] = counts.get(j, 0) + n
        return counts

    def instances_of(self, graph: KnowledgeGraph, mined: MinedPair, j: int) -> List[PathInstance]:
        labels = {}
        return [
            inst for inst in sorted(mined.instances)
            if self.column_of(meta_path(graph, inst, labels)) == j
        ]


@dataclass
class PathFeatures:
    columns: List[AnchoredPath]
    pairs: List[Tuple[int, int]]
    counts: List[Dict[int, int]]
    seconds: List[float]


def count_features(
    mined: Sequence[MinedPair], mode: str = ANCHORED, columns: Optional[Sequence[AnchoredPath]] = None
) -> PathFeatures:
    """Per-pair column counts; columns are discovered from ``mined`` unless given."""
    if columns is None:
        columns = discover_columns(mined, mode)
    index = ColumnIndex(columns)
    return PathFeatures(
        columns=list(columns),
        pairs=[m.pair for m in mined],
        counts=[index.count(m) for m in mined],
        seconds=[m.seconds for m in mined],
    )


def extract_path_features(
    graph: KnowledgeGraph,
    pairs: Sequence[Tuple[int, int]],
    k: int,
    threads: int = 1,
    hub_cap: Optional[int] = None,
    mode: str = ANCHORED,
) -> PathFeatures:
    """Count anchored predicate paths per pair on an already masked graph."""
    if not pairs:
        raise ValueError("at least one entity pair is required")
    mined = mine_pairs(graph, pairs, k, threads=threads, hub_cap=hub_cap)
    return count_features(mined, mode)


def verify_instance(graph: KnowledgeGraph, instance: PathInstance) -> bool:
    """True when every step of ``instance`` is an edge of ``graph``."""
    for i, step in enumerate(instance.steps):
        u, v = instance.nodes[i], instance.nodes[i + 1]
        if step.inverse:
            u, v = v, u
        if not graph.has_edge(u, step.predicate, v):
            return False
    return len(set(instance.nodes)) == len(instance.nodes)
