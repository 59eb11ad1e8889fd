"""Edge-list and label-file loading.

Edge file: ``subject<TAB>predicate<TAB>object`` per line.
Label file: ``entity<TAB>label1,label2,...`` per line.
Lines starting with ``#`` and blank lines are skipped.  Entities are merged on
their exact external name, and repeated triples accumulate multiplicity.
"""

import logging
from pathlib import Path
from typing import Iterable, Iterator, Optional, Tuple, Union

import numpy as np

from .exceptions import GraphFormatError
from .graph import KnowledgeGraph
from .snapshot import SNAPSHOT_SUFFIX, read_snapshot

logger = logging.getLogger(__name__)

Source = Union[str, Path, Iterable[str], None]


def _iter_lines(source: Source) -> Tuple[Iterator, Optional[str]]:
    if source is None:
        return iter(()), None
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            handle = path.open("rb")
        except OSError as exc:
            raise GraphFormatError(f"cannot read file: {exc.strerror}", path=str(path)) from exc

        def lines():
            with handle:
                yield from handle

        return lines(), str(path)
    return iter(source), None


def data_lines(source: Source) -> Iterator[Tuple[int, str, Optional[str]]]:
    """Yield (line_number, line, path) for every non-blank, non-comment line.

    Files are decoded line by line so an invalid byte is reported with the
    line it sits on.
    """
    lines, path = _iter_lines(source)
    for line_number, raw in enumerate(lines, start=1):
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise GraphFormatError(
                    f"invalid UTF-8 at byte {exc.start}", line_number=line_number, path=path
                ) from exc
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield line_number, line, path


def parse_triples(source: Source) -> Iterator[Tuple[str, str, str]]:
    for line_number, line, path in data_lines(source):
        fields = [f.strip() for f in line.split("\t")]
        if len(fields) != 3:
            raise GraphFormatError(
                f"expected 3 tab-separated fields (subject, predicate, object), got {len(fields)}",
                line_number=line_number,
                path=path,
            )
        if not all(fields):
            raise GraphFormatError("empty subject, predicate or object", line_number=line_number, path=path)
        yield fields[0], fields[1], fields[2]


def parse_labels(source: Source) -> Iterator[Tuple[str, Tuple[str, ...]]]:
    for line_number, line, path in data_lines(source):
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0].strip():
            raise GraphFormatError(
                "expected 'entity<TAB>label1,label2,...'", line_number=line_number, path=path
            )
        labels = tuple(label.strip() for label in fields[1].split(",") if label.strip())
        yield fields[0].strip(), labels


class GraphBuilder:
    """Single-writer accumulator that interns names and freezes into a KnowledgeGraph."""

    def __init__(self):
        self._entities = {}
        self._predicates = {}
        self._labels = {}
        self._entity_labels = {}
        self._src = []
        self._pred = []
        self._dst = []

    @staticmethod
    def _intern(table, name):
        idx = table.get(name)
        if idx is None:
            idx = table[name] = len(table)
        return idx

    def entity(self, name: str) -> int:
        return self._intern(self._entities, name)

    def add_edge(self, subject: str, predicate: str, obj: str):
        self._src.append(self.entity(subject))
        self._pred.append(self._intern(self._predicates, predicate))
        self._dst.append(self.entity(obj))

    def add_labels(self, entity: str, labels):
        v = self.entity(entity)
        ids = self._entity_labels.setdefault(v, set())
        ids.update(self._intern(self._labels, label) for label in labels)

    def build(self) -> KnowledgeGraph:
        num_entities = len(self._entities)
        num_predicates = max(len(self._predicates), 1)
        src = np.asarray(self._src, dtype=np.int64)
        pred = np.asarray(self._pred, dtype=np.int64)
        dst = np.asarray(self._dst, dtype=np.int64)

        keys = (src * num_predicates + pred) * max(num_entities, 1) + dst
        unique, counts = np.unique(keys, return_counts=True)
        dst_u = unique % max(num_entities, 1)
        rest = unique // max(num_entities, 1)
        pred_u = rest % num_predicates
        src_u = rest // num_predicates

        label_sets = [tuple(sorted(self._entity_labels.get(v, ()))) for v in range(num_entities)]
        graph = KnowledgeGraph(
            entity_names=list(self._entities),
            predicate_names=list(self._predicates),
            label_names=list(self._labels),
            entity_labels=label_sets,
            src=src_u,
            pred=pred_u,
            dst=dst_u,
            multiplicity=counts,
        )
        logger.info(
            "Built graph: %d entities, %d triples (%d distinct), %d predicates",
            num_entities, len(src), len(unique), len(self._predicates),
        )
        return graph


def load_graph(edge_source: Source, label_source: Source = None) -> KnowledgeGraph:
    """Build a graph from a triple stream and an entity-label stream.

    Either source may be a path, an iterable of text lines, or ``None``.
    Entities that only appear in the label stream are still created.
    """
    builder = GraphBuilder()
    for subject, predicate, obj in parse_triples(edge_source):
        builder.add_edge(subject, predicate, obj)
    for entity, labels in parse_labels(label_source):
        builder.add_labels(entity, labels)
    return builder.build()


def open_graph(path, labels=None) -> KnowledgeGraph:
    """Load a binary snapshot (``.npz``) or an edge file plus optional label file."""
    path = Path(path)
    if path.suffix == SNAPSHOT_SUFFIX:
        return read_snapshot(path)
    return load_graph(path, labels)
