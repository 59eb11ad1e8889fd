"""Versioned binary snapshot of a loaded graph (numpy ``.npz`` archive, no pickles)."""

import logging
from pathlib import Path

import numpy as np

from .exceptions import SnapshotFormatError
from .graph import KnowledgeGraph

logger = logging.getLogger(__name__)

SNAPSHOT_FORMAT = "factcheck-graph"
SNAPSHOT_VERSION = 1
SNAPSHOT_SUFFIX = ".npz"


def write_snapshot(graph: KnowledgeGraph, path) -> Path:
    path = Path(path)
    if path.suffix != SNAPSHOT_SUFFIX:
        path = path.with_name(path.name + SNAPSHOT_SUFFIX)
    src, pred, dst, mult = graph.edge_arrays()
    label_sets = [sorted(graph.entity_labels(v)) for v in range(graph.num_entities)]
    label_indptr = np.zeros(len(label_sets) + 1, dtype=np.int64)
    np.cumsum([len(s) for s in label_sets], out=label_indptr[1:])
    label_ids = np.fromiter((i for s in label_sets for i in s), dtype=np.int64)

    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as handle:
        np.savez(
            handle,
            format=np.array([SNAPSHOT_FORMAT]),
            version=np.array([SNAPSHOT_VERSION], dtype=np.int64),
            entity_names=np.array(graph.entity_names, dtype=np.str_),
            predicate_names=np.array(graph.predicate_names, dtype=np.str_),
            label_names=np.array(graph.label_names, dtype=np.str_),
            label_indptr=label_indptr,
            label_ids=label_ids,
            src=src,
            pred=pred,
            dst=dst,
            multiplicity=mult,
        )
    logger.info("Wrote snapshot %s", path)
    return path


def read_snapshot(path) -> KnowledgeGraph:
    path = Path(path)
    try:
        archive = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise SnapshotFormatError(f"{path}: not a readable snapshot ({exc})") from exc

    with archive:
        try:
            fmt = str(archive["format"][0])
            version = int(archive["version"][0])
        except KeyError as exc:
            raise SnapshotFormatError(f"{path}: missing snapshot header") from exc
        if fmt != SNAPSHOT_FORMAT:
            raise SnapshotFormatError(f"{path}: unexpected format '{fmt}'")
        if version != SNAPSHOT_VERSION:
            raise SnapshotFormatError(
                f"{path}: snapshot version {version} is not supported (expected {SNAPSHOT_VERSION})"
            )

        entity_names = archive["entity_names"].tolist()
        indptr = archive["label_indptr"]
        label_ids = archive["label_ids"]
        entity_labels = [
            tuple(label_ids[indptr[v]:indptr[v + 1]].tolist()) for v in range(len(entity_names))
        ]
        return KnowledgeGraph(
            entity_names=entity_names,
            predicate_names=archive["predicate_names"].tolist(),
            label_names=archive["label_names"].tolist(),
            entity_labels=entity_labels,
            src=archive["src"],
            pred=archive["pred"],
            dst=archive["dst"],
            multiplicity=archive["multiplicity"],
        )
