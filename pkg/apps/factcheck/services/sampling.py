"""Training pairs (T+ / T-) and labeled test cases for a predicate.

Type compatibility means sharing at least one ontology label with the anchor
set; an empty anchor set disables the filter (untyped mode).
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from apps.knowledge.exceptions import GraphFormatError, SamplingError, UnknownPredicateError
from apps.knowledge.graph import KnowledgeGraph
from apps.knowledge.loaders import data_lines

logger = logging.getLogger(__name__)

RANDOM_MATCH = "random_match"
CONFOUNDER_LIST = "confounder_list"
NEGATIVE_STRATEGIES = (RANDOM_MATCH, CONFOUNDER_LIST)

EXHAUSTIVE_POOL_LIMIT = 250_000

Pair = Tuple[int, int]

UNSEEN_PREDICATE_HINT = "Supply positive pairs manually (--positives FILE) to train an unseen predicate"


@dataclass(frozen=True)
class TrainingSet:
    positives: List[Pair]
    negatives: List[Pair]
    seed: int

    def __post_init__(self):
        overlap = set(self.positives) & set(self.negatives)
        if overlap:
            raise SamplingError(f"{len(overlap)} pair(s) are both positive and negative")

    @property
    def pairs(self) -> List[Pair]:
        return list(self.positives) + list(self.negatives)

    @property
    def labels(self) -> List[bool]:
        return [True] * len(self.positives) + [False] * len(self.negatives)


@dataclass(frozen=True)
class LabeledStatement:
    subject: str
    predicate: str
    object: str
    label: Optional[bool] = None


def _compatible(graph: KnowledgeGraph, v: int, anchor) -> bool:
    return not anchor or bool(graph.entity_label_names(v) & set(anchor))


def generate_positives(graph: KnowledgeGraph, p: str, anchor_src=(), anchor_dst=()) -> List[Pair]:
    """Every ``p`` edge whose endpoints are type-compatible with the anchors."""
    if not graph.has_predicate(p):
        raise UnknownPredicateError(p, hint=UNSEEN_PREDICATE_HINT)
    edges = graph.predicate_edges(graph.predicate_id(p))
    if not edges:
        raise SamplingError(f"Predicate '{p}' has no edges in this graph. {UNSEEN_PREDICATE_HINT}")
    return [
        (u, v) for u, v in edges
        if _compatible(graph, u, anchor_src) and _compatible(graph, v, anchor_dst)
    ]


def _candidates(graph: KnowledgeGraph, anchor) -> List[int]:
    if anchor:
        return graph.entities_with_any_label(anchor)
    return list(range(graph.num_entities))


def generate_negatives(
    graph: KnowledgeGraph,
    p: str,
    anchor_src=(),
    anchor_dst=(),
    n: int = 1,
    seed: int = 0,
    exclude: Iterable[Pair] = (),
) -> List[Pair]:
    """``n`` seeded, type-compatible pairs with no ``p`` edge between them.

    Sampling is without replacement.  Small candidate pools are enumerated
    exhaustively; when the pool holds no more than ``n`` pairs the whole pool
    is returned.  ``p`` may be absent from the graph (unseen predicate).
    """
    if n < 1:
        raise SamplingError(f"negative count must be >= 1, got {n}")
    pid = graph.predicate_id(p) if graph.has_predicate(p) else None
    excluded = set(exclude)
    subjects = _candidates(graph, anchor_src)
    objects = _candidates(graph, anchor_dst)

    def valid(u, v):
        if u == v or (u, v) in excluded:
            return False
        return pid is None or not graph.has_edge(u, pid, v)

    rng = np.random.default_rng(seed)
    if len(subjects) * len(objects) <= max(EXHAUSTIVE_POOL_LIMIT, 4 * n):
        pool = [(u, v) for u in subjects for v in objects if valid(u, v)]
        if not pool:
            raise SamplingError(f"No type-compatible negative pairs exist for '{p}'")
        if len(pool) <= n:
            if len(pool) < n:
                logger.warning("Requested %d negatives for '%s' but the pool holds only %d; using all", n, p, len(pool))
            return pool
        picked = rng.choice(len(pool), size=n, replace=False)
        return [pool[i] for i in picked.tolist()]

    chosen, seen = [], set()
    attempts = 0
    while len(chosen) < n:
        attempts += 1
        if attempts > 50 * n:
            raise SamplingError(f"Could not draw {n} negatives for '{p}' after {attempts - 1} attempts")
        pair = (subjects[int(rng.integers(len(subjects)))], objects[int(rng.integers(len(objects)))])
        if pair in seen or not valid(*pair):
            continue
        seen.add(pair)
        chosen.append(pair)
    return chosen


def build_training_set(
    graph: KnowledgeGraph,
    p: str,
    anchor_src=(),
    anchor_dst=(),
    negatives: Optional[int] = None,
    seed: int = 0,
    positives: Optional[Sequence[Pair]] = None,
) -> TrainingSet:
    """T+ from the graph (or caller-supplied pairs) and seeded T- of the requested size."""
    if positives is None:
        positives = generate_positives(graph, p, anchor_src, anchor_dst)
    positives = list(dict.fromkeys(positives))
    if not positives:
        raise SamplingError(f"No type-compatible positive pairs for '{p}'")
    count = negatives if negatives is not None else 4 * len(positives)
    neg = generate_negatives(graph, p, anchor_src, anchor_dst, count, seed, exclude=positives)
    return TrainingSet(positives, neg, seed)


def build_testcase(
    positives: Sequence[Tuple[Hashable, Hashable]],
    negative_strategy: str = RANDOM_MATCH,
    ratio: Optional[float] = 0.2,
    confounders: Optional[Sequence[Tuple[Hashable, Hashable]]] = None,
    total: Optional[int] = None,
    seed: int = 0,
) -> List[Tuple[Hashable, Hashable, bool]]:
    """Labeled (subject, object, label) rows at the requested true fraction.

    ``random_match`` pairs true subjects with other true objects;
    ``confounder_list`` draws from caller-supplied hard negatives.  With
    ``ratio=None`` every confounder is used.  With ``total`` the positives
    are subsampled to ``round(total * ratio)`` rows.
    """
    if negative_strategy not in NEGATIVE_STRATEGIES:
        raise SamplingError(f"Unknown negative strategy '{negative_strategy}'")
    if ratio is not None and not 0 < ratio < 1:
        raise SamplingError(f"true ratio must be in (0, 1), got {ratio}")
    rng = np.random.default_rng(seed)
    positives = list(dict.fromkeys(positives))
    true_set = set(positives)

    if total is not None:
        if ratio is None:
            raise SamplingError("a fixed test-case size requires a true ratio")
        n_pos = int(round(total * ratio))
        if not 0 < n_pos <= len(positives):
            raise SamplingError(f"{n_pos} true statements needed but {len(positives)} available")
        keep = sorted(rng.choice(len(positives), size=n_pos, replace=False).tolist())
        positives = [positives[i] for i in keep]
        n_neg = total - n_pos
    elif ratio is None:
        n_neg = None
    else:
        n_neg = int(round(len(positives) * (1 - ratio) / ratio))

    if negative_strategy == RANDOM_MATCH:
        if n_neg is None:
            raise SamplingError("random_match needs a true ratio")
        subjects = list(dict.fromkeys(s for s, _ in positives))
        objects = list(dict.fromkeys(o for _, o in positives))
        candidates = [(s, o) for s in subjects for o in objects if (s, o) not in true_set]
    else:
        if confounders is None:
            raise SamplingError("confounder_list needs a confounder list")
        candidates = [c for c in dict.fromkeys(confounders) if c not in true_set]

    if n_neg is None:
        chosen = candidates
    elif len(candidates) < n_neg:
        raise SamplingError(
            f"{n_neg} false statements needed for ratio {ratio} but only {len(candidates)} candidates exist"
        )
    elif len(candidates) == n_neg:
        chosen = candidates
    else:
        if negative_strategy == CONFOUNDER_LIST:
            logger.warning("Subsampling %d of %d confounders", n_neg, len(candidates))
        keep = sorted(rng.choice(len(candidates), size=n_neg, replace=False).tolist())
        chosen = [candidates[i] for i in keep]

    return [(s, o, True) for s, o in positives] + [(s, o, False) for s, o in chosen]


# -- statement files -------------------------------------------------------------


def read_statements(path) -> List[LabeledStatement]:
    """``subject<TAB>predicate<TAB>object[<TAB>{0|1}]`` per line."""
    rows = []
    for line_number, line, source in data_lines(Path(path)):
        fields = [f.strip() for f in line.split("\t")]
        if len(fields) not in (3, 4) or not all(fields[:3]):
            raise GraphFormatError(
                "expected 'subject<TAB>predicate<TAB>object<TAB>{0|1}'", line_number=line_number, path=source
            )
        label = None
        if len(fields) == 4:
            if fields[3] not in ("0", "1"):
                raise GraphFormatError(f"label must be 0 or 1, got '{fields[3]}'", line_number=line_number, path=source)
            label = fields[3] == "1"
        rows.append(LabeledStatement(fields[0], fields[1], fields[2], label))
    return rows


def write_statements(rows: Iterable[LabeledStatement], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for row in rows:
            label = "" if row.label is None else f"\t{int(row.label)}"
            handle.write(f"{row.subject}\t{row.predicate}\t{row.object}{label}\n")
    return path


def read_pairs(path) -> List[Tuple[str, str]]:
    """Human-provided positive pairs, ``subject<TAB>object`` per line."""
    pairs = []
    for line_number, line, source in data_lines(Path(path)):
        fields = [f.strip() for f in line.split("\t")]
        if len(fields) != 2 or not all(fields):
            raise GraphFormatError("expected 'subject<TAB>object'", line_number=line_number, path=source)
        pairs.append((fields[0], fields[1]))
    return pairs
