"""
Pipeline configuration and the train / score / explain workflows.

Settings resolve as command-line flags > JSON config file > settings.FACTCHECK.
"""

import json
import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings

from apps.knowledge.exceptions import ConfigurationError, SamplingError, StatementError
from apps.knowledge.graph import KnowledgeGraph

from .features import FeatureMatrix, build_matrix, importance_vector, select_features, select_top
from .interpret import Explanation, RankedPath, collect_evidence, prune_to_definition, rank_paths
from .paths import FEATURE_MODES, ColumnIndex, MinedPair, count_features, mine_pairs
from .regression import FactCheckModel, train
from .sampling import LabeledStatement, TrainingSet, build_training_set

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    max_path_length: int = 3
    delta_top: int = 100
    delta: Optional[float] = None
    theta: float = 15.0
    folds: int = 10
    true_ratio: float = 0.2
    seed: int = 0
    l2: float = 1.0
    max_iter: int = 10000
    gradient_tol: float = 1e-6
    hub_cap: Optional[int] = None
    threads: int = 1
    feature_mode: str = "anchored"
    negatives: Optional[int] = None

    def __post_init__(self):
        if self.max_path_length < 1:
            raise ConfigurationError(f"max_path_length must be >= 1, got {self.max_path_length}")
        if self.delta_top < 1:
            raise ConfigurationError(f"delta_top must be >= 1, got {self.delta_top}")
        if not self.theta > 0:
            raise ConfigurationError(f"theta must be positive, got {self.theta}")
        if self.folds < 2:
            raise ConfigurationError(f"folds must be >= 2, got {self.folds}")
        if not 0 < self.true_ratio < 1:
            raise ConfigurationError(f"true_ratio must be in (0, 1), got {self.true_ratio}")
        if self.l2 < 0:
            raise ConfigurationError(f"l2 must be >= 0, got {self.l2}")
        if self.threads < 1:
            raise ConfigurationError(f"threads must be >= 1, got {self.threads}")
        if self.hub_cap is not None and self.hub_cap < 1:
            raise ConfigurationError(f"hub_cap must be >= 1, got {self.hub_cap}")
        if self.negatives is not None and self.negatives < 1:
            raise ConfigurationError(f"negatives must be >= 1, got {self.negatives}")
        if self.feature_mode not in FEATURE_MODES:
            raise ConfigurationError(f"feature_mode must be one of {', '.join(FEATURE_MODES)}")

    @classmethod
    def keys(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_settings(cls) -> "PipelineConfig":
        defaults = getattr(settings, "FACTCHECK", {})
        return cls(**{k.lower(): v for k, v in defaults.items() if k.lower() in cls.keys()})

    def as_dict(self) -> Dict:
        return asdict(self)

    def model_settings(self) -> Dict:
        """Settings that shape a trained model; thread count and folds are excluded."""
        data = self.as_dict()
        for key in ("threads", "folds", "true_ratio"):
            data.pop(key)
        return data


def load_config_file(path) -> Dict:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Config file not found: {path}")
    try:
        parsed = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"Invalid JSON in {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ConfigurationError(f"Config file {path} is not valid UTF-8") from exc
    if not isinstance(parsed, dict):
        raise ConfigurationError(f"Config file {path} must hold a JSON object")
    unknown = sorted(set(k.lower() for k in parsed) - set(PipelineConfig.keys()))
    if unknown:
        raise ConfigurationError(f"Unknown setting(s) in {path}: {', '.join(unknown)}")
    return {k.lower(): v for k, v in parsed.items()}


def resolve_config(overrides: Optional[Dict] = None, config_path=None) -> PipelineConfig:
    """Merge defaults, an optional config file and non-None flag values."""
    merged = PipelineConfig.from_settings().as_dict()
    if config_path:
        merged.update(load_config_file(config_path))
    for key, value in (overrides or {}).items():
        if value is not None and key in merged:
            merged[key] = value
    try:
        return PipelineConfig(**merged)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc


# -- graph helpers ---------------------------------------------------------------


def masked_for(graph: KnowledgeGraph, predicate: str) -> KnowledgeGraph:
    """G' = G minus every edge of ``predicate``; unseen predicates need no mask."""
    if graph.has_predicate(predicate):
        return graph.masked_view(predicate)
    return graph


def infer_anchors(graph: KnowledgeGraph, pairs: Sequence[Tuple[int, int]]):
    """Union of subject labels and union of object labels over ``pairs``."""
    source, target = set(), set()
    for s, t in pairs:
        source |= graph.entity_label_names(s)
        target |= graph.entity_label_names(t)
    return frozenset(source), frozenset(target)


def resolve_pairs(graph: KnowledgeGraph, named_pairs) -> List[Tuple[int, int]]:
    return [(graph.entity_id(s), graph.entity_id(t)) for s, t in named_pairs]


# -- training ----------------------------------------------------------------------


@dataclass
class TrainedModel:
    model: FactCheckModel
    matrix: FeatureMatrix
    ranked: List[RankedPath]
    definition: List[RankedPath]
    training: Optional[TrainingSet] = None


def fit_model(
    mined: Sequence[MinedPair], labels: Sequence[bool], predicate: str, config: PipelineConfig
) -> TrainedModel:
    """Select, rank, prune and train using only the rows in ``mined``."""
    labels = list(labels)
    if len(labels) != len(mined):
        raise ValueError("labels are not aligned with the mined pairs")
    positives = [m.pair for m, y in zip(mined, labels) if y]
    negatives = [m.pair for m, y in zip(mined, labels) if not y]

    features = count_features(mined, config.feature_mode)
    matrix = build_matrix(features, positives, negatives)
    w = importance_vector(matrix)
    if config.delta is not None:
        selected = select_features(matrix, w, config.delta)
    else:
        selected = select_top(matrix, w, config.delta_top)

    ranked = rank_paths(selected.importance, selected.columns)
    definition = prune_to_definition(ranked, selected, config.theta)
    model = train(
        selected,
        predicate,
        l2=config.l2,
        max_iter=config.max_iter,
        tol=config.gradient_tol,
        definition=[r.column for r in definition],
        config=config.model_settings(),
        feature_mode=config.feature_mode,
    )
    return TrainedModel(model=model, matrix=selected, ranked=ranked, definition=definition)


def train_predicate(
    graph: KnowledgeGraph,
    predicate: str,
    config: PipelineConfig,
    positives: Optional[Sequence[Tuple[str, str]]] = None,
    examples: Optional[Sequence[LabeledStatement]] = None,
) -> TrainedModel:
    """Train a model for ``predicate``.

    T+ comes from the graph unless human-provided ``positives`` are given;
    ``examples`` supplies both T+ and T- from a labeled statement file.
    """
    if examples is not None:
        rows = [r for r in examples if r.predicate == predicate and r.label is not None]
        pos = resolve_pairs(graph, [(r.subject, r.object) for r in rows if r.label])
        neg = resolve_pairs(graph, [(r.subject, r.object) for r in rows if not r.label])
        if not pos or not neg:
            raise SamplingError(f"the example file needs labeled true and false statements for '{predicate}'")
        training = TrainingSet(list(dict.fromkeys(pos)), list(dict.fromkeys(neg)), config.seed)
    else:
        given = resolve_pairs(graph, positives) if positives is not None else None
        if given is not None:
            anchors = infer_anchors(graph, given)
        elif graph.has_predicate(predicate):
            anchors = infer_anchors(graph, graph.predicate_edges(graph.predicate_id(predicate)))
        else:
            anchors = ((), ())
        training = build_training_set(
            graph, predicate, anchors[0], anchors[1],
            negatives=config.negatives, seed=config.seed, positives=given,
        )

    for s, t in training.pairs:
        if s == t:
            raise StatementError(f"training pair ({graph.entity_names[s]}, {graph.entity_names[t]}) has equal endpoints")

    logger.info(
        "Training '%s' on %d positive and %d negative pairs (k=%d)",
        predicate, len(training.positives), len(training.negatives), config.max_path_length,
    )
    masked = masked_for(graph, predicate)
    mined = mine_pairs(masked, training.pairs, config.max_path_length, threads=config.threads, hub_cap=config.hub_cap)
    trained = fit_model(mined, training.labels, predicate, config)
    trained.training = training
    return trained


# -- scoring -----------------------------------------------------------------------


def statement_counts(model: FactCheckModel, graph: KnowledgeGraph, s: int, t: int, k: Optional[int] = None):
    """Mine (s, t) on the masked graph and count the model's columns."""
    if k is None:
        k = int(model.config.get("max_path_length", 3))
    masked = masked_for(graph, model.predicate)
    mined = mine_pairs(masked, [(s, t)], k, hub_cap=model.config.get("hub_cap"))[0]
    return masked, mined, ColumnIndex(model.columns)


def score_statement(model: FactCheckModel, graph: KnowledgeGraph, stmt, k: Optional[int] = None) -> float:
    """Probability that ``stmt`` holds; paths unknown to the model contribute nothing."""
    _, mined, index = statement_counts(model, graph, stmt.subject, stmt.object, k)
    return float(model.predict_proba(model.vector(index.count(mined)))[0])


def explain_statement(model: FactCheckModel, graph: KnowledgeGraph, subject: str, obj: str) -> Explanation:
    stmt = graph.statement(subject, model.predicate, obj)
    masked, mined, index = statement_counts(model, graph, stmt.subject, stmt.object)
    probability = float(model.predict_proba(model.vector(index.count(mined)))[0])
    instances = {model.columns[j]: index.instances_of(masked, mined, j) for j in model.definition}
    definition = [(model.columns[j], float(model.importance[j])) for j in model.definition]
    return Explanation(
        subject=subject,
        predicate=model.predicate,
        object=obj,
        probability=probability,
        evidence=collect_evidence(masked, definition, instances),
        graph=masked,
    )


def score_pairs(model: FactCheckModel, mined: Sequence[MinedPair]) -> np.ndarray:
    index = ColumnIndex(model.columns)
    if not mined:
        return np.zeros(0)
    X = np.vstack([model.vector(index.count(m)) for m in mined])
    return model.predict_proba(X)
