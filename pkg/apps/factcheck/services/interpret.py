"""Predicate definitions: ranked discriminative paths, pruning and evidence reports."""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from apps.knowledge.graph import KnowledgeGraph

from .features import FeatureMatrix
from .paths import AnchoredPath, PathInstance, verify_instance


@dataclass(frozen=True)
class RankedPath:
    column: int
    path: AnchoredPath
    importance: float


def rank_paths(w, columns: Sequence[AnchoredPath]) -> List[RankedPath]:
    """Descending importance; equal importances keep column order."""
    w = np.asarray(w, dtype=float)
    if len(w) != len(columns):
        raise ValueError("importance vector is not aligned with the columns")
    order = np.argsort(-w, kind="stable")
    return [RankedPath(int(j), columns[j], float(w[j])) for j in order]


def prune_to_definition(ranked: Sequence[RankedPath], matrix: FeatureMatrix, theta: float) -> List[RankedPath]:
    """Drop paths whose total count over negative rows reaches ``theta``."""
    if not theta > 0:
        raise ValueError(f"pruning threshold must be positive, got {theta}")
    sums = matrix.negative_sums()
    return [r for r in ranked if sums[r.column] < theta]


def _instance_text(graph: KnowledgeGraph, instance: PathInstance) -> str:
    names = graph.entity_names
    parts = [names[instance.nodes[0]]]
    for step, node in zip(instance.steps, instance.nodes[1:]):
        label = graph.predicate_names[step.predicate]
        arrow = f"<-{label}-" if step.inverse else f"-{label}->"
        parts.append(f"{arrow} {names[node]}")
    return " ".join(parts)


@dataclass
class EvidencePath:
    path: AnchoredPath
    importance: float
    instances: List[PathInstance] = field(default_factory=list)


@dataclass
class Explanation:
    subject: str
    predicate: str
    object: str
    probability: float
    evidence: List[EvidencePath]
    graph: KnowledgeGraph = field(repr=False)

    @property
    def verdict(self) -> bool:
        return self.probability > 0.5

    def as_dict(self) -> Dict:
        return {
            "statement": [self.subject, self.predicate, self.object],
            "probability": self.probability,
            "verdict": self.verdict,
            "definition": [
                {
                    "path": e.path.text,
                    "importance": e.importance,
                    "evidence": [
                        [self.graph.entity_names[v] for v in inst.nodes] for inst in e.instances
                    ],
                }
                for e in self.evidence
            ],
        }

    def to_text(self) -> str:
        verdict = "TRUE" if self.verdict else "FALSE"
        lines = [
            f"({self.subject}, {self.predicate}, {self.object})",
            f"verdict: {verdict} (p={self.probability:.4f})",
            f"definition ({len(self.evidence)} paths):",
        ]
        for rank, e in enumerate(self.evidence, start=1):
            lines.append(f"  {rank}. {e.path.text}  importance={e.importance:.4f}")
            if not e.instances:
                lines.append("       (no evidence)")
            for inst in e.instances:
                lines.append(f"       {_instance_text(self.graph, inst)}")
        return "\n".join(lines)


def collect_evidence(
    graph: KnowledgeGraph,
    definition: Sequence[Tuple[AnchoredPath, float]],
    instances_by_path: Dict[AnchoredPath, List[PathInstance]],
) -> List[EvidencePath]:
    """Evidence per definition path; every instance is re-checked against ``graph``."""
    evidence = []
    for path, importance in definition:
        found = instances_by_path.get(path, [])
        bad = [inst for inst in found if not verify_instance(graph, inst)]
        if bad:
            raise RuntimeError(f"evidence for {path.text} is not a path of the graph")
        evidence.append(EvidencePath(path, importance if math.isfinite(importance) else 0.0, list(found)))
    return evidence
