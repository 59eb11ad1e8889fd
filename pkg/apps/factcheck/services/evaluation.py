"""AUROC, stratified cross validation and the evaluation report."""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import rankdata
from sklearn.model_selection import StratifiedKFold

from apps.baselines.scorers import BASELINES, UndirectedProjection
from apps.knowledge.exceptions import EvaluationError
from apps.knowledge.graph import KnowledgeGraph

from .paths import FEATURE_MODES, MinedPair, mine_pairs
from .pipeline import PipelineConfig, fit_model, masked_for, score_pairs
from .sampling import CONFOUNDER_LIST, build_testcase

logger = logging.getLogger(__name__)

PREDPATH = "predpath"
METHODS = (PREDPATH,) + tuple(BASELINES)

Row = Tuple[int, int, bool]


def auroc(scores, labels) -> float:
    """Mann-Whitney AUROC; ties between classes count one half."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape:
        raise EvaluationError("scores and labels differ in length")
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise EvaluationError("AUROC needs both true and false statements")
    ranks = rankdata(scores, method="average")
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def stratified_folds(labels, folds: int, seed: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    labels = np.asarray(labels, dtype=bool)
    smallest = min(int(labels.sum()), int((~labels).sum()))
    if smallest < folds:
        raise EvaluationError(
            f"{folds} folds need at least {folds} true and {folds} false statements; the smaller class has {smallest}"
        )
    splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)
    return list(splitter.split(np.zeros(len(labels)), labels))


@dataclass
class EvalReport:
    method: str
    predicate: str
    pairs: List[Tuple[int, int]]
    labels: np.ndarray
    scores: np.ndarray
    fold_of: np.ndarray
    per_fold: List[float]
    timing: List[float]
    ratio: Optional[float] = None
    columns: List[int] = field(default_factory=list)

    @property
    def auroc(self) -> float:
        return auroc(self.scores, self.labels)

    @property
    def mean_seconds(self) -> float:
        return float(np.mean(self.timing)) if self.timing else 0.0

    def summary(self) -> Dict:
        return {
            "method": self.method,
            "predicate": self.predicate,
            "true_ratio": "" if self.ratio is None else self.ratio,
            "statements": len(self.labels),
            "true_statements": int(self.labels.sum()),
            "auroc": round(self.auroc, 6),
            "fold_auroc_mean": round(float(np.mean(self.per_fold)), 6),
            "fold_auroc_std": round(float(np.std(self.per_fold)), 6),
            "columns": int(np.mean(self.columns)) if self.columns else "",
        }


def _mine(graph: KnowledgeGraph, predicate: str, pairs, config: PipelineConfig) -> Dict[Tuple[int, int], MinedPair]:
    masked = masked_for(graph, predicate)
    unique = list(dict.fromkeys(pairs))
    mined = mine_pairs(masked, unique, config.max_path_length, threads=config.threads, hub_cap=config.hub_cap)
    return {m.pair: m for m in mined}


def cross_validate(
    graph: KnowledgeGraph,
    predicate: str,
    rows: Sequence[Row],
    config: PipelineConfig,
    mined: Optional[Dict[Tuple[int, int], MinedPair]] = None,
    ratio: Optional[float] = None,
) -> EvalReport:
    """Stratified k-fold evaluation; every fold mines, selects and trains on its train split only."""
    pairs = [(s, t) for s, t, _ in rows]
    labels = np.array([y for _, _, y in rows], dtype=bool)
    splits = stratified_folds(labels, config.folds, config.seed)
    if mined is None:
        mined = _mine(graph, predicate, pairs, config)
    row_mined = [mined[pair] for pair in pairs]

    def run_fold(split):
        train_idx, test_idx = split
        trained = fit_model([row_mined[i] for i in train_idx], labels[train_idx], predicate, config)
        return score_pairs(trained.model, [row_mined[i] for i in test_idx]), len(trained.model.columns)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads, thread_name_prefix="cv-fold") as executor:
            results = list(executor.map(run_fold, splits))
    else:
        results = [run_fold(split) for split in splits]

    scores = np.zeros(len(rows))
    fold_of = np.zeros(len(rows), dtype=int)
    per_fold, columns = [], []
    for f, ((_, test_idx), (fold_scores, width)) in enumerate(zip(splits, results)):
        scores[test_idx] = fold_scores
        fold_of[test_idx] = f
        per_fold.append(auroc(fold_scores, labels[test_idx]))
        columns.append(width)
        logger.debug("Fold %d: AUROC %.4f over %d statements", f, per_fold[-1], len(test_idx))

    return EvalReport(
        method=PREDPATH,
        predicate=predicate,
        pairs=pairs,
        labels=labels,
        scores=scores,
        fold_of=fold_of,
        per_fold=per_fold,
        timing=[row_mined[i].seconds for i in range(len(rows))],
        ratio=ratio,
        columns=columns,
    )


def evaluate_baseline(
    graph: KnowledgeGraph,
    predicate: str,
    rows: Sequence[Row],
    method: str,
    config: PipelineConfig,
    projection: Optional[UndirectedProjection] = None,
    ratio: Optional[float] = None,
) -> EvalReport:
    """Raw baseline scores on the masked graph, reported over the same folds as the main method."""
    if method not in BASELINES:
        raise EvaluationError(f"Unknown method '{method}'; expected one of {', '.join(METHODS)}")
    scorer = BASELINES[method]
    if projection is None:
        projection = UndirectedProjection(masked_for(graph, predicate))
    pairs = [(s, t) for s, t, _ in rows]
    labels = np.array([y for _, _, y in rows], dtype=bool)
    splits = stratified_folds(labels, config.folds, config.seed)

    scores, timing = np.zeros(len(rows)), []
    for i, (s, t) in enumerate(pairs):
        started = time.perf_counter()
        scores[i] = scorer(projection, s, t)
        timing.append(time.perf_counter() - started)

    fold_of = np.zeros(len(rows), dtype=int)
    per_fold = []
    for f, (_, test_idx) in enumerate(splits):
        fold_of[test_idx] = f
        per_fold.append(auroc(scores[test_idx], labels[test_idx]))
    return EvalReport(method, predicate, pairs, labels, scores, fold_of, per_fold, timing, ratio=ratio)


def _largest_total(positives: int, negatives: int, ratio: float) -> int:
    cap = min(positives / ratio, negatives / (1 - ratio), positives + negatives)
    for total in range(int(cap + 1e-9), 1, -1):
        n_pos = int(round(total * ratio))
        if 0 < n_pos <= positives and total - n_pos <= negatives:
            return total
    raise EvaluationError(f"no test case at true ratio {ratio} fits {positives} true and {negatives} false statements")


def resample_rows(rows: Sequence[Row], ratio: float, seed: int, total: Optional[int] = None) -> List[Row]:
    """Rebuild a test case at true fraction ``ratio`` from its own statements."""
    positives = [(s, t) for s, t, y in rows if y]
    negatives = [(s, t) for s, t, y in rows if not y]
    if total is None:
        total = _largest_total(len(positives), len(negatives), ratio)
    return build_testcase(positives, CONFOUNDER_LIST, ratio=ratio, confounders=negatives, total=total, seed=seed)


def evaluate(
    graph: KnowledgeGraph,
    predicate: str,
    rows: Sequence[Row],
    methods: Sequence[str],
    config: PipelineConfig,
    ratios: Optional[Sequence[float]] = None,
) -> List[EvalReport]:
    """One report per (ratio, method); paths are mined once and shared across ratios."""
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise EvaluationError(f"Unknown method(s) {', '.join(unknown)}; expected one of {', '.join(METHODS)}")
    if any(s == t for s, t, _ in rows):
        raise EvaluationError("test case contains a statement whose subject and object coincide")

    if ratios:
        bad = [r for r in ratios if not 0 < r < 1]
        if bad:
            raise EvaluationError(f"true ratios must lie in (0, 1), got {', '.join(f'{r:g}' for r in bad)}")
        totals = [
            _largest_total(sum(1 for r in rows if r[2]), sum(1 for r in rows if not r[2]), ratio) for ratio in ratios
        ]
        total = min(totals)
        cases = [(ratio, resample_rows(rows, ratio, config.seed, total)) for ratio in ratios]
    else:
        cases = [(None, list(rows))]

    mined = None
    if PREDPATH in methods:
        mined = _mine(graph, predicate, [(s, t) for s, t, _ in rows], config)
    projection = None
    if any(m != PREDPATH for m in methods):
        projection = UndirectedProjection(masked_for(graph, predicate))

    reports = []
    for ratio, case in cases:
        for method in methods:
            if method == PREDPATH:
                report = cross_validate(graph, predicate, case, config, mined=mined, ratio=ratio)
            else:
                report = evaluate_baseline(graph, predicate, case, method, config, projection, ratio=ratio)
            logger.info("%s on '%s'%s: AUROC %.4f", method, predicate,
                        "" if ratio is None else f" at ratio {ratio}", report.auroc)
            reports.append(report)
    return reports


@dataclass
class SubsetScore:
    """Cross-validated path model restricted to the ``delta_top`` most informative paths."""

    feature_mode: str
    delta_top: int
    report: EvalReport
    best: bool = False

    def summary(self) -> Dict:
        return {
            "feature_mode": self.feature_mode,
            "delta_top": self.delta_top,
            **self.report.summary(),
            "best": int(self.best),
        }


def subset_search(
    graph: KnowledgeGraph,
    predicate: str,
    rows: Sequence[Row],
    config: PipelineConfig,
    tops: Sequence[int],
    modes: Sequence[str] = FEATURE_MODES,
) -> List[SubsetScore]:
    """Cross-validate every (feature mode, top-N) pair and flag the best N per mode.

    Paths are mined once.  Among equal AUROCs the smallest N wins.
    """
    tops = sorted(set(tops))
    if not tops or tops[0] < 1:
        raise EvaluationError(f"top-N sweep values must be >= 1, got {tops}")
    unknown = [m for m in modes if m not in FEATURE_MODES]
    if unknown:
        raise EvaluationError(f"Unknown feature mode(s) {', '.join(unknown)}; expected {', '.join(FEATURE_MODES)}")
    if any(s == t for s, t, _ in rows):
        raise EvaluationError("test case contains a statement whose subject and object coincide")

    mined = _mine(graph, predicate, [(s, t) for s, t, _ in rows], config)
    results = []
    for mode in dict.fromkeys(modes):
        scored = []
        for top in tops:
            sub_config = replace(config, feature_mode=mode, delta_top=top, delta=None)
            report = cross_validate(graph, predicate, rows, sub_config, mined=mined)
            logger.info("%s paths, top %d: AUROC %.4f", mode, top, report.auroc)
            scored.append(SubsetScore(mode, top, report))
        max(scored, key=lambda s: (s.report.auroc, -s.delta_top)).best = True
        results.extend(scored)
    return results


def subset_frame(scores: Sequence[SubsetScore]) -> pd.DataFrame:
    return pd.DataFrame([s.summary() for s in scores])


# -- report files ----------------------------------------------------------------


def _write(frame: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def report_frame(reports: Sequence[EvalReport]) -> pd.DataFrame:
    return pd.DataFrame([r.summary() for r in reports])


def timing_frame(reports: Sequence[EvalReport]) -> pd.DataFrame:
    return pd.DataFrame([
        {
            "method": r.method,
            "true_ratio": "" if r.ratio is None else r.ratio,
            "statements": len(r.timing),
            "mean_seconds": r.mean_seconds,
            "total_seconds": float(np.sum(r.timing)),
        }
        for r in reports
    ])


def scores_frame(reports: Sequence[EvalReport], entity_names: Sequence[str]) -> pd.DataFrame:
    rows = []
    for r in reports:
        for (s, t), label, fold, score in zip(r.pairs, r.labels, r.fold_of, r.scores):
            rows.append({
                "method": r.method,
                "true_ratio": "" if r.ratio is None else r.ratio,
                "subject": entity_names[s],
                "object": entity_names[t],
                "label": int(label),
                "fold": int(fold),
                "score": float(score),
            })
    return pd.DataFrame(rows)


def write_report(reports: Sequence[EvalReport], path) -> Path:
    return _write(report_frame(reports), path)


def write_timing(reports: Sequence[EvalReport], path) -> Path:
    return _write(timing_frame(reports), path)


def write_scores(reports: Sequence[EvalReport], entity_names: Sequence[str], path) -> Path:
    return _write(scores_frame(reports, entity_names), path)


def write_subsets(scores: Sequence[SubsetScore], path) -> Path:
    return _write(subset_frame(scores), path)
