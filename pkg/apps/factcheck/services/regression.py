"""L2-regularized logistic regression over path counts, and the model file.

Features are standardized with the training mean and standard deviation
(zero deviation maps to 1) while fitting, and the map is folded back into
raw-count weights and bias afterwards.  The bias is not regularized.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from apps.knowledge.exceptions import ConvergenceError, ModelFormatError

from .features import FeatureMatrix
from .paths import ANCHORED, FEATURE_MODES, METAPATH, AnchoredPath

logger = logging.getLogger(__name__)

MODEL_FORMAT = "factcheck-model"
MODEL_VERSION = 1


def logistic_loss(params: np.ndarray, Z: np.ndarray, y: np.ndarray, l2: float):
    """Regularized negative log-likelihood and its gradient; ``params[-1]`` is the bias."""
    beta, bias = params[:-1], params[-1]
    z = Z @ beta + bias
    target = y.astype(float)
    loss = float(np.sum(np.logaddexp(0.0, z) - target * z) + 0.5 * l2 * beta @ beta)
    residual = expit(z) - target
    grad = np.empty_like(params)
    grad[:-1] = Z.T @ residual + l2 * beta
    grad[-1] = residual.sum()
    return loss, grad


@dataclass
class FitResult:
    """Optimum in standardized space plus the affine map it was fitted under."""

    coef: np.ndarray
    intercept: float
    mean: np.ndarray
    scale: np.ndarray
    iterations: int
    gradient_norm: float
    history: List[float] = field(default_factory=list)

    @property
    def weights(self) -> np.ndarray:
        """Per-column weights on raw path counts."""
        return self.coef / self.scale

    @property
    def bias(self) -> float:
        """Intercept on raw path counts, i.e. the score of an all-zero vector."""
        return float(self.intercept - np.sum(self.coef * self.mean / self.scale))


def standardize(X: np.ndarray):
    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    return (X - mean) / scale, mean, scale


def _newton_step(params: np.ndarray, Z: np.ndarray, y: np.ndarray, l2: float):
    """Backtracked Newton update; returns None when no step lowers the loss."""
    loss, grad = logistic_loss(params, Z, y, l2)
    p = expit(Z @ params[:-1] + params[-1])
    design = np.hstack([Z, np.ones((Z.shape[0], 1))])
    hessian = design.T @ (design * (p * (1 - p))[:, None])
    hessian[:-1, :-1] += l2 * np.eye(Z.shape[1])
    direction = np.linalg.lstsq(hessian, grad, rcond=None)[0]
    step = 1.0
    for _ in range(30):
        candidate = params - step * direction
        if logistic_loss(candidate, Z, y, l2)[0] <= loss:
            return candidate
        step /= 2
    return None


def fit_logistic(X, y, l2: float = 1.0, max_iter: int = 10000, tol: float = 1e-6) -> FitResult:
    """Full-batch L-BFGS fit from the zero vector; deterministic for fixed inputs.

    L-BFGS-B stops on the largest gradient component, so the optimum is
    finished with Newton steps until the gradient's 2-norm is within ``tol``.
    Both phases share the ``max_iter`` budget.
    """
    y = np.asarray(y, dtype=bool)
    if X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError("cannot fit a model on an empty matrix")
    if y.all() or not y.any():
        raise ValueError("training labels must contain both classes")

    Z, mean, scale = standardize(X)
    x0 = np.zeros(Z.shape[1] + 1)
    history = [logistic_loss(x0, Z, y, l2)[0]]

    def record(params):
        history.append(logistic_loss(params, Z, y, l2)[0])

    result = minimize(
        logistic_loss,
        x0,
        args=(Z, y, l2),
        jac=True,
        method="L-BFGS-B",
        callback=record,
        options={"maxiter": max_iter, "gtol": tol, "ftol": 1e-15},
    )
    params, iterations = result.x, int(result.nit)
    gradient_norm = float(np.linalg.norm(logistic_loss(params, Z, y, l2)[1]))
    while gradient_norm > tol and iterations < max_iter:
        polished = _newton_step(params, Z, y, l2)
        if polished is None:
            break
        params, iterations = polished, iterations + 1
        record(params)
        gradient_norm = float(np.linalg.norm(logistic_loss(params, Z, y, l2)[1]))
    if gradient_norm > tol:
        raise ConvergenceError(
            f"logistic regression did not converge: {result.message}",
            iterations=iterations,
            gradient_norm=gradient_norm,
        )
    logger.debug("Fitted %d weights in %d iterations (|grad|=%.2e)", Z.shape[1], iterations, gradient_norm)
    return FitResult(
        coef=params[:-1].copy(),
        intercept=float(params[-1]),
        mean=mean,
        scale=scale,
        iterations=iterations,
        gradient_norm=gradient_norm,
        history=history,
    )


@dataclass
class FactCheckModel:
    """Trained scorer; ``weights`` and ``bias`` apply to raw path counts."""

    predicate: str
    columns: List[AnchoredPath]
    weights: np.ndarray
    bias: float
    importance: np.ndarray
    definition: List[int] = field(default_factory=list)
    config: Dict = field(default_factory=dict)
    feature_mode: str = ANCHORED

    def __post_init__(self):
        if not self.columns:
            raise ModelFormatError("a model needs at least one column")
        arrays = [np.asarray(a, dtype=float) for a in (self.weights, self.importance)]
        if any(a.shape != (len(self.columns),) for a in arrays):
            raise ModelFormatError("model arrays are not aligned with its columns")
        if not (np.all(np.isfinite(arrays[0])) and np.isfinite(self.bias)):
            raise ModelFormatError("model weights must be finite")
        self.weights, self.importance = arrays
        if self.feature_mode not in FEATURE_MODES:
            raise ModelFormatError(f"unknown feature mode '{self.feature_mode}'")

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return X @ self.weights + self.bias

    def predict_proba(self, X) -> np.ndarray:
        return expit(self.decision_function(X))

    def vector(self, counts: Dict[int, int]) -> np.ndarray:
        x = np.zeros(len(self.columns))
        for j, n in counts.items():
            x[j] = n
        return x

    def definition_paths(self) -> List[AnchoredPath]:
        return [self.columns[j] for j in self.definition]

    def as_dict(self) -> Dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "predicate": self.predicate,
            "feature_mode": self.feature_mode,
            "columns": [c.text for c in self.columns],
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "importance": self.importance.tolist(),
            "definition": list(self.definition),
            "config": self.config,
        }

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    @classmethod
    def from_dict(cls, data: Dict) -> "FactCheckModel":
        if data.get("format") != MODEL_FORMAT:
            raise ModelFormatError(f"not a model file (format '{data.get('format')}')")
        if data.get("version") != MODEL_VERSION:
            raise ModelFormatError(f"model version {data.get('version')} is not supported (expected {MODEL_VERSION})")
        try:
            mode = data["feature_mode"]
            columns = [AnchoredPath.parse(text, metapath=mode == METAPATH) for text in data["columns"]]
            return cls(
                predicate=data["predicate"],
                columns=columns,
                weights=data["weights"],
                bias=float(data["bias"]),
                importance=data["importance"],
                definition=[int(j) for j in data.get("definition", [])],
                config=data.get("config", {}),
                feature_mode=mode,
            )
        except (KeyError, TypeError) as exc:
            raise ModelFormatError(f"model file is missing or mistypes field {exc}") from exc

    @classmethod
    def load(cls, path) -> "FactCheckModel":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ModelFormatError(f"{path}: cannot read model ({exc.strerror})") from exc
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: not a JSON model file ({exc.msg})") from exc
        except UnicodeDecodeError as exc:
            raise ModelFormatError(f"{path}: model file is not valid UTF-8") from exc
        return cls.from_dict(data)


def train(
    matrix: FeatureMatrix,
    predicate: str,
    l2: float = 1.0,
    max_iter: int = 10000,
    tol: float = 1e-6,
    definition: Sequence[int] = (),
    config: Optional[Dict] = None,
    feature_mode: str = ANCHORED,
) -> FactCheckModel:
    fit = fit_logistic(matrix.X, matrix.y, l2=l2, max_iter=max_iter, tol=tol)
    importance = matrix.importance if matrix.importance is not None else np.zeros(len(matrix.columns))
    return FactCheckModel(
        predicate=predicate,
        columns=list(matrix.columns),
        weights=fit.weights,
        bias=fit.bias,
        importance=importance,
        definition=list(definition),
        config=dict(config or {}),
        feature_mode=feature_mode,
    )
