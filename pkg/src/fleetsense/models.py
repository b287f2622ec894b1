"""Supervised heads on PC scores: quadratic damage regression, kNN
maneuver classification and the evaluation metrics."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData, InvalidK, ShapeError, UndefinedMetric, UnknownLabel


def quadratic_features(scores: np.ndarray) -> np.ndarray:
    """Feature map [1, h_i, h_i*h_j for i <= j] per row."""
    scores = np.atleast_2d(np.asarray(scores, dtype=float))
    n, p = scores.shape
    cols = [np.ones((n, 1)), scores]
    for i in range(p):
        for j in range(i, p):
            cols.append((scores[:, i] * scores[:, j])[:, None])
    return np.hstack(cols)


def n_quadratic_coefficients(p: int) -> int:
    return 1 + p + p * (p + 1) // 2


@dataclass
class QuadraticRegressor:
    coefficients: np.ndarray  # [intercept, linear..., quadratic...]
    n_axes: int
    target_channel: str = ""

    def predict(self, scores: np.ndarray) -> np.ndarray:
        scores = np.asarray(scores, dtype=float)
        single = scores.ndim == 1
        scores = np.atleast_2d(scores)
        if scores.shape[1] != self.n_axes:
            raise ShapeError(f"expected {self.n_axes} axes, got {scores.shape[1]}")
        pred = quadratic_features(scores) @ self.coefficients
        return pred[0] if single else pred

    def predict_damage(self, scores: np.ndarray) -> np.ndarray:
        """D* = 10**(predicted lg D); strictly positive."""
        return 10.0 ** self.predict(scores)

    def to_dict(self) -> dict:
        return {
            "coefficients": self.coefficients.tolist(),
            "n_axes": self.n_axes,
            "target_channel": self.target_channel,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QuadraticRegressor":
        return cls(
            coefficients=np.asarray(d["coefficients"], dtype=float),
            n_axes=d["n_axes"],
            target_channel=d["target_channel"],
        )


def fit_quadratic(
    scores: np.ndarray, targets: np.ndarray, target_channel: str = ""
) -> QuadraticRegressor:
    """Least-squares fit of the quadratic feature map (SVD, minimum-norm)."""
    scores = np.atleast_2d(np.asarray(scores, dtype=float))
    targets = np.asarray(targets, dtype=float)
    n, p = scores.shape
    n_coef = n_quadratic_coefficients(p)
    if n <= n_coef:
        raise InsufficientData(f"need more than {n_coef} rows, got {n}")
    if targets.shape != (n,):
        raise ShapeError("targets length must match score rows")
    design = quadratic_features(scores)
    coef, *_ = np.linalg.lstsq(design, targets, rcond=None)
    return QuadraticRegressor(coefficients=coef, n_axes=p, target_channel=target_channel)


def r2(y: np.ndarray, y_star: np.ndarray) -> float:
    """Coefficient of determination 1 - SSE/SST."""
    y = np.asarray(y, dtype=float)
    y_star = np.asarray(y_star, dtype=float)
    if y.shape != y_star.shape or y.size < 2:
        raise ShapeError("r2 needs two equal-length vectors of size >= 2")
    sst = np.sum((y - y.mean()) ** 2)
    if sst == 0:
        raise UndefinedMetric("r2 undefined for constant observations")
    return float(1 - np.sum((y - y_star) ** 2) / sst)


def fds_ratio(damage: np.ndarray, damage_star: np.ndarray) -> float:
    """Ratio of total predicted to total observed (non-logarithmic) damage."""
    damage = np.asarray(damage, dtype=float)
    damage_star = np.asarray(damage_star, dtype=float)
    if damage.shape != damage_star.shape:
        raise ShapeError("fds_ratio needs equal-length vectors")
    total = damage.sum()
    if total <= 0:
        raise UndefinedMetric("fds_ratio undefined for zero total damage")
    return float(damage_star.sum() / total)


@dataclass
class KnnModel:
    training_points: np.ndarray
    training_labels: list
    k: int = 20
    task: str = ""

    def __post_init__(self):
        self.training_points = np.atleast_2d(
            np.asarray(self.training_points, dtype=float)
        )
        if self.k <= 0 or self.k > self.training_points.shape[0]:
            raise InvalidK(
                f"k = {self.k} outside [1, {self.training_points.shape[0]}]"
            )
        if len(self.training_labels) != self.training_points.shape[0]:
            raise ShapeError("one label per training row required")

    def predict(self, scores_row: np.ndarray):
        """Majority vote among the k nearest training points (Euclidean).

        Ties are broken by smaller mean distance, then by label sort order.
        """
        row = np.asarray(scores_row, dtype=float)
        if row.shape[-1] != self.training_points.shape[1]:
            raise ShapeError(
                f"expected {self.training_points.shape[1]} axes, got {row.shape[-1]}"
            )
        dist = np.linalg.norm(self.training_points - row, axis=1)
        order = np.lexsort((np.arange(len(dist)), dist))[: self.k]
        votes = Counter(self.training_labels[i] for i in order)
        top = max(votes.values())
        tied = [label for label, v in votes.items() if v == top]
        if len(tied) == 1:
            return tied[0]
        mean_dist = {
            label: np.mean([dist[i] for i in order if self.training_labels[i] == label])
            for label in tied
        }
        best = min(mean_dist.values())
        tied = sorted(label for label, m in mean_dist.items() if m == best)
        return tied[0]

    def predict_many(self, scores: np.ndarray) -> list:
        return [self.predict(row) for row in np.atleast_2d(scores)]

    def to_dict(self) -> dict:
        return {
            "training_points": self.training_points.tolist(),
            "training_labels": list(self.training_labels),
            "k": self.k,
            "task": self.task,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KnnModel":
        return cls(
            training_points=np.asarray(d["training_points"], dtype=float),
            training_labels=d["training_labels"],
            k=d["k"],
            task=d["task"],
        )


@dataclass
class ConfusionResult:
    labels: list
    matrix: np.ndarray  # counts indexed [true][predicted]
    accuracy: float

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "matrix": self.matrix.tolist(),
            "accuracy": self.accuracy,
        }


def confusion_and_accuracy(
    true_labels: list, predicted_labels: list, label_set: list | None = None
) -> ConfusionResult:
    if len(true_labels) != len(predicted_labels):
        raise ShapeError("label lists must have equal length")
    if label_set is None:
        label_set = sorted(set(true_labels) | set(predicted_labels))
    index = {label: i for i, label in enumerate(label_set)}
    matrix = np.zeros((len(label_set), len(label_set)), dtype=int)
    for t, p in zip(true_labels, predicted_labels):
        if t not in index or p not in index:
            bad = t if t not in index else p
            raise UnknownLabel(f"label {bad!r} not in task label set")
        matrix[index[t], index[p]] += 1
    accuracy = float(np.trace(matrix) / max(matrix.sum(), 1))
    return ConfusionResult(labels=list(label_set), matrix=matrix, accuracy=accuracy)
