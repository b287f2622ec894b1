"""Coefficient standardization and truncated PCA.

Coefficient matrices are first standardized in groups (per channel, and
additionally per scattering order), then centered and decomposed by SVD.
Principal axes whose variance share falls below the cutoff ``theta`` are
discarded, giving the low-dimensional representation used by the
regression and classification heads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateData, InsufficientData, InvalidConfig, ShapeError


@dataclass
class Standardizer:
    group_map: np.ndarray  # feature position -> group id
    group_ids: np.ndarray
    means: np.ndarray  # per group
    stds: np.ndarray  # per group; 0 marks a constant group
    n_features: int

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.n_features:
            raise ShapeError(f"expected {self.n_features} features, got {x.shape[1]}")
        out = np.zeros_like(x)
        for gid, mean, std in zip(self.group_ids, self.means, self.stds):
            cols = self.group_map == gid
            if std > 0:
                out[:, cols] = (x[:, cols] - mean) / std
            # constant groups stay 0
        return out

    def to_dict(self) -> dict:
        return {
            "group_map": self.group_map.tolist(),
            "group_ids": self.group_ids.tolist(),
            "means": self.means.tolist(),
            "stds": self.stds.tolist(),
            "n_features": self.n_features,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(
            group_map=np.asarray(d["group_map"]),
            group_ids=np.asarray(d["group_ids"]),
            means=np.asarray(d["means"], dtype=float),
            stds=np.asarray(d["stds"], dtype=float),
            n_features=d["n_features"],
        )


def fit_standardizer(training_matrix: np.ndarray, group_map: np.ndarray) -> Standardizer:
    """Pooled per-group mean/std over all training entries of each group."""
    x = np.asarray(training_matrix, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise InsufficientData("standardizer needs >= 2 rows")
    group_map = np.asarray(group_map)
    if group_map.shape[0] != x.shape[1]:
        raise ShapeError("group_map length must equal feature count")
    group_ids = np.unique(group_map)
    means, stds = [], []
    for gid in group_ids:
        values = x[:, group_map == gid].ravel()
        means.append(values.mean())
        stds.append(values.std())
    return Standardizer(
        group_map=group_map,
        group_ids=group_ids,
        means=np.array(means),
        stds=np.array(stds),
        n_features=x.shape[1],
    )


@dataclass
class PcaModel:
    mean: np.ndarray
    basis: np.ndarray  # features x retained axes, column-orthonormal
    explained_variance: np.ndarray  # per retained axis, descending
    total_variance: float
    theta: float

    @property
    def n_axes(self) -> int:
        return self.basis.shape[1]

    def transform(self, row: np.ndarray) -> np.ndarray:
        row = np.asarray(row, dtype=float)
        if row.shape[-1] != self.mean.shape[0]:
            raise ShapeError(
                f"expected {self.mean.shape[0]} features, got {row.shape[-1]}"
            )
        return (row - self.mean) @ self.basis

    def inverse_transform(self, scores: np.ndarray) -> np.ndarray:
        scores = np.asarray(scores, dtype=float)
        if scores.shape[-1] != self.n_axes:
            raise ShapeError(f"expected {self.n_axes} scores, got {scores.shape[-1]}")
        return scores @ self.basis.T + self.mean

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "basis": self.basis.tolist(),
            "explained_variance": self.explained_variance.tolist(),
            "total_variance": self.total_variance,
            "theta": self.theta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PcaModel":
        return cls(
            mean=np.asarray(d["mean"], dtype=float),
            basis=np.asarray(d["basis"], dtype=float),
            explained_variance=np.asarray(d["explained_variance"], dtype=float),
            total_variance=d["total_variance"],
            theta=d["theta"],
        )


def fit_pca(standardized_matrix: np.ndarray, theta: float) -> PcaModel:
    """Truncated PCA of a standardized coefficient matrix.

    Axes are retained while their share of the total variance is at least
    ``theta``. Basis column signs are normalized so the largest-magnitude
    entry of each column is positive.
    """
    x = np.asarray(standardized_matrix, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise InsufficientData("PCA needs >= 2 rows")
    if not 0 < theta < 1:
        raise InvalidConfig(f"theta must be in (0,1), got {theta}")

    mean = x.mean(axis=0)
    centered = x - mean
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    variances = svals**2 / (x.shape[0] - 1)
    total = float(variances.sum())
    if total <= 0:
        raise DegenerateData("rank-0 matrix")

    keep = variances / total >= theta
    basis = vt[keep].T
    # deterministic sign: largest-magnitude entry of each column positive
    flip = np.sign(basis[np.argmax(np.abs(basis), axis=0), np.arange(basis.shape[1])])
    basis = basis * flip
    return PcaModel(
        mean=mean,
        basis=basis,
        explained_variance=variances[keep],
        total_variance=total,
        theta=theta,
    )
