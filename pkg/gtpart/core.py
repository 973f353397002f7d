from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from .errors import DimensionError, ValidationError

logger = logging.getLogger("gtpart.core")

# метка «удалён» в массиве назначений; команды нумеруются с 0
REMOVED = -1


def as_matrix(points: ArrayLike, *, d: int | None = None) -> np.ndarray:
    """Привести набор точек к float64-матрице (m, d) с проверкой размерности."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        if arr.size == 0:
            arr = np.zeros((0, d or 0))
        else:
            arr = arr.reshape(-1, 1) if d == 1 else arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-D array of points, got shape {arr.shape}")
    if d is not None and arr.shape[0] and arr.shape[1] != d:
        raise DimensionError(f"points have dimension {arr.shape[1]}, expected {d}")
    return arr


def as_vector(v: ArrayLike) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionError(f"expected a feature vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class CandidatePool:
    """Пул кандидатов R: n векторов размерности d с уникальными id."""

    ids: tuple[str, ...]
    X: np.ndarray

    def __post_init__(self) -> None:
        X = np.array(self.X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValidationError(f"pool must be a non-empty (n, d) matrix, got shape {X.shape}")
        if not np.isfinite(X).all():
            raise ValidationError("pool contains non-finite values")
        ids = tuple(str(i) for i in self.ids)
        if len(ids) != X.shape[0]:
            raise ValidationError(f"{len(ids)} ids for {X.shape[0]} vectors")
        if len(set(ids)) != len(ids):
            raise ValidationError("candidate ids must be unique")
        X.setflags(write=False)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "X", X)

    @classmethod
    def from_rows(cls, rows: ArrayLike, ids: Sequence[str] | None = None) -> CandidatePool:
        X = np.asarray(rows, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if ids is None:
            width = len(str(max(len(X) - 1, 0)))
            ids = [f"r{i:0{width}d}" for i in range(len(X))]
        return cls(tuple(ids), X)

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def d(self) -> int:
        return int(self.X.shape[1])


@dataclass(frozen=True)
class TargetSet:
    """Целевые векторы t_1..t_k."""

    T: np.ndarray

    def __post_init__(self) -> None:
        T = np.array(self.T, dtype=np.float64)
        if T.ndim == 1:
            T = T.reshape(1, -1)
        if T.ndim != 2 or T.shape[0] < 1 or T.shape[1] < 1:
            raise ValidationError(f"targets must be a non-empty (k, d) matrix, got shape {T.shape}")
        if not np.isfinite(T).all():
            raise ValidationError("targets contain non-finite values")
        T.setflags(write=False)
        object.__setattr__(self, "T", T)

    @property
    def k(self) -> int:
        return int(self.T.shape[0])

    @property
    def d(self) -> int:
        return int(self.T.shape[1])

    def check_pool(self, pool: CandidatePool) -> None:
        if self.d != pool.d:
            raise DimensionError(f"targets have dimension {self.d}, pool has {pool.d}")


@dataclass(frozen=True)
class Partitioning:
    """Назначение каждого кандидата в команду 0..k-1 либо REMOVED."""

    labels: np.ndarray
    k: int

    def __post_init__(self) -> None:
        labels = np.array(self.labels, dtype=np.intp)
        if labels.ndim != 1:
            raise ValidationError("labels must be one-dimensional")
        if self.k < 1:
            raise ValidationError("k must be >= 1")
        if labels.size and (labels.min() < REMOVED or labels.max() >= self.k):
            raise ValidationError(f"team labels must lie in [0, {self.k - 1}] or be REMOVED")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    def validate(self, pool: CandidatePool) -> None:
        if self.labels.size != pool.n:
            raise ValidationError(f"partitioning covers {self.labels.size} of {pool.n} candidates")

    def teams(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.labels == j) for j in range(self.k)]

    def removed(self) -> np.ndarray:
        return np.flatnonzero(self.labels == REMOVED)

    def sizes(self) -> np.ndarray:
        kept = self.labels[self.labels != REMOVED]
        return np.bincount(kept, minlength=self.k)

    def with_removed(self, idx: ArrayLike) -> Partitioning:
        labels = self.labels.copy()
        labels[np.asarray(idx, dtype=np.intp)] = REMOVED
        return Partitioning(labels, self.k)

    def relabeled(self, perm: ArrayLike) -> Partitioning:
        """Команда j получает номер perm[j]; удалённые остаются удалёнными."""
        perm = np.asarray(perm, dtype=np.intp)
        labels = self.labels.copy()
        kept = labels != REMOVED
        labels[kept] = perm[labels[kept]]
        return Partitioning(labels, self.k)

    def assignment_map(self, pool: CandidatePool) -> dict[str, int | str]:
        return {
            cid: ("removed" if lab == REMOVED else int(lab) + 1)
            for cid, lab in zip(pool.ids, self.labels.tolist())
        }


@dataclass
class SolveReport:
    algorithm: str
    cost: float
    per_team_cost: list[float]
    centroids: list[list[float]]
    removed_ids: list[str]
    assignment: dict[str, int | str]
    iterations: int
    wall_time: float
    seed: int
    weighted_cost: float
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "cost": self.cost,
            "weighted_cost": self.weighted_cost,
            "per_team": {
                "cost": self.per_team_cost,
                "centroid": self.centroids,
                "size": [
                    sum(1 for v in self.assignment.values() if v == j + 1)
                    for j in range(len(self.per_team_cost))
                ],
            },
            "removed_ids": self.removed_ids,
            "assignment": self.assignment,
            "iterations": self.iterations,
            "wall_time_s": self.wall_time,
            "seed": self.seed,
            **({"extra": self.extra} if self.extra else {}),
        }


def unpack(
    pool: CandidatePool | ArrayLike, targets: TargetSet | ArrayLike
) -> tuple[np.ndarray, np.ndarray]:
    """Матрицы X (n, d) и T (k, d) из доменных типов или сырых массивов."""
    X = pool.X if isinstance(pool, CandidatePool) else CandidatePool.from_rows(pool).X
    T = targets.T if isinstance(targets, TargetSet) else TargetSet(targets).T
    if X.shape[1] != T.shape[1]:
        raise DimensionError(f"targets have dimension {T.shape[1]}, pool has {X.shape[1]}")
    return X, T


# -------------------- distance / mean / cost --------------------


def squared_l2(u: ArrayLike, v: ArrayLike) -> float:
    u = as_vector(u)
    v = as_vector(v)
    if u.shape != v.shape:
        raise DimensionError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    diff = u - v
    return float(np.dot(diff, diff))


def mean(points: ArrayLike, d: int | None = None) -> np.ndarray:
    """Покоординатное среднее; для пустого набора нулевой вектор размерности d."""
    arr = as_matrix(points, d=d)
    if arr.shape[0] == 0:
        if d is None and arr.shape[1] == 0:
            raise DimensionError("mean of an empty set needs an explicit dimension")
        return np.zeros(d if d is not None else arr.shape[1])
    return arr.sum(axis=0) / arr.shape[0]


def team_centroids(X: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    d = X.shape[1]
    out = np.zeros((k, d))
    for j in range(k):
        out[j] = mean(X[labels == j], d=d)
    return out


def team_costs(X: np.ndarray, labels: np.ndarray, T: np.ndarray) -> np.ndarray:
    """D(mean(C_j), t_j) для каждой команды; удалённые точки не учитываются."""
    C = team_centroids(X, labels, T.shape[0])
    diff = C - T
    return np.einsum("ij,ij->i", diff, diff)


def _checked(pool: CandidatePool, part: Partitioning, targets: TargetSet) -> None:
    part.validate(pool)
    targets.check_pool(pool)
    if targets.k != part.k:
        raise ValidationError(f"partitioning has k={part.k}, targets have k={targets.k}")


def per_team_cost(pool: CandidatePool, part: Partitioning, targets: TargetSet) -> np.ndarray:
    _checked(pool, part, targets)
    return team_costs(pool.X, part.labels, targets.T)


def partition_cost(pool: CandidatePool, part: Partitioning, targets: TargetSet) -> float:
    return float(per_team_cost(pool, part, targets).sum())


def weighted_partition_cost(pool: CandidatePool, part: Partitioning, targets: TargetSet) -> float:
    costs = per_team_cost(pool, part, targets)
    return float((costs * part.sizes()).sum())


def build_report(
    algorithm: str,
    pool: CandidatePool,
    part: Partitioning,
    targets: TargetSet,
    *,
    iterations: int = 0,
    wall_time: float = 0.0,
    seed: int = 0,
    extra: dict[str, Any] | None = None,
) -> SolveReport:
    costs = per_team_cost(pool, part, targets)
    centroids = team_centroids(pool.X, part.labels, part.k)
    return SolveReport(
        algorithm=algorithm,
        cost=float(costs.sum()),
        per_team_cost=costs.tolist(),
        centroids=centroids.tolist(),
        removed_ids=[pool.ids[i] for i in part.removed()],
        assignment=part.assignment_map(pool),
        iterations=int(iterations),
        wall_time=float(wall_time),
        seed=int(seed),
        weighted_cost=float((costs * part.sizes()).sum()),
        extra=extra or {},
    )
