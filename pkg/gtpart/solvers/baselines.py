"""
Базовые алгоритмы для сравнения: Random, k-means (обычный и с целями в
качестве начальных центров), k-means--, kNN + k-means, Best-Team-First.
Все возвращают Partitioning, сопоставимый по той же стоимости.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist
from sklearn.cluster import kmeans_plusplus
from sklearn.neighbors import NearestNeighbors

from ..config import SolverConfig
from ..core import REMOVED, CandidatePool, Partitioning, TargetSet, team_centroids, unpack
from ..errors import InfeasibleError, ValidationError
from ..utils import team_sizes
from .cis import cvx_select, greedy_remove
from .guided_split import _remove_step

logger = logging.getLogger("gtpart.baselines")

LLOYD_MAX_ITER = 300
LLOYD_TOL = 1e-9


@dataclass(frozen=True)
class Matching:
    """perm[i]: номер цели для команды i."""

    perm: np.ndarray
    total: float


@dataclass
class KMeansResult:
    centers: np.ndarray
    labels: np.ndarray
    iterations: int
    objective_history: list[float] = field(default_factory=list)

    def partitioning(self) -> Partitioning:
        return Partitioning(self.labels, self.centers.shape[0])


def _check_sizes(n: int, k: int, l: int) -> None:
    if l < 0:
        raise ValidationError(f"removal budget must be >= 0, got {l}")
    if k < 1 or k > n - l:
        raise InfeasibleError(f"need 1 <= k <= n - l, got k={k}, n={n}, l={l}")


# -------------------- Hungarian matching --------------------


def match_cost_matrix(cost: ArrayLike) -> Matching:
    C = np.asarray(cost, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValidationError(f"assignment needs a square cost matrix, got shape {C.shape}")
    rows, cols = linear_sum_assignment(C)
    perm = np.empty(C.shape[0], dtype=np.intp)
    perm[rows] = cols
    return Matching(perm, float(C[rows, cols].sum()))


def hungarian_match(centroids: ArrayLike, targets: TargetSet | ArrayLike) -> Matching:
    C = np.asarray(centroids, dtype=np.float64)
    T = targets.T if isinstance(targets, TargetSet) else TargetSet(targets).T
    if C.ndim != 2 or C.shape[0] != T.shape[0]:
        raise ValidationError(f"{C.shape[0]} centroids for {T.shape[0]} targets")
    if C.shape[1] != T.shape[1]:
        raise ValidationError(f"centroids have dimension {C.shape[1]}, targets {T.shape[1]}")
    return match_cost_matrix(cdist(C, T, "sqeuclidean"))


def post_pipeline(
    part: Partitioning,
    pool: CandidatePool | ArrayLike,
    targets: TargetSet | ArrayLike,
    l: int,
    config: SolverConfig | None = None,
) -> Partitioning:
    """Переназначить команды целям по Венгерскому алгоритму, затем удалить ℓ точек через B + DP."""
    config = config or SolverConfig()
    X, T = unpack(pool, targets)
    centroids = team_centroids(X, part.labels, part.k)
    matching = hungarian_match(centroids, T)
    relabeled = part.relabeled(matching.perm)
    if l == 0:
        return relabeled
    labels, _ = _remove_step(X, T, relabeled.labels, l, config)
    return Partitioning(labels, part.k)


# -------------------- Random --------------------


def random_partition(
    pool: CandidatePool | ArrayLike,
    targets: TargetSet | ArrayLike,
    l: int,
    seed: int,
    config: SolverConfig | None = None,
) -> Partitioning:
    X, T = unpack(pool, targets)
    n, k = X.shape[0], T.shape[0]
    _check_sizes(n, k, l)
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, k, size=n)
    # пустую команду заполняем точкой из самой большой команды
    for j in range(k):
        if not (labels == j).any():
            donor = int(np.argmax(np.bincount(labels, minlength=k)))
            labels[np.flatnonzero(labels == donor)[0]] = j
    return post_pipeline(Partitioning(labels, k), X, T, l, config)


# -------------------- k-means family --------------------


def _lloyd(
    X: np.ndarray,
    centers: np.ndarray,
    n_outliers: int = 0,
    max_iter: int = LLOYD_MAX_ITER,
    tol: float = LLOYD_TOL,
) -> KMeansResult:
    """
    Итерации Ллойда; при n_outliers > 0 на каждом шаге n_outliers самых
    далёких от ближайшего центра точек помечаются как выбросы (k-means--).
    """
    centers = np.array(centers, dtype=np.float64)
    k = centers.shape[0]
    labels = np.zeros(X.shape[0], dtype=np.intp)
    history: list[float] = []
    it = 0
    for it in range(1, max_iter + 1):
        dist = cdist(X, centers, "sqeuclidean")
        labels = np.argmin(dist, axis=1)
        nearest = dist[np.arange(X.shape[0]), labels]
        if n_outliers:
            outliers = np.argsort(-nearest, kind="stable")[:n_outliers]
            labels[outliers] = REMOVED
        history.append(float(nearest[labels != REMOVED].sum()))

        new_centers = centers.copy()
        for j in range(k):
            members = labels == j
            if members.any():
                new_centers[j] = X[members].mean(axis=0)
        for j in range(k):
            if not (labels == j).any():
                # пустой кластер: центр переносится в точку, самую далёкую от своего центра
                kept = np.flatnonzero(labels != REMOVED)
                far = kept[np.argmax(((X[kept] - new_centers[labels[kept]]) ** 2).sum(axis=1))]
                new_centers[j] = X[far]
                logger.debug("k-means: cluster %d emptied, reseeded at point %d", j, far)
        shift = float(np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max())
        centers = new_centers
        if shift <= tol:
            break
    # финальное назначение под итоговые центры
    dist = cdist(X, centers, "sqeuclidean")
    labels = np.argmin(dist, axis=1)
    nearest = dist[np.arange(X.shape[0]), labels]
    if n_outliers:
        labels[np.argsort(-nearest, kind="stable")[:n_outliers]] = REMOVED
    history.append(float(nearest[labels != REMOVED].sum()))
    return KMeansResult(centers, labels, it, history)


def _seed_centers(X: np.ndarray, k: int, seed: int) -> np.ndarray:
    centers, _ = kmeans_plusplus(X, n_clusters=k, random_state=seed)
    return centers


def kmeans_partition(
    pool: CandidatePool | ArrayLike,
    k: int,
    seed: int,
    variant: str = "plain",
    targets: TargetSet | ArrayLike | None = None,
) -> KMeansResult:
    X = pool.X if isinstance(pool, CandidatePool) else CandidatePool.from_rows(pool).X
    _check_sizes(X.shape[0], k, 0)
    if variant == "plain":
        centers = _seed_centers(X, k, seed)
    elif variant == "target_seeded":
        if targets is None:
            raise ValidationError("target_seeded k-means needs targets")
        _, T = unpack(X, targets)
        if T.shape[0] != k:
            raise ValidationError(f"{T.shape[0]} targets for k={k}")
        centers = T.copy()
    else:
        raise ValidationError(f"unknown k-means variant {variant!r}")
    return _lloyd(X, centers)


def kmeans_minus_minus(
    pool: CandidatePool | ArrayLike, k: int, l: int, seed: int
) -> KMeansResult:
    X = pool.X if isinstance(pool, CandidatePool) else CandidatePool.from_rows(pool).X
    _check_sizes(X.shape[0], k, l)
    return _lloyd(X, _seed_centers(X, k, seed), n_outliers=l)


def nearest_neighbor_distances(X: np.ndarray) -> np.ndarray:
    nn = NearestNeighbors(n_neighbors=2).fit(X)
    dist, _ = nn.kneighbors(X)
    return dist[:, 1]


def knn_then_kmeans(
    pool: CandidatePool | ArrayLike, k: int, l: int, seed: int
) -> KMeansResult:
    """Удаляет ℓ точек с наибольшим расстоянием до ближайшего соседа, затем k-means."""
    X = pool.X if isinstance(pool, CandidatePool) else CandidatePool.from_rows(pool).X
    n = X.shape[0]
    if n < 2:
        raise ValidationError("kNN filtering needs at least two points")
    _check_sizes(n, k, l)
    labels = np.zeros(n, dtype=np.intp)
    if l:
        removed = np.argsort(-nearest_neighbor_distances(X), kind="stable")[:l]
        labels[removed] = REMOVED
    kept = np.flatnonzero(labels != REMOVED)
    result = kmeans_partition(X[kept], k, seed, "plain")
    labels[kept] = result.labels
    return KMeansResult(result.centers, labels, result.iterations, result.objective_history)


# -------------------- Best-Team-First --------------------


def btf(
    pool: CandidatePool | ArrayLike,
    targets: TargetSet | ArrayLike,
    l: int,
    method: str = "cvx",
    config: SolverConfig | None = None,
) -> Partitioning:
    """
    Цели обходятся в заданном порядке; для цели i из оставшихся точек
    выбирается лучшая команда размера s_i. Не попавшие ни в одну команду удаляются.
    """
    config = config or SolverConfig()
    X, T = unpack(pool, targets)
    n, k = X.shape[0], T.shape[0]
    _check_sizes(n, k, l)
    sizes = team_sizes(n - l, k)
    labels = np.full(n, REMOVED, dtype=np.intp)
    remaining = np.arange(n)
    for i, size in enumerate(sizes):
        drop = remaining.size - size
        if drop == 0:
            chosen = remaining
        elif method == "cvx":
            chosen = remaining[
                cvx_select(X[remaining], T[i], drop, tol=config.tol, max_iter=config.max_iter)
            ]
        elif method == "greedy":
            mask = np.ones(remaining.size, dtype=bool)
            mask[greedy_remove(X[remaining], T[i], drop)] = False
            chosen = remaining[mask]
        else:
            raise ValidationError(f"unknown CIS method {method!r}")
        labels[chosen] = i
        remaining = np.setdiff1d(remaining, chosen, assume_unique=True)
    return Partitioning(labels, k)
