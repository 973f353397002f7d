"""
MaxBenefit: разбиение всех точек на k команд без удалений.

Сначала каждая точка (в порядке индексов) уходит в команду, где её добавление
сильнее всего приближает среднее к цели; затем проходы переназначения, пока
разбиение не стабилизируется.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from ..config import SolverConfig
from ..core import CandidatePool, Partitioning, TargetSet, unpack

logger = logging.getLogger("gtpart.partition")


@dataclass
class PartitionState:
    labels: np.ndarray
    sums: np.ndarray
    sizes: np.ndarray
    sweep_count: int = 0
    cost_history: list[float] = field(default_factory=list)

    @classmethod
    def empty(cls, n: int, k: int, d: int) -> PartitionState:
        return cls(
            labels=np.full(n, -1, dtype=np.intp),
            sums=np.zeros((k, d)),
            sizes=np.zeros(k, dtype=np.intp),
        )

    @classmethod
    def from_labels(cls, X: np.ndarray, labels: ArrayLike, k: int) -> PartitionState:
        state = cls.empty(X.shape[0], k, X.shape[1])
        state.labels = np.array(labels, dtype=np.intp)
        state.resync(X)
        return state

    @property
    def k(self) -> int:
        return int(self.sizes.shape[0])

    def resync(self, X: np.ndarray) -> None:
        """Пересчитать суммы и размеры с нуля (в порядке индексов)."""
        k, d = self.sums.shape
        for j in range(k):
            members = self.labels == j
            self.sizes[j] = int(members.sum())
            self.sums[j] = X[members].sum(axis=0) if self.sizes[j] else np.zeros(d)

    def centroids(self) -> np.ndarray:
        out = np.zeros_like(self.sums)
        nz = self.sizes > 0
        out[nz] = self.sums[nz] / self.sizes[nz, None]
        return out

    def cost(self, T: np.ndarray) -> float:
        diff = self.centroids() - T
        return float(np.einsum("ij,ij->", diff, diff))

    def partitioning(self) -> Partitioning:
        return Partitioning(self.labels.copy(), self.k)


def _sq(a: np.ndarray) -> np.ndarray:
    return np.einsum("...j,...j->...", a, a)


def _gains(state: PartitionState, x: np.ndarray, T: np.ndarray) -> np.ndarray:
    """D(t_j, mean(C_j)) − D(t_j, mean(C_j ∪ {x})) для всех j."""
    before = _sq(state.centroids() - T)
    after = _sq((state.sums + x) / (state.sizes + 1)[:, None] - T)
    return before - after


def _pick(scores: np.ndarray, sizes: np.ndarray) -> int:
    """argmax; при равенстве пустая команда, затем меньший индекс."""
    tied = np.flatnonzero(scores == scores.max())
    empty = tied[sizes[tied] == 0]
    return int(empty[0] if empty.size else tied[0])


def insert_point(state: PartitionState, X: np.ndarray, i: int, T: np.ndarray) -> int:
    """Добавить точку i в команду с наибольшим выигрышем; вернуть номер команды."""
    x = X[i]
    j = _pick(_gains(state, x, T), state.sizes)
    state.labels[i] = j
    state.sums[j] += x
    state.sizes[j] += 1
    return j


def _fill_empty_teams(state: PartitionState, X: np.ndarray, T: np.ndarray) -> None:
    # при n >= k каждая команда получает хотя бы одну точку: в пустую команду
    # переходит точка из команды размера >= 2 с наибольшим изменением стоимости
    for j in np.flatnonzero(state.sizes == 0):
        best_i, best_delta = -1, -np.inf
        for i in range(X.shape[0]):
            h = int(state.labels[i])
            if state.sizes[h] < 2:
                continue
            x = X[i]
            src = float(_sq(state.sums[h] / state.sizes[h] - T[h])) - float(
                _sq((state.sums[h] - x) / (state.sizes[h] - 1) - T[h])
            )
            dst = float(_sq(T[j])) - float(_sq(x - T[j]))
            if src + dst > best_delta:
                best_i, best_delta = i, src + dst
        h = int(state.labels[best_i])
        state.sums[h] -= X[best_i]
        state.sizes[h] -= 1
        state.sums[j] += X[best_i]
        state.sizes[j] += 1
        state.labels[best_i] = j


def initial_assign(
    pool: CandidatePool | ArrayLike, targets: TargetSet | ArrayLike
) -> PartitionState:
    X, T = unpack(pool, targets)
    n, d = X.shape
    state = PartitionState.empty(n, T.shape[0], d)
    for i in range(n):
        insert_point(state, X, i, T)
    if n >= state.k:
        _fill_empty_teams(state, X, T)
    state.resync(X)
    state.cost_history.append(state.cost(T))
    return state


def reassign_sweeps(
    state: PartitionState,
    pool: CandidatePool | ArrayLike,
    targets: TargetSet | ArrayLike,
    max_sweeps: int = 100,
    epsilon: float = 1e-9,
) -> PartitionState:
    """
    Проходы переназначения. Точка переходит из h в j, если это строго
    уменьшает стоимость: gain_j − loss > 0, где
    loss = D(t_h, mean(C_h \\ {r})) − D(t_h, mean(C_h)).
    Средние обновляются сразу после каждого перемещения; команда из одной
    точки её не отдаёт.
    """
    X, T = unpack(pool, targets)
    if not state.cost_history:
        state.cost_history.append(state.cost(T))
    for _ in range(max_sweeps):
        prev = state.cost_history[-1]
        moved = 0
        for i in range(X.shape[0]):
            h = int(state.labels[i])
            if h < 0 or state.sizes[h] <= 1:
                continue
            x = X[i]
            size_h = state.sizes[h]
            d_before = float(_sq(state.sums[h] / size_h - T[h]))
            d_without = float(_sq((state.sums[h] - x) / (size_h - 1) - T[h]))
            loss = d_without - d_before
            benefit = _gains(state, x, T) - loss
            benefit[h] = -np.inf
            j = _pick(benefit, state.sizes)
            if benefit[j] > 0.0:
                state.sums[h] -= x
                state.sizes[h] -= 1
                state.sums[j] += x
                state.sizes[j] += 1
                state.labels[i] = j
                moved += 1
        state.resync(X)
        state.sweep_count += 1
        cost = state.cost(T)
        state.cost_history.append(cost)
        logger.debug("sweep %d: moved=%d cost=%.12g", state.sweep_count, moved, cost)
        if moved == 0 or prev - cost < epsilon:
            break
    return state


def max_benefit(
    pool: CandidatePool | ArrayLike,
    targets: TargetSet | ArrayLike,
    config: SolverConfig | None = None,
) -> PartitionState:
    config = config or SolverConfig()
    state = initial_assign(pool, targets)
    return reassign_sweeps(
        state, pool, targets, max_sweeps=config.max_sweeps, epsilon=config.epsilon
    )


def max_benefit_partition(
    pool: CandidatePool | ArrayLike,
    targets: TargetSet | ArrayLike,
    config: SolverConfig | None = None,
) -> Partitioning:
    return max_benefit(pool, targets, config).partitioning()


def closest_target_partition(
    pool: CandidatePool | ArrayLike, targets: TargetSet | ArrayLike
) -> Partitioning:
    """Каждая точка уходит к ближайшей цели (меньший индекс при равенстве)."""
    X, T = unpack(pool, targets)
    dist = _sq(X[:, None, :] - T[None, :, :])
    return Partitioning(np.argmin(dist, axis=1), T.shape[0])

