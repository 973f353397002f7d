"""
GuidedSplit: MaxBenefit-разбиение, матрица выигрышей B(i, q) по командам
и динамика MBR, распределяющая общий бюджет удалений ℓ.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, TypeVar

import numpy as np
from numpy.typing import ArrayLike

from ..config import SolverConfig
from ..core import (
    REMOVED,
    CandidatePool,
    Partitioning,
    SolveReport,
    TargetSet,
    build_report,
    team_costs,
    unpack,
)
from ..errors import BudgetError, InfeasibleError, ValidationError
from ..utils import stopwatch
from .cis import benefit_of, greedy_remove, removal_benefit
from .partition import PartitionState, insert_point, max_benefit, reassign_sweeps

logger = logging.getLogger("gtpart.guided_split")

MAX_REFINE_ROUNDS = 10

J = TypeVar("J")
R = TypeVar("R")


@dataclass(frozen=True)
class BenefitMatrix:
    """values[i, q] = B(i, q); -inf там, где удаление q точек опустошило бы команду."""

    values: np.ndarray
    removal_sets: list[list[list[int]]]

    @property
    def k(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class RemovalAllocation:
    per_team: list[int]
    total_benefit: float


def parallel_map(fn: Callable[[J], R], jobs: Sequence[J], workers: int = 1) -> list[R]:
    """map с сохранением порядка; при workers > 1 через пул потоков."""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def build_benefit_matrix(
    pool: CandidatePool | ArrayLike,
    teams: Sequence[ArrayLike],
    targets: TargetSet | ArrayLike,
    l: int,
    method: str | None = None,
    config: SolverConfig | None = None,
) -> BenefitMatrix:
    """
    `teams[i]`: индексы точек пула в команде i. Наборы удаления
    возвращаются в индексах пула.
    """
    config = config or SolverConfig()
    method = method or config.cis_method
    X, T = unpack(pool, targets)
    if len(teams) != T.shape[0]:
        raise ValidationError(f"{len(teams)} teams for {T.shape[0]} targets")
    if l < 0:
        raise BudgetError(f"removal budget must be >= 0, got {l}")
    k = len(teams)
    members = [np.asarray(t, dtype=np.intp) for t in teams]
    values = np.full((k, l + 1), -np.inf)
    values[:, 0] = 0.0
    sets: list[list[list[int]]] = [[[] for _ in range(l + 1)] for _ in range(k)]
    qmax = [max(min(l, m.size - 1), 0) for m in members]

    if method == "greedy":
        # жадные наборы вложены: префикс одного прогона = отдельный прогон для меньшего q
        def run_team(i: int) -> list[tuple[float, list[int]]]:
            if qmax[i] == 0:
                return []
            Xi = X[members[i]]
            order = greedy_remove(Xi, T[i], qmax[i])
            out = []
            for q in range(1, qmax[i] + 1):
                removed = sorted(order[:q])
                out.append((benefit_of(Xi, T[i], removed), removed))
            return out

        rows = parallel_map(run_team, list(range(k)), config.workers)
        for i, row in enumerate(rows):
            for q, (benefit, removed) in enumerate(row, start=1):
                values[i, q] = benefit
                sets[i][q] = members[i][removed].tolist()
    elif method == "cvx":
        cells = [(i, q) for i in range(k) for q in range(1, qmax[i] + 1)]

        def run_cell(cell: tuple[int, int]) -> tuple[float, list[int]]:
            i, q = cell
            return removal_benefit(
                X[members[i]], T[i], q, "cvx", tol=config.tol, max_iter=config.max_iter
            )

        for (i, q), (benefit, removed) in zip(cells, parallel_map(run_cell, cells, config.workers)):
            values[i, q] = benefit
            sets[i][q] = members[i][removed].tolist()
    else:
        raise ValidationError(f"unknown CIS method {method!r}")

    logger.debug("benefit matrix %dx%d built with %s", k, l + 1, method)
    return BenefitMatrix(values, sets)


def allocate_removals_dp(B: BenefitMatrix | ArrayLike, l: int) -> RemovalAllocation:
    """
    Лучший суммарный выигрыш при распределении ровно ℓ удалений.

    Таблица строится с хвоста: tail[i][j] = max_q B(i, q) + tail[i+1][j-q]
    по командам i..k-1. Восстановление идёт с первой команды, каждая берёт
    наименьший q, при котором оптимум ещё достижим.
    """
    vals = B.values if isinstance(B, BenefitMatrix) else np.asarray(B, dtype=np.float64)
    if vals.ndim != 2:
        raise ValidationError("benefit matrix must be two-dimensional")
    if l < 0:
        raise BudgetError(f"removal budget must be >= 0, got {l}")
    k = vals.shape[0]
    rows = [
        [float(vals[i, q]) if q < vals.shape[1] else -np.inf for q in range(l + 1)]
        for i in range(k)
    ]
    ninf = -np.inf
    tail = [[ninf] * (l + 1) for _ in range(k + 1)]
    tail[k][0] = 0.0
    for i in range(k - 1, -1, -1):
        row, after = rows[i], tail[i + 1]
        for j in range(l + 1):
            tail[i][j] = max(row[q] + after[j - q] for q in range(j + 1))
    total = tail[0][l]
    if total == ninf:
        raise InfeasibleError(f"teams are too small to remove {l} points without emptying one")

    per_team = [0] * k
    j = l
    for i in range(k):
        row, after = rows[i], tail[i + 1]
        per_team[i] = next(q for q in range(j + 1) if row[q] + after[j - q] == tail[i][j])
        j -= per_team[i]
    return RemovalAllocation(per_team, total)


def _remove_step(
    X: np.ndarray, T: np.ndarray, labels: np.ndarray, l: int, config: SolverConfig
) -> tuple[np.ndarray, RemovalAllocation]:
    k = T.shape[0]
    labels = labels.copy()
    if l == 0:
        return labels, RemovalAllocation([0] * k, 0.0)
    teams = [np.flatnonzero(labels == j) for j in range(k)]
    B = build_benefit_matrix(X, teams, T, l, config=config)
    alloc = allocate_removals_dp(B, l)
    for i, q in enumerate(alloc.per_team):
        labels[B.removal_sets[i][q]] = REMOVED
    return labels, alloc


def _refine(
    X: np.ndarray,
    T: np.ndarray,
    labels: np.ndarray,
    alloc: RemovalAllocation,
    l: int,
    config: SolverConfig,
) -> tuple[np.ndarray, RemovalAllocation, int]:
    best_labels, best_alloc = labels, alloc
    best_cost = float(team_costs(X, labels, T).sum())
    rounds = 0
    for _ in range(MAX_REFINE_ROUNDS):
        rounds += 1
        state = PartitionState.from_labels(X, best_labels, T.shape[0])
        for i in np.flatnonzero(best_labels == REMOVED):
            insert_point(state, X, int(i), T)
        state.resync(X)
        reassign_sweeps(state, X, T, max_sweeps=config.max_sweeps, epsilon=config.epsilon)
        new_labels, new_alloc = _remove_step(X, T, state.labels, l, config)
        cost = float(team_costs(X, new_labels, T).sum())
        logger.debug("refine round %d: cost %.12g (best %.12g)", rounds, cost, best_cost)
        if cost < best_cost - config.epsilon:
            best_labels, best_alloc, best_cost = new_labels, new_alloc, cost
        else:
            break
    return best_labels, best_alloc, rounds


def guided_split(
    pool: CandidatePool | ArrayLike,
    targets: TargetSet | ArrayLike,
    l: int,
    config: SolverConfig | None = None,
    seed: int = 0,
) -> SolveReport:
    config = config or SolverConfig()
    if not isinstance(pool, CandidatePool):
        pool = CandidatePool.from_rows(pool)
    if not isinstance(targets, TargetSet):
        targets = TargetSet(targets)
    targets.check_pool(pool)
    X, T = pool.X, targets.T
    n, k = pool.n, targets.k
    if l < 0:
        raise BudgetError(f"removal budget must be >= 0, got {l}")
    if l > n - k:
        raise InfeasibleError(f"cannot remove l={l} of n={n} points and keep {k} non-empty teams")

    extra: dict[str, Any] = {"cis_method": config.cis_method}
    with stopwatch() as elapsed:
        state = max_benefit(X, T, config)
        labels, alloc = _remove_step(X, T, state.labels, l, config)
        if config.iterate and l > 0:
            labels, alloc, rounds = _refine(X, T, labels, alloc, l, config)
            extra["refine_rounds"] = rounds
    extra["allocation"] = alloc.per_team
    extra["total_benefit"] = alloc.total_benefit
    extra["cost_before_removal"] = state.cost_history[-1]
    logger.info(
        "guided_split n=%d k=%d l=%d: %d sweeps, benefit %.6g",
        n,
        k,
        l,
        state.sweep_count,
        alloc.total_benefit,
    )
    return build_report(
        "guided_split",
        pool,
        Partitioning(labels, k),
        targets,
        iterations=state.sweep_count,
        wall_time=elapsed[0],
        seed=seed,
        extra=extra,
    )
