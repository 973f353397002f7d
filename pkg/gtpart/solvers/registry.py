"""Имя алгоритма -> решатель. Используется CLI и стендом экспериментов."""

from __future__ import annotations

from collections.abc import Callable

from ..config import SolverConfig
from ..core import CandidatePool, Partitioning, SolveReport, TargetSet, build_report
from ..errors import UnknownAlgorithmError
from ..utils import stopwatch
from . import baselines
from .guided_split import guided_split
from .partition import closest_target_partition

# (pool, targets, l, seed, config) -> (partitioning, iterations)
Runner = Callable[[CandidatePool, TargetSet, int, int, SolverConfig], tuple[Partitioning, int]]


def _random(pool, targets, l, seed, config):
    return baselines.random_partition(pool, targets, l, seed, config), 0


def _kmeans(pool, targets, l, seed, config):
    res = baselines.kmeans_partition(pool, targets.k, seed, "plain")
    return baselines.post_pipeline(res.partitioning(), pool, targets, l, config), res.iterations


def _kmeans_targets(pool, targets, l, seed, config):
    res = baselines.kmeans_partition(pool, targets.k, seed, "target_seeded", targets)
    return baselines.post_pipeline(res.partitioning(), pool, targets, l, config), res.iterations


def _kmeans_mm(pool, targets, l, seed, config):
    # выбросы уже удалены, остаётся только сопоставление с целями
    res = baselines.kmeans_minus_minus(pool, targets.k, l, seed)
    return baselines.post_pipeline(res.partitioning(), pool, targets, 0, config), res.iterations


def _knn_kmeans(pool, targets, l, seed, config):
    res = baselines.knn_then_kmeans(pool, targets.k, l, seed)
    return baselines.post_pipeline(res.partitioning(), pool, targets, 0, config), res.iterations


def _btf_cvx(pool, targets, l, seed, config):
    return baselines.btf(pool, targets, l, "cvx", config), 0


def _btf_greedy(pool, targets, l, seed, config):
    return baselines.btf(pool, targets, l, "greedy", config), 0


def _closest_target(pool, targets, l, seed, config):
    part = closest_target_partition(pool, targets)
    return baselines.post_pipeline(part, pool, targets, l, config), 0


BASELINES: dict[str, Runner] = {
    "random": _random,
    "kmeans": _kmeans,
    "kmeans_targets": _kmeans_targets,
    "kmeans_mm": _kmeans_mm,
    "knn_kmeans": _knn_kmeans,
    "btf_cvx": _btf_cvx,
    "btf_greedy": _btf_greedy,
    "closest_target": _closest_target,
}

ALGORITHMS: tuple[str, ...] = ("guided_split", *BASELINES)


def check_algorithm(name: str) -> str:
    if name not in ALGORITHMS:
        raise UnknownAlgorithmError(name, list(ALGORITHMS))
    return name


def solve(
    name: str,
    pool: CandidatePool,
    targets: TargetSet,
    l: int,
    seed: int = 0,
    config: SolverConfig | None = None,
) -> SolveReport:
    check_algorithm(name)
    config = config or SolverConfig()
    targets.check_pool(pool)
    if name == "guided_split":
        return guided_split(pool, targets, l, config, seed=seed)
    with stopwatch() as elapsed:
        part, iterations = BASELINES[name](pool, targets, l, seed, config)
    return build_report(
        name, pool, part, targets, iterations=iterations, wall_time=elapsed[0], seed=seed
    )
