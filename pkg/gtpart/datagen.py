"""
Генераторы целевых векторов (Mean / Sampling / Random-Sobol) и синтетических
наборов с «посаженными» командами и шумом.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy.stats import qmc

from .core import CandidatePool, TargetSet, mean
from .errors import ValidationError

logger = logging.getLogger("gtpart.datagen")

NOISE = -1
SOBOL_MAX_DIM = int(getattr(qmc.Sobol, "MAXDIM", 21201))


@dataclass(frozen=True)
class SynthConfig:
    k: int
    m: int
    l: int
    d: int
    sigma: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1 or self.m < 1 or self.d < 1:
            raise ValidationError("k, m and d must be >= 1")
        if self.l < 0:
            raise ValidationError("l must be >= 0")
        if self.sigma < 0:
            raise ValidationError("sigma must be >= 0")

    @property
    def n(self) -> int:
        return self.k * self.m + self.l


@dataclass(frozen=True)
class SynthInstance:
    pool: CandidatePool
    targets: TargetSet
    labels: np.ndarray  # номер посаженной команды или NOISE

    def noise_ids(self) -> set[str]:
        return {self.pool.ids[i] for i in np.flatnonzero(self.labels == NOISE)}


def _rows(pool: CandidatePool | ArrayLike) -> np.ndarray:
    return pool.X if isinstance(pool, CandidatePool) else CandidatePool.from_rows(pool).X


def targets_mean(pool: CandidatePool | ArrayLike, k: int) -> TargetSet:
    X = _rows(pool)
    if k < 1:
        raise ValidationError("k must be >= 1")
    return TargetSet(np.tile(mean(X), (k, 1)))


def targets_sample(pool: CandidatePool | ArrayLike, k: int, seed: int) -> TargetSet:
    X = _rows(pool)
    if k < 1 or k > X.shape[0]:
        raise ValidationError(f"cannot sample {k} distinct rows from {X.shape[0]}")
    rng = np.random.default_rng(seed)
    return TargetSet(X[rng.choice(X.shape[0], size=k, replace=False)])


def targets_sobol(k: int, d: int, skip: int = 1) -> TargetSet:
    """Первые k точек нескрэмблированной последовательности Соболя после пропуска `skip`."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    if d < 1 or d > SOBOL_MAX_DIM:
        raise ValidationError(f"Sobol sequence supports 1 <= d <= {SOBOL_MAX_DIM}, got {d}")
    if skip < 0:
        raise ValidationError("skip must be >= 0")
    engine = qmc.Sobol(d=d, scramble=False)
    if skip:
        engine.fast_forward(skip)
    with warnings.catch_warnings():
        # scipy предупреждает, если k не степень двойки
        warnings.simplefilter("ignore", UserWarning)
        pts = engine.random(k)
    return TargetSet(pts)


def gen_synthetic(config: SynthConfig) -> SynthInstance:
    """
    Цели ~ U[0,1]^d, по m точек ~ N(t_i, sigma^2) на цель, плюс l точек шума ~ U[0,1]^d.
    Порядок точек перемешивается; значения не обрезаются по [0,1].
    """
    rng = np.random.default_rng(config.seed)
    T = rng.random((config.k, config.d))
    planted = [rng.normal(T[i], config.sigma, size=(config.m, config.d)) for i in range(config.k)]
    noise = rng.random((config.l, config.d))
    X = np.vstack([*planted, noise])
    labels = np.concatenate(
        [np.repeat(np.arange(config.k), config.m), np.full(config.l, NOISE)]
    ).astype(np.intp)
    order = rng.permutation(X.shape[0])
    X, labels = X[order], labels[order]
    logger.debug(
        "synthetic instance n=%d k=%d d=%d sigma=%g", X.shape[0], config.k, config.d, config.sigma
    )
    return SynthInstance(CandidatePool.from_rows(X), TargetSet(T), labels)


def noise_recall(removed_ids: list[str], instance: SynthInstance) -> float:
    """Доля удалённых id, которые на самом деле шум."""
    if not removed_ids:
        return 0.0
    noise = instance.noise_ids()
    return sum(1 for cid in removed_ids if cid in noise) / len(removed_ids)
