"""
Точные переборные решатели для маленьких экземпляров (CIS, CP, GTP) и
сведение Subset-Sum -> CIS. Используются тестами как эталон.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .core import REMOVED, CandidatePool, TargetSet, mean, squared_l2, team_costs, unpack
from .errors import BudgetError, SizeGuardError, ValidationError
from .solvers.cis import _prepare

logger = logging.getLogger("gtpart.oracle")

CIS_LIMIT = 10**6
ASSIGN_LIMIT = 10**7
CHUNK = 1 << 15


@dataclass(frozen=True)
class OracleResult:
    """
    Для CIS witness содержит удаляемые индексы, для CP/GTP метки
    (0..k-1 или REMOVED). optimum допускает пустые команды (нулевой центр),
    optimum_nonempty учитывает только разбиения, где все k команд непусты.
    """

    optimum: float
    witness: list[int]
    enumerated: int
    optimum_nonempty: float | None = None
    witness_nonempty: list[int] | None = None


@dataclass(frozen=True)
class CisInstance:
    points: np.ndarray
    target: np.ndarray
    l: int


def cis_value(X: np.ndarray, t: np.ndarray, removed: list[int]) -> float:
    keep = np.ones(X.shape[0], dtype=bool)
    keep[list(removed)] = False
    return squared_l2(mean(X[keep], d=X.shape[1]), t)


def brute_cis(points: ArrayLike, target: ArrayLike, l: int) -> OracleResult:
    X, t = _prepare(points, target)
    n = X.shape[0]
    if l < 0 or l >= n:
        raise BudgetError(f"removal budget must satisfy 0 <= l < n, got l={l}, n={n}")
    total = math.comb(n, l)
    if total > CIS_LIMIT:
        raise SizeGuardError(f"C({n}, {l}) = {total} exceeds the oracle limit {CIS_LIMIT}")
    best, witness = math.inf, ()
    for removed in itertools.combinations(range(n), l):
        v = cis_value(X, t, list(removed))
        if v < best:
            best, witness = v, removed
    return OracleResult(best, list(witness), total)


def _best_assignment(
    X: np.ndarray, T: np.ndarray
) -> tuple[np.ndarray | None, np.ndarray | None, int]:
    """Перебор всех k^n назначений порциями; возвращает лучшие метки (все / непустые)."""
    n, k = X.shape[0], T.shape[0]
    best = best_ne = math.inf
    lab_best = lab_ne = None
    count = 0
    it = itertools.product(range(k), repeat=n)
    team_ids = np.arange(k)
    while True:
        chunk = np.array(list(itertools.islice(it, CHUNK)), dtype=np.intp).reshape(-1, n)
        if chunk.shape[0] == 0:
            break
        count += chunk.shape[0]
        onehot = (chunk[:, :, None] == team_ids).astype(np.float64)
        counts = onehot.sum(axis=1)
        sums = np.einsum("aik,id->akd", onehot, X)
        denom = counts[:, :, None]
        cent = np.divide(sums, denom, out=np.zeros_like(sums), where=denom > 0)
        costs = ((cent - T) ** 2).sum(axis=(1, 2))
        a = int(np.argmin(costs))
        if costs[a] < best:
            best, lab_best = costs[a], chunk[a].copy()
        nonempty = (counts > 0).all(axis=1)
        if nonempty.any():
            masked = np.where(nonempty, costs, np.inf)
            b = int(np.argmin(masked))
            if masked[b] < best_ne:
                best_ne, lab_ne = masked[b], chunk[b].copy()
    return lab_best, lab_ne, count


def _exact(X: np.ndarray, T: np.ndarray, labels: np.ndarray | None) -> float | None:
    if labels is None:
        return None
    return float(team_costs(X, labels, T).sum())


def brute_cp(pool: CandidatePool | ArrayLike, targets: TargetSet | ArrayLike) -> OracleResult:
    X, T = unpack(pool, targets)
    n, k = X.shape[0], T.shape[0]
    if k**n > ASSIGN_LIMIT:
        raise SizeGuardError(f"k^n = {k}^{n} exceeds the oracle limit {ASSIGN_LIMIT}")
    lab, lab_ne, count = _best_assignment(X, T)
    return OracleResult(
        optimum=_exact(X, T, lab),
        witness=lab.tolist(),
        enumerated=count,
        optimum_nonempty=_exact(X, T, lab_ne),
        witness_nonempty=None if lab_ne is None else lab_ne.tolist(),
    )


def brute_gtp(
    pool: CandidatePool | ArrayLike, targets: TargetSet | ArrayLike, l: int
) -> OracleResult:
    X, T = unpack(pool, targets)
    n, k = X.shape[0], T.shape[0]
    if l < 0 or l >= n:
        raise BudgetError(f"removal budget must satisfy 0 <= l < n, got l={l}, n={n}")
    size = math.comb(n, l) * k ** (n - l)
    if size > ASSIGN_LIMIT:
        raise SizeGuardError(f"C(n,l)*k^(n-l) = {size} exceeds the oracle limit {ASSIGN_LIMIT}")
    best = best_ne = math.inf
    wit: list[int] | None = None
    wit_ne: list[int] | None = None
    count = 0
    for removed in itertools.combinations(range(n), l):
        kept = np.setdiff1d(np.arange(n), removed)
        lab, lab_ne, c = _best_assignment(X[kept], T)
        count += c
        for sub, is_ne in ((lab, False), (lab_ne, True)):
            if sub is None:
                continue
            full = np.full(n, REMOVED, dtype=np.intp)
            full[kept] = sub
            v = float(team_costs(X, full, T).sum())
            if is_ne and v < best_ne:
                best_ne, wit_ne = v, full.tolist()
            if not is_ne and v < best:
                best, wit = v, full.tolist()
    logger.debug("brute_gtp n=%d k=%d l=%d enumerated %d", n, k, l, count)
    return OracleResult(
        optimum=best,
        witness=wit or [],
        enumerated=count,
        optimum_nonempty=None if wit_ne is None else best_ne,
        witness_nonempty=wit_ne,
    )


# -------------------- Subset-Sum reduction --------------------


def subset_sum_to_cis(U: list[int], j: int, J: int) -> CisInstance:
    """Есть ли j элементов U с суммой J  <=>  brute_cis на полученном экземпляре даёт 0."""
    n = len(U)
    if not 1 <= j <= n:
        raise ValidationError(f"need 1 <= j <= n, got j={j}, n={n}")
    l = n - j
    return CisInstance(
        points=np.asarray(U, dtype=np.float64).reshape(-1, 1),
        target=np.array([J / (n - l)]),
        l=l,
    )


def has_subset_sum(U: list[int], j: int, J: int) -> bool:
    return any(sum(c) == J for c in itertools.combinations(U, j))
