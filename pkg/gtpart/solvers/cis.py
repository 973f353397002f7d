"""
Выбор ℓ точек на удаление так, чтобы среднее оставшихся было ближе к цели.

Два решателя: жадный (по одной точке за шаг) и релаксация в выпуклую QP
с последующим округлением (оставляем n−ℓ наибольших x_i).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from ..core import as_matrix, as_vector, mean, squared_l2
from ..errors import BudgetError, DimensionError, NumericError, ValidationError

logger = logging.getLogger("gtpart.cis")

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 5000
POWER_STEPS = 50


@dataclass(frozen=True)
class RelaxedSolution:
    x: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int
    converged: bool


def _prepare(points: ArrayLike, target: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    t = as_vector(target)
    X = as_matrix(points, d=t.shape[0])
    if X.shape[1] != t.shape[0]:
        raise DimensionError(f"points have dimension {X.shape[1]}, target has {t.shape[0]}")
    return X, t


def _check_budget(n: int, l: int) -> None:
    if l < 0 or l >= n:
        raise BudgetError(f"removal budget must satisfy 0 <= l < n, got l={l}, n={n}")


def greedy_remove(points: ArrayLike, target: ArrayLike, l: int) -> list[int]:
    """Индексы ℓ удалённых точек в порядке удаления."""
    X, t = _prepare(points, target)
    n = X.shape[0]
    _check_budget(n, l)
    alive = np.ones(n, dtype=bool)
    removed: list[int] = []
    for step in range(l):
        rest = n - step - 1
        S = X[alive].sum(axis=0)
        diff = (S - X) / rest - t
        dist = np.einsum("ij,ij->i", diff, diff)
        dist[~alive] = np.inf
        r = int(np.argmin(dist))  # первый минимум = наименьший индекс
        alive[r] = False
        removed.append(r)
    return removed


# -------------------- relaxed QP --------------------


def _project(y: np.ndarray, m: int) -> np.ndarray:
    """
    Проекция на {0 <= x <= 1, sum(x) >= m}: клип, а если сумма мала,
    сдвиг clip(y + λ, 0, 1) с λ > 0. g(λ) = sum(clip(y + λ, 0, 1)) кусочно-линейна,
    λ находится по изломам -y_i и 1 - y_i.
    """
    x = np.clip(y, 0.0, 1.0)
    if x.sum() >= m:
        return x
    knots = np.concatenate([-y, 1.0 - y])
    delta = np.concatenate([np.ones_like(y), -np.ones_like(y)])
    order = np.argsort(knots, kind="stable")
    knots, delta = knots[order], delta[order]
    slope = np.cumsum(delta)  # наклон g правее каждого излома
    g = np.concatenate([[0.0], np.cumsum(slope[:-1] * np.diff(knots))])
    j = min(int(np.searchsorted(g, m)), g.size - 1)
    lam = knots[j - 1] + (m - g[j - 1]) / slope[j - 1]
    return np.clip(y + max(lam, 0.0), 0.0, 1.0)


def _lipschitz(A: np.ndarray, m: int) -> float:
    n = A.shape[1]
    v = np.full(n, 1.0 / math.sqrt(n))
    sigma2 = 0.0
    for _ in range(POWER_STEPS):
        w = A.T @ (A @ v)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        sigma2 = float(np.dot(A @ v, A @ v))
    return 2.0 * sigma2 / (m * m)


def solve_relaxed_qp(
    points: ArrayLike,
    target: ArrayLike,
    l: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RelaxedSolution:
    """
    min ||R·x/(n−ℓ) − t||²  при  0 <= x <= 1,  sum(x) >= n−ℓ.

    Ускоренный проективный градиент (шаг 1/L, перезапуск импульса при росте
    целевой функции, удвоение L если шаг без импульса не уменьшает её).
    Старт из x = 1, поэтому objective никогда не хуже D(mean(R), t).
    """
    X, t = _prepare(points, target)
    n = X.shape[0]
    _check_budget(n, l)
    if tol <= 0:
        raise ValidationError("tol must be > 0")
    if not (np.isfinite(X).all() and np.isfinite(t).all()):
        raise NumericError("non-finite values in CIS input")

    m = n - l
    A = X.T

    def objective(x: np.ndarray) -> float:
        r = A @ x / m - t
        return float(np.dot(r, r))

    def grad(x: np.ndarray) -> np.ndarray:
        return (2.0 / m) * (A.T @ (A @ x / m - t))

    x = np.ones(n)
    fx = objective(x)
    if l == 0:
        return RelaxedSolution(x, fx, 0.0, 0, True)

    L0 = _lipschitz(A, m)
    if L0 <= 0.0 or not math.isfinite(L0):
        L0 = 1.0

    def residual(z: np.ndarray) -> float:
        return L0 * float(np.linalg.norm(z - _project(z - grad(z) / L0, m)))

    L = L0
    y = x.copy()
    theta = 1.0
    momentum = False
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        y_step = _project(y - grad(y) / L, m)
        f_new = objective(y_step)
        if f_new > fx:
            if momentum:
                y, theta, momentum = x, 1.0, False
                continue
            if residual(x) <= tol:
                converged = True
                break
            L *= 2.0
            continue
        step = L * float(np.linalg.norm(y_step - y))
        theta_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))
        beta = (theta - 1.0) / theta_new
        y = y_step + beta * (y_step - x)
        momentum = beta > 0.0
        x, fx, theta = y_step, f_new, theta_new
        if step <= tol:
            if residual(x) <= tol:
                converged = True
                break
            y, theta, momentum = x, 1.0, False

    kkt = residual(x)
    if not converged:
        logger.debug("relaxed QP hit max_iter=%d (n=%d, l=%d, residual=%.3e)", max_iter, n, l, kkt)
    else:
        logger.debug("relaxed QP converged in %d iterations (n=%d, l=%d)", it, n, l)
    return RelaxedSolution(x, fx, kkt, it, converged)


def round_solution(x: np.ndarray, keep: int) -> np.ndarray:
    """n−ℓ наибольших x_i, при равенстве меньший индекс. Возвращает индексы по возрастанию."""
    order = np.argsort(-x, kind="stable")
    return np.sort(order[:keep])


def cvx_select(
    points: ArrayLike,
    target: ArrayLike,
    l: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> np.ndarray:
    """Индексы n−ℓ оставленных точек."""
    sol = solve_relaxed_qp(points, target, l, tol=tol, max_iter=max_iter)
    return round_solution(sol.x, sol.x.shape[0] - l)


def removal_benefit(
    team: ArrayLike,
    target: ArrayLike,
    q: int,
    method: str = "cvx",
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[float, list[int]]:
    """
    Выигрыш D(mean(C), t) − D(mean(C \\ S_q), t) и сами удалённые индексы S_q.
    """
    X, t = _prepare(team, target)
    n = X.shape[0]
    if q < 0 or q >= n:
        raise BudgetError(f"cannot remove q={q} points from a team of {n}")
    if q == 0:
        return 0.0, []
    if method == "greedy":
        removed = sorted(greedy_remove(X, t, q))
    elif method == "cvx":
        kept = cvx_select(X, t, q, tol=tol, max_iter=max_iter)
        removed = sorted(set(range(n)) - set(kept.tolist()))
    else:
        raise ValidationError(f"unknown CIS method {method!r}")
    return benefit_of(X, t, removed), removed


def benefit_of(X: np.ndarray, t: np.ndarray, removed: list[int]) -> float:
    keep = np.ones(X.shape[0], dtype=bool)
    keep[removed] = False
    d = X.shape[1]
    return squared_l2(mean(X, d=d), t) - squared_l2(mean(X[keep], d=d), t)
