import numpy as np
import pytest

from gtpart.errors import BudgetError, NumericError, ValidationError
from gtpart.oracle import brute_cis, cis_value
from gtpart.solvers.cis import (
    cvx_select,
    greedy_remove,
    removal_benefit,
    round_solution,
    solve_relaxed_qp,
)

POOL = [1.0, 2.0, 3.0, 9.0]


def test_greedy_removes_outlier():
    assert greedy_remove(POOL, [2.0], 1) == [3]
    assert greedy_remove([0.0, 4.0], [0.0], 1) == [1]


def test_greedy_zero_budget():
    assert greedy_remove(POOL, [2.0], 0) == []


def test_greedy_removal_order():
    # сначала уходит самая дальняя точка, затем следующая
    assert greedy_remove([0.0, 10.0, 20.0], [0.0], 2) == [2, 1]


def test_budget_must_leave_a_point():
    with pytest.raises(BudgetError):
        greedy_remove(POOL, [2.0], 4)
    with pytest.raises(BudgetError):
        solve_relaxed_qp(POOL, [2.0], -1)


def test_relaxed_qp_zero_budget_is_all_ones():
    sol = solve_relaxed_qp(POOL, [2.0], 0)
    assert sol.x.tolist() == [1.0, 1.0, 1.0, 1.0]
    assert sol.objective == pytest.approx(3.0625)
    assert sol.converged


def test_relaxed_qp_reaches_zero():
    sol = solve_relaxed_qp(POOL, [2.0], 1)
    assert sol.objective <= 1e-6
    assert np.all(sol.x >= 0.0) and np.all(sol.x <= 1.0)
    assert sol.x.sum() >= 3 - 1e-8


def test_relaxed_qp_rejects_non_finite():
    with pytest.raises(NumericError):
        solve_relaxed_qp([1.0, np.nan, 3.0], [2.0], 1)


def test_relaxed_qp_rejects_bad_tolerance():
    with pytest.raises(ValidationError):
        solve_relaxed_qp(POOL, [2.0], 1, tol=0.0)


def test_relaxation_is_a_lower_bound():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(3, 13))
        d = int(rng.integers(1, 4))
        l = int(rng.integers(1, n))
        X = rng.normal(size=(n, d))
        t = rng.normal(size=d)
        sol = solve_relaxed_qp(X, t, l, max_iter=50000)
        # допустимость и согласованность objective
        assert np.all(sol.x >= 0.0) and np.all(sol.x <= 1.0)
        assert sol.x.sum() >= n - l - 1e-8
        r = X.T @ sol.x / (n - l) - t
        assert sol.objective == pytest.approx(float(r @ r), abs=1e-9)
        assert sol.objective <= brute_cis(X, t, l).optimum + 1e-6


def test_cvx_select_keeps_unique_optimum():
    assert cvx_select(POOL, [2.0], 1).tolist() == [0, 1, 2]
    assert cvx_select(POOL, [2.0], 0).tolist() == [0, 1, 2, 3]


def test_cvx_select_ties_pick_lowest_indices():
    X = np.tile([[0.5, 0.5]], (6, 1))
    assert cvx_select(X, [0.5, 0.5], 2).tolist() == [0, 1, 2, 3]


def test_round_solution_is_stable():
    x = np.array([0.2, 0.9, 0.9, 0.1, 0.9])
    assert round_solution(x, 2).tolist() == [1, 2]


@pytest.mark.parametrize("method", ["greedy", "cvx"])
def test_removal_benefit_example(method):
    benefit, removed = removal_benefit(POOL, [2.0], 1, method)
    assert benefit == pytest.approx(3.0625)
    assert removed == [3]


def test_removal_benefit_zero_q():
    assert removal_benefit(POOL, [2.0], 0) == (0.0, [])


def test_removal_cannot_help_a_perfect_team():
    benefit, _ = removal_benefit([1.0, 3.0], [2.0], 1, "greedy")
    assert benefit <= 0.0
    benefit, _ = removal_benefit([1.0, 2.0, 3.0], [2.0], 2, "cvx")
    assert benefit <= 0.0


def test_removal_benefit_unknown_method():
    with pytest.raises(ValidationError):
        removal_benefit(POOL, [2.0], 1, "simplex")


def test_greedy_first_step_matches_scan():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n = int(rng.integers(3, 13))
        X = rng.normal(size=(n, 2))
        t = rng.normal(size=2)
        scan = [cis_value(X, t, [i]) for i in range(n)]
        assert greedy_remove(X, t, 1)[0] == int(np.argmin(scan))


def test_cvx_select_size():
    rng = np.random.default_rng(2)
    for _ in range(30):
        n = int(rng.integers(2, 15))
        l = int(rng.integers(0, n))
        kept = cvx_select(rng.normal(size=(n, 3)), rng.normal(size=3), l)
        assert kept.size == n - l
        assert np.all(np.diff(kept) > 0)
