import numpy as np
import pytest

from gtpart.core import REMOVED, CandidatePool, Partitioning, TargetSet, partition_cost
from gtpart.errors import BudgetError, SizeGuardError, ValidationError
from gtpart.oracle import (
    brute_cis,
    brute_cp,
    brute_gtp,
    cis_value,
    has_subset_sum,
    subset_sum_to_cis,
)

POOL = [1.0, 2.0, 3.0, 9.0]


def test_brute_cis_examples():
    res = brute_cis(POOL, [2.0], 1)
    assert res.optimum == 0.0
    assert res.witness == [3]
    assert res.enumerated == 4

    res = brute_cis(POOL, [2.0], 0)
    assert res.optimum == pytest.approx(3.0625)
    assert res.witness == []

    res = brute_cis(np.full((5, 2), 0.3), [0.3, 0.3], 3)
    assert res.optimum == 0.0


def test_brute_cis_guards():
    with pytest.raises(BudgetError):
        brute_cis(POOL, [2.0], 4)
    with pytest.raises(SizeGuardError):
        brute_cis(np.zeros((30, 1)), [0.0], 15)


def test_brute_cp_counter_example():
    pool = CandidatePool(("a", "b", "c"), np.array([[1.0, 0.0], [-1.0, 0.0], [-1.0, 20.0]]))
    targets = TargetSet(np.array([[0.0, 0.0], [-1.0, 10.0]]))
    res = brute_cp(pool, targets)
    assert res.optimum == pytest.approx(1.0, abs=1e-12)
    assert res.witness == [0, 1, 1]
    assert res.optimum_nonempty == res.optimum
    assert res.enumerated == 8


def test_brute_cp_single_team_and_exact_fit():
    X = np.array([[0.0, 1.0], [2.0, 5.0], [1.0, 0.0]])
    res = brute_cp(X, [[1.0, 2.0]])
    assert res.optimum == 0.0
    assert res.witness == [0, 0, 0]

    X = np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 5.0], [5.0, 5.0]])
    res = brute_cp(X, X[[3, 1, 0, 2]])
    assert res.optimum == 0.0
    assert res.witness == [2, 1, 3, 0]


def test_brute_cp_empty_team_allowed_only_in_optimum():
    # обе цели в нуле: выгоднее оставить одну команду пустой
    X = np.array([[1.0], [-1.0], [3.0]])
    res = brute_cp(X, [[0.0], [0.0]])
    assert res.optimum == pytest.approx(1.0)
    assert res.optimum_nonempty > res.optimum
    assert res.witness_nonempty is not None
    assert set(res.witness_nonempty) == {0, 1}


def test_brute_cp_guard():
    with pytest.raises(SizeGuardError):
        brute_cp(np.zeros((25, 1)), [[0.0], [1.0]])


def test_brute_gtp_zero_budget_equals_cp():
    rng = np.random.default_rng(0)
    for _ in range(10):
        X = rng.normal(size=(6, 2))
        T = rng.normal(size=(2, 2))
        gtp, cp = brute_gtp(X, T, 0), brute_cp(X, T)
        assert gtp.optimum == cp.optimum
        assert gtp.optimum_nonempty == cp.optimum_nonempty


def test_brute_gtp_removes_far_point():
    X = np.array([[0.0], [0.1], [-0.1], [100.0]])
    res = brute_gtp(X, [[0.0]], 1)
    assert res.optimum == pytest.approx(0.0, abs=1e-12)
    assert res.witness == [0, 0, 0, REMOVED]


def test_brute_gtp_witness_recomputes_exactly():
    rng = np.random.default_rng(1)
    for _ in range(10):
        X = rng.normal(size=(6, 2))
        T = rng.normal(size=(2, 2))
        res = brute_gtp(X, T, 2)
        pool, targets = CandidatePool.from_rows(X), TargetSet(T)
        part = Partitioning(res.witness_nonempty, 2)
        assert partition_cost(pool, part, targets) == res.optimum_nonempty
        assert (np.asarray(res.witness_nonempty) == REMOVED).sum() == 2
        assert res.optimum <= res.optimum_nonempty


def test_brute_gtp_guards():
    with pytest.raises(BudgetError):
        brute_gtp(np.zeros((3, 1)), [[0.0]], 3)
    with pytest.raises(SizeGuardError):
        brute_gtp(np.zeros((20, 1)), [[0.0], [1.0]], 5)


def test_subset_sum_reduction_examples():
    inst = subset_sum_to_cis([3, 1, 4, 2], 2, 7)
    assert inst.l == 2
    assert inst.points.shape == (4, 1)
    assert inst.target.tolist() == [3.5]
    assert brute_cis(inst.points, inst.target, inst.l).optimum == 0.0

    inst = subset_sum_to_cis([2, 4, 6], 2, 5)
    assert brute_cis(inst.points, inst.target, inst.l).optimum > 0.0


def test_subset_sum_reduction_agrees_with_enumeration():
    rng = np.random.default_rng(2)
    for _ in range(50):
        n = int(rng.integers(2, 9))
        U = rng.integers(0, 20, size=n).tolist()
        j = int(rng.integers(1, n + 1))
        J = int(rng.integers(0, 20 * j + 1))
        inst = subset_sum_to_cis(U, j, J)
        res = brute_cis(inst.points, inst.target, inst.l)
        assert (res.optimum == 0.0) == has_subset_sum(U, j, J)
        assert cis_value(inst.points, inst.target, res.witness) == res.optimum


def test_subset_sum_bad_size():
    with pytest.raises(ValidationError):
        subset_sum_to_cis([1, 2], 0, 1)
    with pytest.raises(ValidationError):
        subset_sum_to_cis([1, 2], 3, 1)
