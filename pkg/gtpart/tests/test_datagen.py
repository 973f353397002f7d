import numpy as np
import pytest
from scipy.stats import qmc

from gtpart.core import CandidatePool
from gtpart.datagen import (
    NOISE,
    SynthConfig,
    gen_synthetic,
    noise_recall,
    targets_mean,
    targets_sample,
    targets_sobol,
)
from gtpart.errors import ValidationError


def test_targets_mean_repeats_pool_mean():
    X = np.array([[0.0, 2.0], [2.0, 4.0], [4.0, 0.0]])
    T = targets_mean(X, 3).T
    assert T.tolist() == [[2.0, 2.0]] * 3


def test_targets_sample_draws_distinct_pool_rows():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(6, 2))
    T = targets_sample(X, 6, seed=3).T
    # при k = n выборка совпадает с перестановкой пула
    assert sorted(map(tuple, T.tolist())) == sorted(map(tuple, X.tolist()))
    again = targets_sample(CandidatePool.from_rows(X), 4, seed=3).T
    assert np.array_equal(again, targets_sample(X, 4, seed=3).T)
    rows = {tuple(r) for r in X.tolist()}
    assert all(tuple(r) in rows for r in again.tolist())


def test_targets_sample_too_many():
    with pytest.raises(ValidationError):
        targets_sample(np.zeros((3, 2)), 4, seed=0)


def test_sobol_first_points():
    assert targets_sobol(3, 1).T[:, 0].tolist() == [0.5, 0.75, 0.25]
    assert targets_sobol(2, 1, skip=0).T[:, 0].tolist() == [0.0, 0.5]


def test_sobol_points_in_unit_cube():
    T = targets_sobol(100, 5).T
    assert T.shape == (100, 5)
    assert ((T >= 0.0) & (T < 1.0)).all()


def test_sobol_more_uniform_than_random():
    sobol = qmc.discrepancy(targets_sobol(256, 2).T)
    random = [qmc.discrepancy(np.random.default_rng(s).random((256, 2))) for s in range(25)]
    assert sobol < float(np.median(random))


def test_sobol_bad_arguments():
    with pytest.raises(ValidationError):
        targets_sobol(0, 2)
    with pytest.raises(ValidationError):
        targets_sobol(4, 0)
    with pytest.raises(ValidationError):
        targets_sobol(4, 2, skip=-1)


def test_synthetic_zero_sigma_puts_points_on_targets():
    inst = gen_synthetic(SynthConfig(k=3, m=4, l=2, d=2, sigma=0.0, seed=1))
    X, T = inst.pool.X, inst.targets.T
    for i, lab in enumerate(inst.labels.tolist()):
        if lab != NOISE:
            assert X[i].tolist() == T[lab].tolist()


def test_synthetic_counts_and_seed():
    cfg = SynthConfig(k=4, m=50, l=20, d=8, sigma=0.05, seed=7)
    inst = gen_synthetic(cfg)
    assert inst.pool.n == cfg.n == 220
    assert inst.targets.k == 4 and inst.pool.d == 8
    assert np.bincount(inst.labels[inst.labels != NOISE]).tolist() == [50] * 4
    assert len(inst.noise_ids()) == 20
    again = gen_synthetic(cfg)
    assert np.array_equal(again.pool.X, inst.pool.X)
    assert np.array_equal(again.labels, inst.labels)


def test_synthetic_planted_teams_concentrate():
    sigma, m = 0.05, 200
    inst = gen_synthetic(SynthConfig(k=3, m=m, l=10, d=4, sigma=sigma, seed=2))
    for j in range(3):
        members = inst.pool.X[inst.labels == j]
        err = np.abs(members.mean(axis=0) - inst.targets.T[j])
        assert (err < 5 * sigma / np.sqrt(m)).all()
        assert members.std(axis=0) == pytest.approx(np.full(4, sigma), rel=0.2)


def test_synth_config_validation():
    with pytest.raises(ValidationError):
        SynthConfig(k=0, m=1, l=0, d=1, sigma=0.1)
    with pytest.raises(ValidationError):
        SynthConfig(k=1, m=1, l=-1, d=1, sigma=0.1)
    with pytest.raises(ValidationError):
        SynthConfig(k=1, m=1, l=0, d=1, sigma=-0.1)


def test_noise_recall():
    inst = gen_synthetic(SynthConfig(k=2, m=5, l=4, d=2, sigma=0.1, seed=3))
    noise = sorted(inst.noise_ids())
    kept = [cid for cid in inst.pool.ids if cid not in inst.noise_ids()]
    assert noise_recall(noise, inst) == 1.0
    assert noise_recall(noise[:2] + kept[:2], inst) == 0.5
    assert noise_recall([], inst) == 0.0
