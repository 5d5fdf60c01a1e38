import numpy as np
import pytest

from infpush.core import Dataset, SolverConfig
from infpush.experiments import (bench, loglog_slope, n_jobs_from_env, score,
                                 stratified_split, toy_experiment, toy_trial, tune_lambda)

FAST = SolverConfig(outer_max_iter=200)


def separable(rng, m=10, n=10, d=3):
    pos = rng.normal(size=(m, d)) * 0.3 + np.r_[2.0, np.zeros(d - 1)]
    neg = rng.normal(size=(n, d)) * 0.3 - np.r_[2.0, np.zeros(d - 1)]
    return Dataset(pos, neg)


def test_split_is_stratified_and_deterministic(rng):
    data = separable(rng, 10, 7)
    a_fit, a_val = stratified_split(data, 0.7, seed=3)
    b_fit, b_val = stratified_split(data, 0.7, seed=3)
    assert (a_fit.m, a_val.m, a_fit.n, a_val.n) == (7, 3, 5, 2)
    np.testing.assert_array_equal(a_val.positives, b_val.positives)
    rows = {tuple(r) for r in np.vstack([a_fit.positives, a_val.positives])}
    assert rows == {tuple(r) for r in data.positives}


def test_split_keeps_both_classes_in_both_parts():
    data = Dataset([[1.0], [2.0]], [[0.0], [-1.0], [-2.0]])
    fit_part, val_part = stratified_split(data, 0.9, seed=0)
    assert fit_part.m == 1 and val_part.m == 1 and val_part.n >= 1
    with pytest.raises(ValueError):
        stratified_split(Dataset([[1.0]], [[0.0], [1.0]]), 0.7, 0)
    with pytest.raises(ValueError):
        stratified_split(data, 1.0, 0)


def test_score_metrics():
    data = Dataset([[2.0], [1.0]], [[1.5], [0.5]])
    assert score([1.0], data) == 0.5
    assert score([1.0], data, "neg_infpush_loss") == -1.0
    with pytest.raises(ValueError):
        score([1.0], data, "auc")


def test_single_element_grid_wins(rng):
    res = tune_lambda(separable(rng), [0.3], "l2", cfg=FAST)
    assert res.best_lambda == 0.3 and res.model is not None


def test_underfitting_lambda_loses(rng):
    # a huge l1 penalty zeroes the weights, so every score ties at zero
    res = tune_lambda(separable(rng), [0.05, 1e3], "l1", cfg=FAST)
    assert res.scores == [1.0, 0.0]
    assert res.best_lambda == 0.05


def test_ties_go_to_larger_lambda(rng):
    res = tune_lambda(separable(rng), [0.01, 0.1, 0.5], "l2", cfg=FAST)
    assert res.scores == [1.0, 1.0, 1.0]
    assert res.best_lambda == 0.5


def test_tune_deterministic_and_parallel_consistent(rng):
    data = separable(rng, 12, 12, 4)
    a = tune_lambda(data, [0.01, 0.1, 1.0], "l1", seed=4, cfg=FAST, n_jobs=1)
    b = tune_lambda(data, [0.01, 0.1, 1.0], "l1", seed=4, cfg=FAST, n_jobs=2)
    assert a.scores == b.scores and a.best_lambda == b.best_lambda
    np.testing.assert_array_equal(a.model.weights, b.model.weights)


@pytest.mark.parametrize("grid", [[], [0.1, 0.0], [-1.0]])
def test_bad_grid(rng, grid):
    with pytest.raises(ValueError):
        tune_lambda(separable(rng), grid, "l1")


def test_bad_metric(rng):
    with pytest.raises(ValueError):
        tune_lambda(separable(rng), [1.0], "l1", metric="auc")


def test_env_threads(monkeypatch):
    monkeypatch.delenv("INFPUSH_THREADS", raising=False)
    assert n_jobs_from_env() == 1
    monkeypatch.setenv("INFPUSH_THREADS", "3")
    assert n_jobs_from_env() == 3
    monkeypatch.setenv("INFPUSH_THREADS", "0")
    assert n_jobs_from_env() >= 1
    monkeypatch.setenv("INFPUSH_THREADS", "-2")
    with pytest.raises(ValueError):
        n_jobs_from_env()


def test_loglog_slope_exact_power():
    x = np.array([400, 1600, 6400, 25600])
    assert loglog_slope(x, 3e-5 * x ** 1.25) == pytest.approx(1.25)
    assert np.isnan(loglog_slope([1], [1]))


def test_bench_shape():
    rows, slope = bench([40, 80, 160], d=6, r=2, trials=3, cfg=SolverConfig(outer_max_iter=5))
    assert [r.pairs for r in rows] == [400, 1600, 6400]
    assert all(len(r.times) == 3 for r in rows)
    assert np.isfinite(slope)


def test_toy_trial_and_experiment():
    res = toy_trial(8, 3, 0, "l1", n_train=30, n_test=100, grid=(0.1, 1.0), cfg=FAST)
    assert 0 <= res.pos_at_top <= 1 and 0 <= res.f_measure <= 1
    assert res.best_lambda in (0.1, 1.0)
    out = toy_experiment(8, 3, [0, 1], n_train=30, n_test=100, grid=(0.1,), cfg=FAST, n_jobs=1)
    assert [t.seed for t in out["l1"]] == [0, 1] and len(out["l2"]) == 2
    assert out["l1"][0] == toy_trial(8, 3, 0, "l1", n_train=30, n_test=100, grid=(0.1,),
                                     cfg=FAST)
