"""Hyperparameter selection, toy-problem trials and the scaling benchmark."""

import os
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from .admm import fit
from .core import Dataset, Model, Regularizer
from .data import ToySpec, apply_normalizer, fit_normalizer, generate_toy_trial
from .metrics import RankScores, feature_metrics, infinite_push_loss, pos_at_top_rate

METRICS = ("pos_at_top", "neg_infpush_loss")


def n_jobs_from_env():
    """Worker count from ``INFPUSH_THREADS`` (unset: 1, 0: all cores)."""
    raw = os.environ.get("INFPUSH_THREADS", "").strip()
    if not raw:
        return 1
    value = int(raw)
    if value < 0:
        raise ValueError(f"INFPUSH_THREADS must be >= 0, got {value}")
    return value if value > 0 else (os.cpu_count() or 1)


def _map(func, items, n_jobs):
    if n_jobs == 1 or len(items) <= 1:
        return [func(*it) for it in items]
    # results come back in submission order
    return Parallel(n_jobs=n_jobs)(delayed(func)(*it) for it in items)


def score(w, data: Dataset, metric="pos_at_top"):
    scores = RankScores.from_weights(w, data)
    if metric == "pos_at_top":
        return pos_at_top_rate(scores)
    if metric == "neg_infpush_loss":
        return -float(infinite_push_loss(scores))
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


def stratified_split(data: Dataset, fraction, seed):
    """Random per-class split into ``(fit_part, validation_part)``.

    Each class with at least two examples contributes to both parts.
    """
    if not 0 < fraction < 1:
        raise ValueError(f"split fraction must lie in (0, 1), got {fraction}")
    rng = np.random.default_rng(seed)

    def cut(block):
        count = block.shape[0]
        if count < 2:
            raise ValueError("each class needs at least two examples to split")
        k = min(max(int(round(fraction * count)), 1), count - 1)
        perm = rng.permutation(count)
        return block[perm[:k]], block[perm[k:]]

    p_fit, p_val = cut(data.positives)
    n_fit, n_val = cut(data.negatives)
    return Dataset(p_fit, n_fit), Dataset(p_val, n_val)


@dataclass
class TuneResult:
    best_lambda: float
    lambdas: List[float]
    scores: List[float]
    model: Optional[Model] = None
    report: object = None


def _fit_and_score(fit_part, val_part, lam, reg, cfg, metric):
    model, _ = fit(fit_part, lam, reg, cfg)
    return score(model.weights, val_part, metric)


def tune_lambda(data: Dataset, lambdas: Sequence[float], reg, *, split_fraction=0.7,
                metric="pos_at_top", seed=0, cfg=None, refit=True, n_jobs=None):
    """Pick ``lambda`` by a stratified hold-out split, then refit on all data.

    Ties in the validation metric go to the larger ``lambda``.
    """
    lambdas = [float(x) for x in lambdas]
    if not lambdas:
        raise ValueError("lambda grid is empty")
    if any(not lam > 0 for lam in lambdas):
        raise ValueError("all grid values must be positive")
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    n_jobs = n_jobs_from_env() if n_jobs is None else n_jobs
    fit_part, val_part = stratified_split(data, split_fraction, seed)
    scores = _map(_fit_and_score,
                  [(fit_part, val_part, lam, reg, cfg, metric) for lam in lambdas], n_jobs)
    best = max(range(len(lambdas)), key=lambda i: (scores[i], lambdas[i]))
    result = TuneResult(lambdas[best], lambdas, scores)
    if refit:
        result.model, result.report = fit(data, lambdas[best], reg, cfg)
    return result


DEFAULT_GRID = (1e-2, 3e-2, 1e-1, 3e-1, 1.0, 3.0)


@dataclass
class TrialResult:
    seed: int
    reg: str
    best_lambda: float
    pos_at_top: float
    infpush_loss: int
    nonzeros: int
    precision: float
    recall: float
    f_measure: float
    converged: bool


def toy_trial(d, r, seed, reg, *, n_train=100, n_test=1000, grid=DEFAULT_GRID,
              cfg=None, split_fraction=0.7):
    """One run of the toy protocol: normalize on train, tune on a hold-out
    split, refit, and score the test set and the selected features."""
    train, test, relevant = generate_toy_trial(ToySpec(d, r, n_train, seed), n_test)
    stats = fit_normalizer(train)
    train, test = apply_normalizer(stats, train), apply_normalizer(stats, test)
    res = tune_lambda(train, grid, reg, split_fraction=split_fraction, seed=seed,
                      cfg=cfg, n_jobs=1)
    w = res.model.weights
    scores = RankScores.from_weights(w, test)
    selected = res.model.selected()
    precision, recall, f = feature_metrics(selected, relevant)
    return TrialResult(seed=seed, reg=Regularizer.parse(reg).value,
                       best_lambda=res.best_lambda, pos_at_top=pos_at_top_rate(scores),
                       infpush_loss=infinite_push_loss(scores), nonzeros=len(selected),
                       precision=precision, recall=recall, f_measure=f,
                       converged=res.report.converged)


def toy_experiment(d, r, seeds, regs=("l1", "l2"), n_jobs=None, **kwargs):
    """Run :func:`toy_trial` for every seed and regularizer.

    Returns ``{reg: [TrialResult, ...]}`` with trials in seed order.
    """
    n_jobs = n_jobs_from_env() if n_jobs is None else n_jobs
    jobs = [(reg, s) for reg in regs for s in seeds]
    out = _map(lambda reg, s: toy_trial(d, r, s, reg, **kwargs), jobs, n_jobs)
    results: Dict[str, List[TrialResult]] = {Regularizer.parse(reg).value: [] for reg in regs}
    for res in out:
        results[res.reg].append(res)
    return results


@dataclass
class BenchRow:
    size: int
    pairs: int
    times: List[float] = field(default_factory=list)
    iterations: List[int] = field(default_factory=list)

    @property
    def median_time(self):
        return float(np.median(self.times))


def _bench_one(size, d, r, seed, lam, reg, cfg):
    train, _ = generate_toy_trial(ToySpec(d, r, size, seed), n_test=0)[:2]
    train = apply_normalizer(fit_normalizer(train), train)
    start = time.perf_counter()
    _, report = fit(train, lam, reg, cfg)
    elapsed = time.perf_counter() - start
    return train.m * train.n, elapsed, report.iterations


def bench(sizes, d=30, r=10, seed=0, trials=3, lam=0.01, reg="l1", cfg=None):
    """Time :func:`fit` on toy data of each training size.

    Trial ``t`` of every size uses seed ``seed + t``.  Returns the rows and
    the least-squares slope of log(median time) against log(pairs).  Runs
    serially so the timings do not compete for cores.
    """
    rows = []
    for size in sizes:
        row = None
        for t in range(trials):
            pairs, elapsed, iters = _bench_one(size, d, r, seed + t, lam, reg, cfg)
            if row is None:
                row = BenchRow(size=size, pairs=pairs)
            row.times.append(elapsed)
            row.iterations.append(iters)
        rows.append(row)
    slope = loglog_slope([row.pairs for row in rows], [row.median_time for row in rows])
    return rows, slope


def loglog_slope(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.size < 2:
        return float("nan")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
