"""ADMM solver for the regularized infinite-push hinge problem.

Solves

    min_w  lam * Omega(w) + max_j (1/m) sum_i (1 - w'(x_i^+ - x_j^-))_+

by splitting ``a = 1 - Xw`` and alternating a weight update, the prox of
the loss and a scaled dual step.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .core import (Dataset, FitReport, Model, PairwiseSystem, Regularizer,
                   SolverConfig, build_pairwise_system, count_nonzero)
from .loss_prox import _prox_g
from .subproblem import WSolver

log = logging.getLogger(__name__)


@dataclass
class AdmmState:
    w: np.ndarray
    a: np.ndarray
    gamma: np.ndarray
    iteration: int = 0


def regularizer_value(w, reg):
    reg = Regularizer.parse(reg)
    if reg is Regularizer.L1:
        return float(np.abs(w).sum())
    return 0.5 * float(w @ w)


def objective(w, sys: PairwiseSystem, lam, reg):
    """Regularized infinite-push hinge objective at ``w``."""
    w = np.asarray(w, dtype=float)
    if w.shape != (sys.d,):
        raise ValueError(f"w has shape {w.shape}, expected ({sys.d},)")
    hinge = np.maximum(1.0 - sys.X @ w, 0.0).reshape(sys.n, sys.m)
    return lam * regularizer_value(w, reg) + float(hinge.sum(axis=1).max()) / sys.m


def run_admm(sys: PairwiseSystem, lam, reg, cfg=None, callback=None):
    """Run the ADMM iterations on a prebuilt pairwise system.

    ``callback(state)`` is invoked after every outer iteration with the
    current :class:`AdmmState` (arrays are fresh each iteration and may be
    kept).  Returns ``(w, report)``.
    """
    cfg = SolverConfig() if cfg is None else cfg
    reg = Regularizer.parse(reg)
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    X, layout = sys.X, sys.layout
    mu = cfg.penalty(lam, sys.m, sys.n)
    rows = X.shape[0]
    wsolver = WSolver(X, reg, lam / mu, tol=cfg.subproblem_tol,
                      max_iter=cfg.subproblem_max_iter)
    state = AdmmState(w=np.zeros(sys.d), a=np.zeros(rows), gamma=np.zeros(rows))
    report = FitReport(mu=mu)
    scale = np.sqrt(rows)
    for k in range(1, cfg.outer_max_iter + 1):
        w_old = state.w
        w = wsolver.solve(1.0 - state.a - state.gamma)
        if not wsolver.last_converged:
            # soft failure: keep the iterate, allow more sweeps next time
            report.subproblem_failures += 1
            wsolver.max_iter *= 2
        Xw = X @ w
        a, info = _prox_g(1.0 - state.gamma - Xw, layout, mu, cfg)
        if not info.converged:
            report.inner_failures += 1
        resid = Xw + a - 1.0
        gamma = state.gamma + resid
        if not (np.isfinite(w).all() and np.isfinite(a).all() and np.isfinite(gamma).all()):
            raise FloatingPointError(
                f"non-finite iterate at ADMM iteration {k} "
                f"({np.count_nonzero(~np.isfinite(w))} bad weights, mu={mu}, lambda={lam})")
        state = AdmmState(w=w, a=a, gamma=gamma, iteration=k)
        r_norm = float(np.linalg.norm(resid))
        report.primal_residual_trace.append(r_norm)
        report.objective_trace.append(objective(w, sys, lam, reg))
        report.iterations = k
        if callback is not None:
            callback(state)
        dw = float(np.linalg.norm(w - w_old))
        if r_norm <= cfg.outer_tol * scale and dw <= cfg.outer_tol * max(1.0, float(np.linalg.norm(w))):
            report.converged = True
            break
    report.nonzero_count = count_nonzero(state.w)
    log.debug("admm stopped after %d iterations, residual %.3e, converged=%s",
              report.iterations, report.residual, report.converged)
    return state.w, report


def fit(data: Dataset, lam, reg, cfg=None):
    """Fit a linear scoring function; returns ``(Model, FitReport)``."""
    sys = build_pairwise_system(data)
    w, report = run_admm(sys, lam, reg, cfg)
    return Model(weights=w, lam=lam, regularizer=reg), report


def predict(model: Model, x):
    """Score ``x`` (one example or a matrix of examples) with ``model``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.d:
        raise ValueError(f"expected {model.d} features, got {x.shape[-1]}")
    if model.normalization_stats is not None:
        stats = np.asarray(model.normalization_stats)
        x = (x - stats[:, 0]) / stats[:, 1]
    out = x @ model.weights
    return float(out) if out.ndim == 0 else out
