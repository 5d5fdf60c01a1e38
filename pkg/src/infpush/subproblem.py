"""Solvers for the weight update ``min_w 0.5||Xw - s||^2 + reg * Omega(w)``.

``Omega`` is either ``0.5 ||w||_2^2`` (ridge, closed form) or ``||w||_1``
(Lasso, cyclic coordinate descent).  Both work on the ``d x d`` Gram matrix, which is
formed once per design matrix; each call then only costs one product
``X.T @ s`` on top of ``O(d^2)`` work per iteration.
"""

import warnings
from dataclasses import dataclass
from typing import Optional

import numba as nb
import numpy as np
from scipy import linalg
from scipy.sparse.linalg import LinearOperator, cg

from .core import ConvergenceWarning, Regularizer


@dataclass
class WSolverState:
    previous_solution: Optional[np.ndarray]
    effective_reg: float

    def __post_init__(self):
        if not self.effective_reg > 0:
            raise ValueError(f"effective_reg must be positive, got {self.effective_reg}")


def _check(X, s):
    X = np.asarray(X, dtype=float)
    s = np.asarray(s, dtype=float)
    if X.ndim != 2 or s.ndim != 1 or X.shape[0] != s.shape[0]:
        raise ValueError(f"dimension mismatch: X {X.shape}, s {s.shape}")
    return X, s


def lasso_violation(gram, xts, w, reg):
    """Largest violation of the Lasso subgradient optimality conditions."""
    r = gram @ w - xts
    nz = w != 0
    viol = np.where(nz, np.abs(r + reg * np.sign(w)), np.maximum(np.abs(r) - reg, 0.0))
    return float(viol.max()) if viol.size else 0.0


class WSolver:
    """Cached weight-update solver for a fixed design matrix.

    The ADMM driver calls :meth:`solve` once per outer iteration with a new
    right-hand side; the Gram matrix and its factorization are reused, and
    the Lasso path is warm-started from the last solution.
    """

    def __init__(self, X, regularizer, reg, tol=1e-10, max_iter=10000, method="auto"):
        self.X = np.asarray(X, dtype=float)
        self.regularizer = Regularizer.parse(regularizer)
        self.state = WSolverState(None, float(reg))
        self.tol = tol
        self.max_iter = max_iter
        d = self.X.shape[1]
        if method == "auto":
            method = "cg" if d > 2000 else "direct"
        self.method = method
        self.gram = None if method == "cg" else self.X.T @ self.X
        self._chol = None
        self.last_iterations = 0
        self.last_converged = True

    @property
    def reg(self):
        return self.state.effective_reg

    def solve(self, s):
        s = np.asarray(s, dtype=float)
        if s.shape != (self.X.shape[0],):
            raise ValueError(f"dimension mismatch: X {self.X.shape}, s {s.shape}")
        xts = self.X.T @ s
        if self.regularizer is Regularizer.L2:
            w = self._ridge(xts)
        else:
            w = self._lasso(xts)
        self.state.previous_solution = w
        return w

    def _ridge(self, xts):
        d = xts.size
        if self.method == "cg":
            op = LinearOperator(
                (d, d), matvec=lambda v: self.X.T @ (self.X @ v) + self.reg * v)
            x0 = self.state.previous_solution
            rtol = self.tol * (1 + np.linalg.norm(xts)) / max(np.linalg.norm(xts), 1e-300)
            w, info = cg(op, xts, x0=x0, rtol=min(rtol, 0.5), atol=0.0,
                         maxiter=self.max_iter)
            self.last_converged = info == 0
            return w
        if self._chol is None:
            self._chol = linalg.cho_factor(self.gram + self.reg * np.eye(d))
        self.last_iterations, self.last_converged = 1, True
        return linalg.cho_solve(self._chol, xts)

    def _lasso(self, xts):
        if self.gram is None:
            self.gram = self.X.T @ self.X
        w0 = self.state.previous_solution
        w0 = np.zeros_like(xts) if w0 is None else w0
        w, n_iter, ok = cd_lasso(self.gram, xts, self.reg, w0, self.tol, self.max_iter)
        self.last_iterations, self.last_converged = n_iter, ok
        return w


@nb.njit(cache=True)
def _cd_sweeps(gram, xts, reg, w, grad, max_sweeps, thresh):
    """Cyclic coordinate descent on ``0.5 w'Gw - xts'w + reg ||w||_1``.

    ``w`` and ``grad = Gw - xts`` are updated in place.  Returns the number
    of sweeps run and the final optimality violation.
    """
    d = w.shape[0]
    viol = np.inf
    for sweep in range(1, max_sweeps + 1):
        for i in range(d):
            gii = gram[i, i]
            if gii <= 0.0:
                continue
            z = gii * w[i] - grad[i]
            new = 0.0
            if z > reg:
                new = (z - reg) / gii
            elif z < -reg:
                new = (z + reg) / gii
            delta = new - w[i]
            if delta != 0.0:
                w[i] = new
                for k in range(d):
                    grad[k] += delta * gram[k, i]
        viol = 0.0
        for i in range(d):
            if w[i] > 0.0:
                v = abs(grad[i] + reg)
            elif w[i] < 0.0:
                v = abs(grad[i] - reg)
            else:
                v = max(abs(grad[i]) - reg, 0.0)
            if v > viol:
                viol = v
        if viol <= thresh:
            return sweep, viol
    return max_sweeps, viol


def cd_lasso(gram, xts, reg, w0, tol, max_iter):
    """Coordinate descent Lasso in Gram form.

    Stops once the optimality violation is at most
    ``tol * (1 + ||xts||_inf)``; returns ``(w, sweeps, converged)``.
    """
    thresh = tol * (1.0 + float(np.max(np.abs(xts), initial=0.0)))
    w = np.array(w0, dtype=float)
    grad = gram @ w - xts
    if lasso_violation(gram, xts, w, reg) <= thresh:
        return w, 0, True
    sweeps, viol = _cd_sweeps(np.ascontiguousarray(gram), xts, float(reg), w, grad,
                              int(max_iter), thresh)
    return w, sweeps, viol <= thresh


def solve_ridge(X, s, reg, tol=1e-10):
    """Closed-form solve of ``(X'X + reg I) w = X's``."""
    X, s = _check(X, s)
    if not reg > 0:
        raise ValueError(f"reg must be positive, got {reg}")
    return WSolver(X, Regularizer.L2, reg, tol=tol).solve(s)


def solve_lasso(X, s, reg, warm=None, tol=1e-10, max_iter=10000):
    """Lasso solve; warns and returns the best iterate if ``max_iter`` is hit."""
    X, s = _check(X, s)
    if not reg > 0:
        raise ValueError(f"reg must be positive, got {reg}")
    solver = WSolver(X, Regularizer.L1, reg, tol=tol, max_iter=max_iter)
    if warm is not None:
        warm = np.asarray(warm, dtype=float)
        if warm.shape != (X.shape[1],):
            raise ValueError(f"warm start has shape {warm.shape}, expected ({X.shape[1]},)")
        solver.state.previous_solution = warm
    w = solver.solve(s)
    if not solver.last_converged:
        warnings.warn(f"Lasso solver hit max_iter={max_iter}", ConvergenceWarning)
    return w
