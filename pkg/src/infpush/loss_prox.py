"""Proximal operator of the infinite-push hinge loss.

The loss seen by the splitting is

    g(a) = max_j (1/m) sum_{i in G_j} max(a_i, 0)

and ``prox_g`` returns ``argmin_a g(a) + (mu/2) ||a - s||^2``.  Writing
``a = a_plus - a_minus`` with both parts nonnegative, the problem is solved
by block coordinate descent: the ``a_minus`` block has a closed form and the
``a_plus`` block is a nonnegative prox of a grouped l_inf-l_1 norm, computed
with Douglas-Rachford splitting.
"""

import warnings
from dataclasses import dataclass

import numba as nb
import numpy as np

from .core import ConvergenceWarning, SolverConfig
from .prox import GroupLayout, _project_ball, project_nonneg


@dataclass
class InnerState:
    a_plus: np.ndarray
    a_minus: np.ndarray
    dr_v: np.ndarray


@dataclass
class ProxInfo:
    bcd_iterations: int
    dr_iterations: int
    converged: bool


def eval_g(a, layout):
    blocks = layout.blocks(a)
    return float(np.maximum(blocks, 0.0).sum(axis=1).max() / layout.group_size)


def doubled_objective(a_plus, a_minus, s, layout, mu):
    """Objective of the split problem, scaled by 1/mu."""
    r = a_plus - a_minus - s
    return 0.5 * float(r @ r) + eval_g(a_plus, layout) / mu


def a_minus_update(s, a_plus):
    return project_nonneg(np.asarray(a_plus, dtype=float) - np.asarray(s, dtype=float))


@nb.njit(cache=True)
def _dr_loop(b, v, m, n, rho, radius, eta, tol, max_iter):
    u = np.maximum((v + rho * b) / (1.0 + rho), 0.0)
    for it in range(1, max_iter + 1):
        x = 2.0 * u - v
        # prox_{rho f1}(x) - u = x - P(x) - u = u - v - P(x)
        v = v + eta * (u - v - _project_ball(x, m, n, radius))
        u_new = np.maximum((v + rho * b) / (1.0 + rho), 0.0)
        delta = np.max(np.abs(u_new - u))
        u = u_new
        if delta <= tol:
            return u, v, it, True
    return u, v, max_iter, False


def _dr_iterate(b, layout, mu, cfg, v0=None):
    """Douglas-Rachford on f1 + f2 with f2 = 0.5||z - b||^2 + i(z >= 0)
    and f1 = (1/(m mu)) max_j sum_{G_j} |z_i|.

    Returns ``(u, v, iterations, converged)``.
    """
    v = np.zeros(layout.size) if v0 is None else np.array(v0, dtype=float)
    m, n = layout.group_size, layout.group_count
    radius = cfg.rho / (m * mu)
    return _dr_loop(np.ascontiguousarray(b, dtype=float), v, m, n, float(cfg.rho),
                    radius, float(cfg.eta), float(cfg.dr_tol), int(cfg.dr_max_iter))


def dr_solve_a_plus(b, layout, mu, cfg=None, v0=None):
    """Minimize ``0.5||z - b||^2 + (1/(m mu)) max_j sum_{G_j} z_i`` over ``z >= 0``.

    Warns with :class:`ConvergenceWarning` if ``cfg.dr_max_iter`` is reached;
    the last iterate is returned in that case.
    """
    cfg = SolverConfig() if cfg is None else cfg
    b = layout.blocks(b).ravel()
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    u, _, _, ok = _dr_iterate(b, layout, mu, cfg, v0)
    if not ok:
        warnings.warn("Douglas-Rachford hit dr_max_iter", ConvergenceWarning)
    return u


def _prox_g(s, layout, mu, cfg, trace=None):
    st = InnerState(np.zeros_like(s), np.zeros_like(s), np.zeros_like(s))
    dr_total = 0
    converged = False
    for sweep in range(1, cfg.bcd_max_iter + 1):
        a_minus = a_minus_update(s, st.a_plus)
        if trace is not None:
            trace.append(doubled_objective(st.a_plus, a_minus, s, layout, mu))
        v0 = None if cfg.strict_alg1 else st.dr_v
        a_plus, st.dr_v, n_dr, _ = _dr_iterate(a_minus + s, layout, mu, cfg, v0)
        dr_total += n_dr
        change = np.max(np.abs(a_plus - st.a_plus)) + np.max(np.abs(a_minus - st.a_minus))
        st.a_plus, st.a_minus = a_plus, a_minus
        if trace is not None:
            trace.append(doubled_objective(a_plus, a_minus, s, layout, mu))
        if change <= cfg.bcd_tol:
            converged = True
            break
    return st.a_plus - st.a_minus, ProxInfo(sweep, dr_total, converged)


def prox_g(s, layout, mu, cfg=None, return_info=False):
    """Prox of ``g / mu`` at ``s`` by block coordinate descent.

    Both blocks start at zero.  Unless ``cfg.strict_alg1`` is set, the
    Douglas-Rachford auxiliary variable is carried over between sweeps.
    Warns with :class:`ConvergenceWarning` if ``cfg.bcd_max_iter`` is hit.
    """
    cfg = SolverConfig() if cfg is None else cfg
    s = layout.blocks(s).ravel()
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    a, info = _prox_g(s, layout, mu, cfg)
    if not info.converged:
        warnings.warn("prox_g block coordinate descent hit bcd_max_iter",
                      ConvergenceWarning)
    return (a, info) if return_info else a
