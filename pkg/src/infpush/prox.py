"""Proximal operators and projections used by the infinite-push loss solver.

Grouped vectors follow the pairwise layout: a vector of length ``m * n`` is
``n`` contiguous blocks of ``m`` entries, block ``j`` holding the pairs that
involve negative example ``j``.
"""

from dataclasses import dataclass

import numba as nb
import numpy as np


@dataclass(frozen=True)
class GroupLayout:
    """Contiguous equal-size grouping of a flat vector."""

    group_size: int
    group_count: int

    def __post_init__(self):
        if self.group_size < 1 or self.group_count < 1:
            raise ValueError(
                f"group_size and group_count must be >= 1, got "
                f"({self.group_size}, {self.group_count})")

    @property
    def size(self):
        return self.group_size * self.group_count

    def blocks(self, v):
        """View ``v`` as an ``(group_count, group_size)`` array."""
        v = np.asarray(v, dtype=float)
        if v.ndim != 1 or v.shape[0] != self.size:
            raise ValueError(
                f"expected a vector of length {self.size}, got shape {v.shape}")
        return v.reshape(self.group_count, self.group_size)


def soft_threshold(v, tau):
    """Prox of ``tau * ||.||_1``."""
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def project_nonneg(v):
    """Euclidean projection onto the nonnegative orthant."""
    return np.maximum(np.asarray(v, dtype=float), 0.0)


def l1_linf_norm(v, layout):
    """Sum over groups of the within-group max absolute value."""
    return float(np.abs(layout.blocks(v)).max(axis=1).sum())


def linf_l1_norm(v, layout):
    """Max over groups of the within-group l1 norm."""
    return float(np.abs(layout.blocks(v)).sum(axis=1).max())


@nb.njit(cache=True)
def _project_ball(v, m, n, tau):
    """l1,inf-ball projection of a flat grouped vector (compiled kernel).

    Group j is clipped at a level ``c_j >= 0`` such that the mass cut off,
    ``sum_i max(|v_i| - c_j, 0)``, equals a common ``theta`` for every group
    with ``c_j > 0`` (groups whose l1 norm is below ``theta`` are zeroed)
    and ``sum_j c_j = tau``.  The total level is convex, decreasing and
    piecewise linear in ``theta``, so Newton's method started at 0 stays
    left of the root and stops exactly once it lands on the final segment.
    """
    out = np.empty(m * n)
    if tau <= 0.0:
        out[:] = 0.0
        return out
    csum = np.empty((n, m))
    brk = np.empty((n, m))
    top = np.empty(n)
    maxsum = 0.0
    for j in range(n):
        desc = np.sort(np.abs(v[j * m:(j + 1) * m]))[::-1]
        top[j] = desc[0]
        maxsum += desc[0]
        acc = 0.0
        for k in range(m):
            acc += desc[k]
            csum[j, k] = acc
            nxt = desc[k + 1] if k + 1 < m else 0.0
            # theta at which group j stops clipping only its top k+1 entries
            brk[j, k] = acc - (k + 1) * nxt
    if maxsum <= tau:
        out[:] = v
        return out
    cnt = np.ones(n, dtype=np.int64)
    theta = 0.0
    for _ in range(n * m + 1):
        changed = False
        top_inv = 0.0
        inv_sum = 0.0
        for j in range(n):
            # number of breakpoints <= theta, by bisection on a sorted row
            lo, hi = 0, m
            while lo < hi:
                mid = (lo + hi) // 2
                if brk[j, mid] <= theta:
                    lo = mid + 1
                else:
                    hi = mid
            if lo + 1 != cnt[j]:
                cnt[j] = lo + 1
                changed = True
            if lo < m:
                top_inv += csum[j, lo] / (lo + 1)
                inv_sum += 1.0 / (lo + 1)
        if not changed and theta > 0.0:
            break
        if inv_sum == 0.0:
            # theta rounded onto the last breakpoint (tau below rounding):
            # every group is cut to zero
            break
        theta = max(theta, (top_inv - tau) / inv_sum)
    levels = np.zeros(n)
    for j in range(n):
        k = cnt[j]
        if k <= m:
            levels[j] = min(max((csum[j, k - 1] - theta) / k, 0.0), top[j])
    # csum - theta cancels when tau << |v|; rescale onto the sphere
    total = levels.sum()
    if total > tau:
        levels *= tau / total
    for j in range(n):
        level = levels[j]
        for i in range(j * m, (j + 1) * m):
            x = v[i]
            if x > level:
                out[i] = level
            elif x < -level:
                out[i] = -level
            else:
                out[i] = x
    return out


def project_l1_linf_ball(v, layout, tau):
    """Project ``v`` onto ``{u : sum_j max_{i in G_j} |u_i| <= tau}``.

    Exact up to rounding; cost is ``O(mn log m)`` for the sorts plus a few
    ``O(n log m)`` Newton steps.
    """
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    v = np.ascontiguousarray(layout.blocks(v).ravel())
    return _project_ball(v, layout.group_size, layout.group_count, float(tau))


def prox_linf_l1(v, layout, tau):
    """Prox of ``tau * max_j sum_{i in G_j} |z_i|`` via Moreau decomposition."""
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    v = layout.blocks(v).ravel()
    if tau == 0:
        return v.copy()
    return v - project_l1_linf_ball(v, layout, tau)


def prox_f2(v, b, rho):
    """Prox of ``rho * (0.5 ||z - b||^2 + indicator(z >= 0))`` at ``v``."""
    v = np.asarray(v, dtype=float)
    b = np.asarray(b, dtype=float)
    if v.shape != b.shape:
        raise ValueError(f"shape mismatch: {v.shape} vs {b.shape}")
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    return project_nonneg((v + rho * b) / (1.0 + rho))
