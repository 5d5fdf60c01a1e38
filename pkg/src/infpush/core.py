"""Shared data types and the pairwise difference system."""

import enum
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np


class ConvergenceWarning(UserWarning):
    """An iterative solver stopped at its iteration cap."""


class Regularizer(str, enum.Enum):
    L1 = "l1"
    L2 = "l2"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown regularizer {value!r}; expected 'l1' or 'l2'") from None


def _as_matrix(a, name):
    a = np.array(a, dtype=float, ndmin=2)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Dataset:
    """Positive and negative examples sharing ``d`` feature columns."""

    positives: np.ndarray
    negatives: np.ndarray
    feature_names: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        pos = _as_matrix(self.positives, "positives")
        neg = _as_matrix(self.negatives, "negatives")
        if pos.shape[0] < 1 or neg.shape[0] < 1:
            raise ValueError(
                f"need at least one positive and one negative example, "
                f"got m={pos.shape[0]}, n={neg.shape[0]}")
        if pos.shape[1] != neg.shape[1]:
            raise ValueError(
                f"positives have {pos.shape[1]} columns but negatives have {neg.shape[1]}")
        if not (np.isfinite(pos).all() and np.isfinite(neg).all()):
            raise ValueError("dataset contains non-finite values")
        if self.feature_names is not None:
            names = tuple(self.feature_names)
            if len(names) != pos.shape[1]:
                raise ValueError(
                    f"{len(names)} feature names for {pos.shape[1]} columns")
            object.__setattr__(self, "feature_names", names)
        pos.flags.writeable = False
        neg.flags.writeable = False
        object.__setattr__(self, "positives", pos)
        object.__setattr__(self, "negatives", neg)

    @property
    def m(self):
        return self.positives.shape[0]

    @property
    def n(self):
        return self.negatives.shape[0]

    @property
    def d(self):
        return self.positives.shape[1]


@dataclass(frozen=True)
class PairwiseSystem:
    """Rows ``positives[i] - negatives[j]`` stored at flat index ``j * m + i``."""

    X: np.ndarray
    m: int
    n: int

    @property
    def d(self):
        return self.X.shape[1]

    def group(self, j):
        """Flat row indices of the pairs involving negative example ``j``."""
        if not 0 <= j < self.n:
            raise IndexError(j)
        return range(j * self.m, (j + 1) * self.m)

    @property
    def layout(self):
        from .prox import GroupLayout
        return GroupLayout(self.m, self.n)


def build_pairwise_system(data: Dataset) -> PairwiseSystem:
    pos, neg = data.positives, data.negatives
    X = (pos[None, :, :] - neg[:, None, :]).reshape(data.m * data.n, data.d)
    X.flags.writeable = False
    return PairwiseSystem(X=X, m=data.m, n=data.n)


@dataclass(frozen=True)
class SolverConfig:
    """Penalty, step and stopping parameters for :func:`infpush.admm.fit`.

    ``mu`` is the ADMM penalty; ``None`` picks ``sqrt(lam / (m n)) / 3``
    at fit time, which keeps the iteration count roughly independent of the
    problem size and of ``lam`` on standardized features.  ``rho`` is the
    Douglas-Rachford step and ``eta`` its relaxation.  With ``strict_alg1``
    the Douglas-Rachford state is reset at every block coordinate sweep
    instead of being warm-started.
    """

    mu: Optional[float] = None
    rho: float = 1.0
    eta: float = 1.0
    outer_max_iter: int = 500
    bcd_max_iter: int = 100
    dr_max_iter: int = 5000
    outer_tol: float = 1e-5
    bcd_tol: float = 1e-8
    dr_tol: float = 1e-8
    subproblem_tol: float = 1e-10
    subproblem_max_iter: int = 10000
    strict_alg1: bool = False

    def __post_init__(self):
        if self.mu is not None and not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if not 0 < self.eta < 2:
            raise ValueError(f"eta must lie in (0, 2), got {self.eta}")
        for name in ("outer_tol", "bcd_tol", "dr_tol", "subproblem_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("outer_max_iter", "bcd_max_iter", "dr_max_iter",
                     "subproblem_max_iter"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    def penalty(self, lam, m, n):
        if self.mu is not None:
            return float(self.mu)
        return float(np.sqrt(lam / (m * n)) / 3.0)


@dataclass
class Model:
    weights: np.ndarray
    lam: float
    regularizer: Regularizer
    normalization_stats: Optional[List[Tuple[float, float]]] = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        self.regularizer = Regularizer.parse(self.regularizer)
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.normalization_stats is not None:
            stats = [(float(a), float(b)) for a, b in self.normalization_stats]
            if len(stats) != self.weights.size:
                raise ValueError("normalization stats do not match weight length")
            self.normalization_stats = stats

    @property
    def d(self):
        return self.weights.size

    def selected(self, threshold=1e-8):
        return set(np.flatnonzero(np.abs(self.weights) > threshold).tolist())


@dataclass
class FitReport:
    iterations: int = 0
    objective_trace: List[float] = field(default_factory=list)
    primal_residual_trace: List[float] = field(default_factory=list)
    nonzero_count: int = 0
    converged: bool = False
    mu: float = float("nan")
    subproblem_failures: int = 0
    inner_failures: int = 0

    @property
    def objective(self):
        return self.objective_trace[-1] if self.objective_trace else float("nan")

    @property
    def residual(self):
        return self.primal_residual_trace[-1] if self.primal_residual_trace else float("nan")


def count_nonzero(w: Sequence[float], threshold: float = 1e-8) -> int:
    return int(np.count_nonzero(np.abs(np.asarray(w)) > threshold))
