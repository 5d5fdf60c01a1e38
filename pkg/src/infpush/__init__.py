"""Sparse support vector infinite push."""

from .admm import fit, objective, predict, run_admm
from .core import (ConvergenceWarning, Dataset, FitReport, Model, PairwiseSystem,
                   Regularizer, SolverConfig, build_pairwise_system)
from .data import (NormStats, ToySpec, apply_normalizer, fit_normalizer, generate_toy,
                   load_csv, load_model, save_csv, save_model)
from .loss_prox import eval_g, prox_g
from .metrics import RankScores, feature_metrics, infinite_push_loss, pos_at_top_rate
from .prox import GroupLayout, project_l1_linf_ball, prox_linf_l1

__all__ = [
    "ConvergenceWarning", "Dataset", "FitReport", "GroupLayout", "Model", "NormStats",
    "PairwiseSystem", "RankScores", "Regularizer", "SolverConfig", "ToySpec",
    "apply_normalizer", "build_pairwise_system", "eval_g", "feature_metrics", "fit",
    "fit_normalizer", "generate_toy", "infinite_push_loss", "load_csv", "load_model",
    "objective", "pos_at_top_rate", "predict", "project_l1_linf_ball", "prox_g",
    "prox_linf_l1", "run_admm", "save_csv", "save_model",
]
__version__ = "0.1.0"
