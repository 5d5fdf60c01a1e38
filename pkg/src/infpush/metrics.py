"""Top-of-the-list ranking metrics and feature-selection scores."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RankScores:
    pos_scores: np.ndarray
    neg_scores: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.pos_scores, dtype=float).ravel()
        neg = np.asarray(self.neg_scores, dtype=float).ravel()
        if pos.size == 0 or neg.size == 0:
            raise ValueError("both score vectors must be nonempty")
        if not (np.isfinite(pos).all() and np.isfinite(neg).all()):
            raise ValueError("scores must be finite")
        object.__setattr__(self, "pos_scores", pos)
        object.__setattr__(self, "neg_scores", neg)

    @classmethod
    def from_weights(cls, w, data):
        w = np.asarray(w, dtype=float)
        return cls(data.positives @ w, data.negatives @ w)


def infinite_push_loss(scores: RankScores) -> int:
    """Largest number of positives scored at or below a single negative."""
    pos = np.sort(scores.pos_scores)
    # positives with score <= the worst (highest-scored) negative
    return int(np.searchsorted(pos, scores.neg_scores.max(), side="right"))


def pos_at_top_rate(scores: RankScores) -> float:
    """Fraction of positives scored strictly above every negative."""
    top = scores.neg_scores.max()
    return float(np.count_nonzero(scores.pos_scores > top)) / scores.pos_scores.size


def feature_metrics(selected, relevant):
    """Precision, recall and F-measure of a selected feature set."""
    selected, relevant = set(selected), set(relevant)
    hit = len(selected & relevant)
    precision = hit / len(selected) if selected else 0.0
    recall = hit / len(relevant) if relevant else 0.0
    if precision + recall == 0:
        return precision, recall, 0.0
    return precision, recall, 2 * precision * recall / (precision + recall)
