"""Synthetic toy problems, normalization and file I/O."""

import csv
import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Dataset, Model, Regularizer


class DataFormatError(ValueError):
    """A data or model file could not be parsed."""


@dataclass(frozen=True)
class ToySpec:
    d: int
    r: int
    n_samples: int
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.r <= self.d:
            raise ValueError(f"need 1 <= r <= d, got r={self.r}, d={self.d}")
        if self.n_samples < 2:
            raise ValueError(f"n_samples must be >= 2, got {self.n_samples}")


@dataclass(frozen=True)
class ToyDistribution:
    """Class-conditional law of one toy trial.

    Relevant features (the first ``r`` columns) are ``N(+mean, cov)`` for
    positives and ``N(-mean, cov)`` for negatives; the remaining ``d - r``
    columns are i.i.d. standard normal for both classes.
    """

    d: int
    mean: np.ndarray
    cov: np.ndarray

    @classmethod
    def draw(cls, d, r, rng):
        mean = rng.choice([-1.0, 1.0], size=r)
        g = rng.standard_normal((r, r + 2))
        cov = g @ g.T
        # Wishart(I, r + 2) draw rescaled to unit average variance
        cov *= r / np.trace(cov)
        return cls(d=d, mean=mean, cov=cov)

    @property
    def r(self):
        return self.mean.size

    def sample(self, n_samples, rng):
        m = (n_samples + 1) // 2
        n = n_samples - m
        chol = np.linalg.cholesky(self.cov)

        def block(count, sign):
            x = np.empty((count, self.d))
            x[:, :self.r] = sign * self.mean + rng.standard_normal((count, self.r)) @ chol.T
            x[:, self.r:] = rng.standard_normal((count, self.d - self.r))
            return x

        return Dataset(block(m, 1.0), block(n, -1.0))


def generate_toy(spec: ToySpec):
    """Draw a toy dataset; returns ``(dataset, relevant_indices)``."""
    train, _, relevant = generate_toy_trial(spec, n_test=0)
    return train, relevant


def generate_toy_trial(spec: ToySpec, n_test=1000):
    """Draw train and test sets sharing one class mean and covariance.

    Returns ``(train, test, relevant_indices)``; ``test`` is ``None`` when
    ``n_test`` is 0.  The training set is identical to what
    :func:`generate_toy` returns for the same spec.
    """
    rng = np.random.default_rng(spec.seed)
    dist = ToyDistribution.draw(spec.d, spec.r, rng)
    train = dist.sample(spec.n_samples, rng)
    test = dist.sample(n_test, rng) if n_test else None
    return train, test, set(range(spec.r))


@dataclass(frozen=True)
class NormStats:
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float).ravel()
        stds = np.asarray(self.stds, dtype=float).ravel()
        if means.shape != stds.shape:
            raise ValueError("means and stds must have the same length")
        if not (stds > 0).all():
            raise ValueError("stds must be positive")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)

    def pairs(self):
        return list(zip(self.means.tolist(), self.stds.tolist()))

    @classmethod
    def from_pairs(cls, pairs):
        arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])


def fit_normalizer(train: Dataset) -> NormStats:
    """Column means and population standard deviations over both classes.

    Columns with (numerically) zero spread get a standard deviation of 1.
    """
    x = np.vstack([train.positives, train.negatives])
    means = x.mean(axis=0)
    stds = x.std(axis=0)
    flat = stds <= 1e-12 * np.maximum(1.0, np.abs(means))
    stds[flat] = 1.0
    return NormStats(means, stds)


def apply_normalizer(stats: NormStats, data: Dataset) -> Dataset:
    if stats.means.size != data.d:
        raise ValueError(f"normalizer has {stats.means.size} columns, data has {data.d}")
    return Dataset((data.positives - stats.means) / stats.stds,
                   (data.negatives - stats.means) / stats.stds,
                   data.feature_names)


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_csv(path) -> Dataset:
    """Read ``label,feature...`` rows; labels are +1/-1 or 1/0.

    A first row whose first cell is not numeric is taken as a header.
    """
    pos, neg, names = [], [], None
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if lineno == 1 and not _is_number(row[0].strip()):
                names = tuple(cell.strip() for cell in row[1:])
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataFormatError(
                    f"{path}:{lineno}: expected {width} fields, got {len(row)}")
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                raise DataFormatError(
                    f"{path}:{lineno}: non-numeric value in row {row!r}") from None
            if not np.isfinite(values).all():
                raise DataFormatError(f"{path}:{lineno}: non-finite value")
            label, feats = values[0], values[1:]
            if label == 1:
                pos.append(feats)
            elif label in (-1, 0):
                neg.append(feats)
            else:
                raise DataFormatError(
                    f"{path}:{lineno}: label must be +1/-1 or 1/0, got {row[0]!r}")
    if width is None:
        raise DataFormatError(f"{path}: no data rows")
    if width < 2:
        raise DataFormatError(f"{path}: rows need a label and at least one feature")
    if not pos or not neg:
        raise DataFormatError(f"{path}: both classes must be present "
                              f"(found {len(pos)} positive, {len(neg)} negative rows)")
    if names is not None and len(names) != width - 1:
        names = None
    d = width - 1
    return Dataset(np.array(pos).reshape(-1, d), np.array(neg).reshape(-1, d), names)


def save_csv(data: Dataset, path, header=True):
    """Write ``data`` as ``label,features`` rows with 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if header:
            names = data.feature_names or tuple(f"f{i}" for i in range(data.d))
            writer.writerow(("label",) + tuple(names))
        for label, block in ((1, data.positives), (-1, data.negatives)):
            for row in block:
                writer.writerow([label] + [f"{x:.17g}" for x in row])


def save_model(model: Model, path, extra: Optional[dict] = None):
    doc = {
        "weights": [float(x) for x in model.weights],
        "lambda": float(model.lam),
        "regularizer": model.regularizer.value,
        "norm_stats": model.normalization_stats,
    }
    if extra:
        doc.update(extra)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
    os.replace(tmp, path)


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: not a model file ({exc})") from None
    try:
        return Model(weights=np.array(doc["weights"], dtype=float),
                     lam=float(doc["lambda"]),
                     regularizer=Regularizer.parse(doc["regularizer"]),
                     normalization_stats=doc.get("norm_stats"))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: invalid model file ({exc})") from None
