"""Target-selection strategies for reconstruction training.

Three regimes:
  standard - the target is the input itself;
  icrst    - with per-step probability p, each target is an independent
             uniform draw from the input's own class (labels required);
  trst     - each target is a uniform draw from the whole dataset.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EmptyInputError, IntegrityError
from .ndcore import column_mean, column_variance

STANDARD = "standard"
ICRST = "icrst"
TRST = "trst"


@dataclass(frozen=True)
class TrainingMode:
    variant: str
    p: float = 1.0

    def __post_init__(self):
        if self.variant not in (STANDARD, ICRST, TRST):
            raise DomainError(f"unknown training mode {self.variant!r}")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"mixing probability must be in [0,1], got {self.p}")

    @classmethod
    def standard(cls):
        return cls(STANDARD)

    @classmethod
    def icrst(cls, p=1.0):
        return cls(ICRST, p)

    @classmethod
    def trst(cls):
        return cls(TRST)

    @property
    def needs_labels(self):
        return self.variant == ICRST


def build_class_index(labels):
    """Map class id -> array of dataset row indices with that label."""
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if labels.size == 0:
        raise EmptyInputError("cannot index an empty label vector")
    if labels.min() < 0:
        raise IntegrityError("negative class label")
    return {int(j): np.flatnonzero(labels == j) for j in np.unique(labels)}


def draw_step_flag(p, rng):
    """Bernoulli(p) draw; one per training step."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability must be in [0,1], got {p}")
    return bool(rng.random() < p)


def select_targets(batch_rows, labels, mode, class_index, dataset_size, rng,
                   per_sample=False):
    """Target row indices for one training step.

    Draws happen with replacement and self-draws are allowed: the regimes
    only require the two observations to be independent draws from the same
    distribution. With `per_sample` the Bernoulli flag is redrawn per row
    instead of once per step.
    """
    batch_rows = np.asarray(batch_rows, dtype=np.int64)
    if mode.variant == STANDARD:
        return batch_rows.copy()
    if mode.variant == TRST:
        return rng.integers(0, dataset_size, size=batch_rows.shape[0])

    # icrst
    if labels is None or class_index is None:
        raise IntegrityError("icrst target selection requires labels")
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if per_sample:
        swap = rng.random(batch_rows.shape[0]) < mode.p
    else:
        swap = np.full(batch_rows.shape[0], draw_step_flag(mode.p, rng))
    targets = batch_rows.copy()
    for i in np.flatnonzero(swap):
        rows = class_index.get(int(labels[batch_rows[i]]))
        if rows is None or rows.size == 0:
            raise IntegrityError(f"label {labels[batch_rows[i]]} has no indexed rows")
        targets[i] = rows[rng.integers(0, rows.size)]
    return targets


@dataclass
class ClassStatistics:
    means: dict  # class id -> per-feature mean
    variances: dict  # class id -> per-feature population variance
    counts: dict  # class id -> row count


def class_statistics(data, labels):
    """Per-class feature means and population variances."""
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if data.shape[0] != labels.shape[0]:
        raise IntegrityError(
            f"{data.shape[0]} rows but {labels.shape[0]} labels"
        )
    means, variances, counts = {}, {}, {}
    for j, rows in build_class_index(labels).items():
        sub = data[rows]
        means[j] = column_mean(sub)
        variances[j] = column_variance(sub)
        counts[j] = int(rows.size)
    return ClassStatistics(means, variances, counts)
