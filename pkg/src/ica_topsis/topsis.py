"""TOPSIS ranking with Euclidean and Mahalanobis distances.

Implements the classical five-step TOPSIS pipeline (column normalization,
weighting, positive/negative ideal solutions, distances, similarity) and the
covariance-aware variant that measures distances to the ideals with a
weighted Mahalanobis metric instead of the Euclidean one.

All criteria are treated as benefit criteria (larger is better); cost
criteria are out of scope and must be transformed by the caller beforehand.
Negative evaluations are allowed (centered ICA estimates are a valid input).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DegenerateAlternativesWarning,
    SingularCovarianceError,
    ZeroColumnError,
)

__all__ = [
    "DecisionMatrix",
    "WeightVector",
    "IdealSolutions",
    "Ranking",
    "normalize",
    "apply_weights",
    "ideal_solutions",
    "euclidean_distances",
    "similarity",
    "covariance",
    "mahalanobis_distances",
    "topsis_euclidean",
    "topsis_mahalanobis",
]

# Ridge added to the criterion covariance before inversion, relative to the
# mean diagonal entry; inversion is refused above this condition number.
COVARIANCE_RIDGE = 1e-10
MAX_CONDITION = 1e12


@dataclass
class DecisionMatrix:
    """K alternatives evaluated against M benefit criteria.

    Parameters
    ----------
    values : (K, M) array_like
        Criterion evaluations, one row per alternative. Must be finite;
        K >= 2 and M >= 1.
    alternative_labels, criterion_labels : sequence of str, optional
        Row and column names. Generated as ``A1..AK`` / ``C1..CM`` when
        omitted.
    """

    values: np.ndarray
    alternative_labels: list[str] = field(default=None)
    criterion_labels: list[str] = field(default=None)

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.values.ndim != 2:
            raise ValueError("decision matrix must be two-dimensional")
        k, m = self.values.shape
        if k < 2:
            raise ValueError(f"need at least 2 alternatives, got {k}")
        if m < 1:
            raise ValueError("need at least 1 criterion")
        if not np.isfinite(self.values).all():
            raise ValueError("decision matrix contains NaN or infinite entries")
        if self.alternative_labels is None:
            self.alternative_labels = [f"A{i + 1}" for i in range(k)]
        else:
            self.alternative_labels = [str(s) for s in self.alternative_labels]
        if self.criterion_labels is None:
            self.criterion_labels = [f"C{j + 1}" for j in range(m)]
        else:
            self.criterion_labels = [str(s) for s in self.criterion_labels]
        if len(self.alternative_labels) != k:
            raise ValueError(
                f"got {len(self.alternative_labels)} alternative labels for {k} rows"
            )
        if len(self.criterion_labels) != m:
            raise ValueError(
                f"got {len(self.criterion_labels)} criterion labels for {m} columns"
            )

    @property
    def n_alternatives(self) -> int:
        return self.values.shape[0]

    @property
    def n_criteria(self) -> int:
        return self.values.shape[1]


@dataclass
class WeightVector:
    """Non-negative criterion importances, stored normalized to sum 1."""

    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        if self.weights.size == 0:
            raise ValueError("weight vector is empty")
        if not np.isfinite(self.weights).all():
            raise ValueError("weights contain NaN or infinite entries")
        if (self.weights < 0).any():
            raise ValueError("weights must be non-negative")
        total = self.weights.sum()
        if total <= 0:
            raise ValueError("at least one weight must be positive")
        self.weights = self.weights / total

    @classmethod
    def uniform(cls, m: int) -> "WeightVector":
        return cls(np.full(m, 1.0 / m))

    def __len__(self) -> int:
        return self.weights.size


@dataclass
class IdealSolutions:
    """Column-wise best (positive) and worst (negative) profiles."""

    positive: np.ndarray
    negative: np.ndarray

    def __post_init__(self):
        self.positive = np.asarray(self.positive, dtype=float).ravel()
        self.negative = np.asarray(self.negative, dtype=float).ravel()
        if self.positive.shape != self.negative.shape:
            raise ValueError("ideal vectors must have equal length")
        if (self.positive < self.negative).any():
            raise ValueError("positive ideal must dominate negative ideal")


@dataclass
class Ranking:
    """Alternatives ordered best first, with their similarity scores.

    ``order[r]`` is the (0-based) alternative index holding rank ``r``;
    ``scores[i]`` is the similarity of alternative ``i``. Scores read along
    ``order`` are non-increasing; exact ties are resolved by ascending
    alternative index.
    """

    order: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        self.order = np.asarray(self.order, dtype=int).ravel()
        self.scores = np.asarray(self.scores, dtype=float).ravel()
        k = self.scores.size
        if self.order.size != k:
            raise ValueError("order and scores must have equal length")
        if not np.array_equal(np.sort(self.order), np.arange(k)):
            raise ValueError("order is not a permutation of the alternatives")

    @property
    def n_alternatives(self) -> int:
        return self.order.size

    def position_of(self, alternative: int) -> int:
        """Rank position (0 = best) of the given alternative index."""
        return int(np.flatnonzero(self.order == alternative)[0])


def _weight_array(w, m: int) -> np.ndarray:
    """Accept a WeightVector or a raw array; raw arrays are used as given."""
    arr = w.weights if isinstance(w, WeightVector) else np.asarray(w, dtype=float).ravel()
    if arr.size != m:
        raise ValueError(f"expected {m} weights, got {arr.size}")
    return arr


def normalize(decision: DecisionMatrix) -> np.ndarray:
    """Scale every criterion column of the decision matrix to unit Euclidean norm.

    Raises
    ------
    ZeroColumnError
        If a criterion column is identically zero.
    """
    values = decision.values
    norms = np.sqrt((values**2).sum(axis=0))
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        label = decision.criterion_labels[zero[0]]
        raise ZeroColumnError(f"criterion {label!r} is identically zero")
    return values / norms


def apply_weights(normalized: np.ndarray, w) -> np.ndarray:
    """Multiply each normalized column by its criterion weight."""
    normalized = np.asarray(normalized, dtype=float)
    weights = _weight_array(w, normalized.shape[1])
    return normalized * weights


def ideal_solutions(profiles: np.ndarray) -> IdealSolutions:
    """Column-wise maxima and minima of the given profile matrix."""
    profiles = np.atleast_2d(np.asarray(profiles, dtype=float))
    if profiles.size == 0:
        raise ValueError("empty profile matrix")
    return IdealSolutions(profiles.max(axis=0), profiles.min(axis=0))


def euclidean_distances(
    profiles: np.ndarray, ideals: IdealSolutions
) -> tuple[np.ndarray, np.ndarray]:
    """Euclidean distance of every row to the positive and negative ideals."""
    profiles = np.atleast_2d(np.asarray(profiles, dtype=float))
    if profiles.shape[1] != ideals.positive.size:
        raise ValueError("profiles and ideals have mismatched dimensions")
    d_plus = np.sqrt(((profiles - ideals.positive) ** 2).sum(axis=1))
    d_minus = np.sqrt(((profiles - ideals.negative) ** 2).sum(axis=1))
    return d_plus, d_minus


def similarity(d_plus: np.ndarray, d_minus: np.ndarray) -> np.ndarray:
    """Relative closeness u = D- / (D+ + D-), in [0, 1].

    A degenerate alternative with D+ = D- = 0 (all alternatives identical)
    gets u = 0.5 and emits a DegenerateAlternativesWarning.
    """
    d_plus = np.asarray(d_plus, dtype=float)
    d_minus = np.asarray(d_minus, dtype=float)
    denom = d_plus + d_minus
    degenerate = denom == 0.0
    if degenerate.any():
        warnings.warn(
            "alternative(s) with zero distance to both ideals; similarity set to 0.5",
            DegenerateAlternativesWarning,
            stacklevel=2,
        )
    safe = np.where(degenerate, 1.0, denom)
    return np.where(degenerate, 0.5, d_minus / safe)


def _rank_from_scores(scores: np.ndarray) -> Ranking:
    # stable sort on -scores: descending scores, ties by ascending index
    order = np.argsort(-scores, kind="stable")
    return Ranking(order=order, scores=scores)


def topsis_euclidean(decision: DecisionMatrix, w: WeightVector) -> Ranking:
    """Classical TOPSIS: ideals and distances in weighted normalized space."""
    weighted = apply_weights(normalize(decision), w)
    ideals = ideal_solutions(weighted)
    d_plus, d_minus = euclidean_distances(weighted, ideals)
    return _rank_from_scores(similarity(d_plus, d_minus))


def covariance(normalized: np.ndarray) -> np.ndarray:
    """Unbiased sample covariance (divisor K-1) of the normalized rows."""
    normalized = np.atleast_2d(np.asarray(normalized, dtype=float))
    if normalized.shape[0] < 2:
        raise ValueError("covariance needs at least 2 alternatives")
    return np.atleast_2d(np.cov(normalized, rowvar=False, ddof=1))


def mahalanobis_distances(
    normalized: np.ndarray,
    ideals: IdealSolutions,
    w,
    sigma: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Weighted Mahalanobis distances of every row to both ideals.

    Distances are sqrt((r - r_ideal)^T D S^-1 D (r - r_ideal)) with
    D = diag(weights) and S the criterion covariance, regularized with a
    small ridge before inversion.

    Raises
    ------
    SingularCovarianceError
        If the covariance stays ill-conditioned after regularization.
    """
    normalized = np.atleast_2d(np.asarray(normalized, dtype=float))
    m = normalized.shape[1]
    weights = _weight_array(w, m)
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    if sigma.shape != (m, m):
        raise ValueError(f"covariance must be {m}x{m}, got {sigma.shape}")

    ridge = COVARIANCE_RIDGE * np.trace(sigma) / m
    regularized = sigma + ridge * np.eye(m)
    cond = np.linalg.cond(regularized)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularCovarianceError(
            f"criterion covariance is singular (condition number {cond:.3e})"
        )
    inv = np.linalg.inv(regularized)

    def dist(ideal):
        delta = (normalized - ideal) * weights
        quad = np.einsum("ij,jk,ik->i", delta, inv, delta)
        return np.sqrt(np.clip(quad, 0.0, None))

    return dist(ideals.positive), dist(ideals.negative)


def topsis_mahalanobis(decision: DecisionMatrix, w: WeightVector) -> Ranking:
    """TOPSIS with Mahalanobis distances.

    Ideals are taken from the unweighted normalized data; the weights enter
    the metric as diag(w) on both sides of the inverse covariance.
    """
    normalized = normalize(decision)
    ideals = ideal_solutions(normalized)
    sigma = covariance(normalized)
    d_plus, d_minus = mahalanobis_distances(normalized, ideals, w, sigma)
    return _rank_from_scores(similarity(d_plus, d_minus))
