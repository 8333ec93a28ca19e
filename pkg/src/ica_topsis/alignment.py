"""Permutation and sign disambiguation of separation results.

A separating matrix recovers latent variables only up to reordering and
sign flips. Under the assumption that each latent variable dominates its
own criterion positively (every row of the true mixing matrix has its
largest-magnitude entry, positive, on the diagonal), both ambiguities can
be undone: columns of the estimated mixing matrix are greedily permuted so
each row's dominant entry lands on the diagonal, then columns with a
negative diagonal entry are negated together with the matching source row.
Both steps only reindex and negate, so the mixing-times-sources product is
preserved bit for bit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import TieBreakWarning, ZeroDiagonalError
from .ica import SeparationResult

__all__ = [
    "AdjustedSeparation",
    "correct_permutation",
    "correct_sign",
    "resolve",
]


@dataclass
class AdjustedSeparation:
    """Mixing matrix and sources after permutation/sign correction.

    ``permutation_applied[i]`` is the original source index now at
    position ``i``; ``signs_applied`` holds the per-position factors of
    -1 or +1 applied to columns and source rows.
    """

    mixing_adjusted: np.ndarray
    sources_adjusted: np.ndarray
    permutation_applied: np.ndarray
    signs_applied: np.ndarray

    def __post_init__(self):
        self.mixing_adjusted = np.asarray(self.mixing_adjusted, dtype=float)
        self.sources_adjusted = np.asarray(self.sources_adjusted, dtype=float)
        self.permutation_applied = np.asarray(self.permutation_applied, dtype=int)
        self.signs_applied = np.asarray(self.signs_applied, dtype=float)
        n = self.mixing_adjusted.shape[0]
        if not np.array_equal(np.sort(self.permutation_applied), np.arange(n)):
            raise ValueError("permutation_applied is not a bijection")
        if not np.isin(self.signs_applied, (-1.0, 1.0)).all():
            raise ValueError("signs_applied entries must be -1 or +1")
        if (np.diag(self.mixing_adjusted) <= 0).any():
            raise ValueError("adjusted mixing matrix must have a positive diagonal")


def _check_pair(mixing, sources):
    mixing = np.array(mixing, dtype=float)
    sources = np.array(sources, dtype=float)
    if mixing.ndim != 2 or mixing.shape[0] != mixing.shape[1]:
        raise ValueError(f"mixing matrix must be square, got {mixing.shape}")
    if not np.isfinite(mixing).all():
        raise ValueError("mixing matrix contains NaN or infinite entries")
    if sources.ndim != 2 or sources.shape[0] != mixing.shape[0]:
        raise ValueError(
            f"sources must have one row per mixing column, got {sources.shape}"
        )
    return mixing, sources


def correct_permutation(mixing, sources):
    """Permute mixing columns so each row's dominant entry is diagonal.

    Rows are processed in order; each picks, among the columns not yet
    claimed by an earlier row, the one holding its largest absolute value.
    The matching swap is applied to the source rows so the mixing-sources
    product is unchanged. Exact ties go to the lowest column index with a
    TieBreakWarning.

    Returns
    -------
    (mixing_permuted, sources_permuted, permutation) where
    ``permutation[i]`` is the original column index moved to position i.
    """
    mixing, sources = _check_pair(mixing, sources)
    n = mixing.shape[0]
    permutation = np.arange(n)
    for i in range(n):
        row = np.abs(mixing[i, i:])
        q = i + int(np.argmax(row))
        if (row == row[q - i]).sum() > 1:
            warnings.warn(
                f"row {i}: tie for the dominant column, keeping lowest index",
                TieBreakWarning,
                stacklevel=2,
            )
        if q != i:
            mixing[:, [i, q]] = mixing[:, [q, i]]
            sources[[i, q], :] = sources[[q, i], :]
            permutation[[i, q]] = permutation[[q, i]]
    return mixing, sources, permutation


def correct_sign(mixing, sources, permutation=None) -> AdjustedSeparation:
    """Flip columns with a negative diagonal entry, negating their sources.

    Raises
    ------
    ZeroDiagonalError
        If a diagonal entry is exactly zero; the positivity assumption
        cannot be verified then.
    """
    mixing, sources = _check_pair(mixing, sources)
    n = mixing.shape[0]
    if permutation is None:
        permutation = np.arange(n)
    signs = np.ones(n)
    for d in range(n):
        if mixing[d, d] == 0.0:
            raise ZeroDiagonalError(
                f"diagonal entry {d} is zero after permutation correction"
            )
        if mixing[d, d] < 0.0:
            mixing[:, d] = -mixing[:, d]
            sources[d, :] = -sources[d, :]
            signs[d] = -1.0
    return AdjustedSeparation(
        mixing_adjusted=mixing,
        sources_adjusted=sources,
        permutation_applied=permutation,
        signs_applied=signs,
    )


def resolve(separation: SeparationResult) -> AdjustedSeparation:
    """Apply permutation then sign correction to a separation result."""
    permuted, sources, permutation = correct_permutation(
        separation.estimated_mixing, separation.sources
    )
    return correct_sign(permuted, sources, permutation)
