"""Normalized Kendall tau distance between two rankings.

The distance is the fraction of unordered alternative pairs placed in
opposite relative order by the two rankings: 0 for identical rankings,
1 for exact reversals. Inputs are total orders (ties are broken upstream),
so no tie convention is needed.
"""

from __future__ import annotations

import numpy as np

from .topsis import Ranking

__all__ = ["kendall_tau"]


def _order_array(ranking) -> np.ndarray:
    if isinstance(ranking, Ranking):
        return ranking.order
    order = np.asarray(ranking, dtype=int).ravel()
    if not np.array_equal(np.sort(order), np.arange(order.size)):
        raise ValueError("ranking is not a permutation of 0..K-1")
    return order


def kendall_tau(reference, candidate) -> float:
    """Fraction of alternative pairs ordered differently by the two rankings.

    Parameters
    ----------
    reference, candidate : Ranking or sequence of int
        Total orders over the same K alternatives (best first), either as
        Ranking objects or as permutations of ``0..K-1``.

    Returns
    -------
    float in [0, 1], a multiple of 1 / (K(K-1)/2).
    """
    ref = _order_array(reference)
    cand = _order_array(candidate)
    k = ref.size
    if cand.size != k:
        raise ValueError(f"rankings cover different alternative sets ({k} vs {cand.size})")
    if k < 2:
        raise ValueError("need at least 2 alternatives")

    # position of each alternative in the candidate ranking, read in
    # reference order; discordant pairs are exactly the inversions
    pos_cand = np.empty(k, dtype=int)
    pos_cand[cand] = np.arange(k)
    seq = pos_cand[ref]
    discordant = int(np.triu(seq[:, None] > seq[None, :], k=1).sum())
    return discordant / (k * (k - 1) / 2)
