"""Inequality of item popularity."""
from __future__ import annotations

import math

import attr
import numpy as np
from numpy.typing import ArrayLike


TOP_FRACTION = 0.01


def _as_degrees(degrees: ArrayLike) -> np.ndarray:
    degrees = np.asarray(degrees, dtype=np.float64)
    if degrees.ndim != 1 or len(degrees) == 0:
        raise ValueError("Expected a non-empty degree vector.")
    if np.any(degrees < 0):
        raise ValueError("Degrees must be nonnegative.")
    if degrees.sum() <= 0:
        raise ValueError("Undefined for an all-zero degree vector.")
    return degrees


def gini(degrees: ArrayLike) -> float:
    """Gini coefficient of item degrees.

    G = 2 sum_a a k_a / (M sum_a k_a) - (M + 1) / M with k sorted ascending
    and a counted from 1. Its maximum for finite M is (M - 1) / M.
    """
    k = np.sort(_as_degrees(degrees))
    m = len(k)
    ranks = np.arange(1, m + 1, dtype=np.float64)
    return float(2 * np.dot(ranks, k) / (m * k.sum()) - (m + 1) / m)


def herfindahl(degrees: ArrayLike) -> float:
    k = _as_degrees(degrees)
    shares = k / k.sum()
    return float(np.dot(shares, shares))


def top_share(degrees: ArrayLike, fraction: float = TOP_FRACTION) -> float:
    """Share of links held by the ceil(fraction * M) most popular items."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1].")
    k = _as_degrees(degrees)
    n_top = math.ceil(fraction * len(k))
    top = np.partition(k, len(k) - n_top)[len(k) - n_top:]
    return float(top.sum() / k.sum())


def popularity_rank_curve(degrees: ArrayLike) -> list[tuple[float, float]]:
    """(r / M, k_(r) / sum k) with items ranked by descending degree."""
    k = _as_degrees(degrees)
    ranked = np.sort(k)[::-1]
    ranks = np.arange(1, len(k) + 1) / len(k)
    return list(zip(ranks.tolist(), (ranked / k.sum()).tolist()))


@attr.s(auto_detect=True, auto_attribs=True, frozen=True)
class InequalitySnapshot:
    sweep: int
    gini: float
    herfindahl: float
    top1_share: float

    @staticmethod
    def measure(sweep: int, degrees: ArrayLike) -> InequalitySnapshot:
        return InequalitySnapshot(sweep=sweep,
                                  gini=gini(degrees),
                                  herfindahl=herfindahl(degrees),
                                  top1_share=top_share(degrees))


__all__ = ['InequalitySnapshot', 'TOP_FRACTION', 'gini', 'herfindahl',
           'popularity_rank_curve', 'top_share']
