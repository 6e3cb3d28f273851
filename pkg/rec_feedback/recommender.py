"""Item-based collaborative filtering with a tunable degree penalty.

Similarity of items a and b is

    s_ab = C_ab / (k_a k_b)^theta

which is the common-neighbour count for theta = 0, the cosine (Salton)
index for theta = 1/2 and the Leicht-Holme-Newman index for theta = 1.
The score of a candidate item a for user i is f_a = sum_b s_ab a_ib.
"""
from __future__ import annotations

from typing import Optional

import attr
import numpy as np

from rec_feedback.network import BipartiteNetwork


DEFAULT_LIST_LENGTH = 20


def unit_interval(_, attribute, value):
    if not 0 <= value <= 1:
        raise ValueError(f"{attribute.name} must lie in [0, 1], got {value}.")


@attr.s(auto_detect=True, auto_attribs=True, frozen=True)
class SimilarityParams:
    theta: float = attr.ib(default=0.0, converter=float,
                           validator=unit_interval)


@attr.s(auto_detect=True, auto_attribs=True, frozen=True)
class ItemScores:
    """Scores of all items a user is not linked to (ascending item ids)."""
    items: np.ndarray
    scores: np.ndarray

    def __len__(self) -> int:
        return len(self.items)

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.items.tolist(), self.scores.tolist()))


@attr.s(auto_detect=True, auto_attribs=True, frozen=True)
class RecommendationList:
    """Ranked top-L items, highest score first."""
    items: tuple[int, ...] = ()
    scores: tuple[float, ...] = ()

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(zip(self.items, self.scores))


def degree_weights(degrees: np.ndarray, theta: float) -> np.ndarray:
    """Return k^-theta, with 0 for zero-degree items.

    Zero-degree items have no common neighbours, so their weight never
    contributes to a score.
    """
    weights = np.zeros(len(degrees), dtype=np.float64)
    nonzero = degrees > 0
    weights[nonzero] = degrees[nonzero].astype(np.float64) ** -theta
    return weights


def item_similarity(net: BipartiteNetwork, item1: int, item2: int,
                    theta: float) -> float:
    if item1 == item2:
        raise ValueError("Self-similarity is undefined.")
    common = net.common_neighbors(item1, item2)
    if common == 0:
        return 0.0
    k1, k2 = net.degrees[item1], net.degrees[item2]
    assert k1 >= 1 and k2 >= 1, "Common neighbours imply positive degrees."
    return common / float(k1 * k2) ** theta


def icf_scores(net: BipartiteNetwork, user: int, theta: float) -> ItemScores:
    """Score every item the user is not linked to."""
    held = net.user_items(user)
    weights = degree_weights(net.degrees, theta)

    # f_a = k_a^-theta * sum_b C_ab k_b^-theta over the user's items b.
    raw = net.cooccurrence[:, held] @ weights[held]
    raw *= weights

    candidates = np.ones(net.n_items, dtype=bool)
    candidates[held] = False
    items = np.flatnonzero(candidates)
    return ItemScores(items=items, scores=raw[items])


def top_list(net: BipartiteNetwork,
             user: int,
             theta: float,
             list_length: int = DEFAULT_LIST_LENGTH,
             rng: Optional[np.random.Generator] = None
             ) -> RecommendationList:
    """Return the `list_length` best candidates with positive score.

    Ties are ordered by a random shuffle drawn from `rng`, so equal scores
    carry no id bias. The list is shorter than `list_length` (possibly
    empty) when too few candidates have a positive score.
    """
    if list_length < 1:
        raise ValueError("list_length must be at least 1.")
    if rng is None:
        rng = np.random.default_rng(0)

    scored = icf_scores(net, user, theta)
    positive = scored.scores > 0
    items, scores = scored.items[positive], scored.scores[positive]
    if len(items) == 0:
        return RecommendationList()

    if len(items) > list_length:
        # Keep everything tied with the L-th best before tie-breaking.
        cutoff = np.partition(scores, -list_length)[-list_length]
        keep = scores >= cutoff
        items, scores = items[keep], scores[keep]

    ties = rng.random(len(items))
    order = np.lexsort((ties, -scores))[:list_length]
    return RecommendationList(items=tuple(items[order].tolist()),
                              scores=tuple(scores[order].tolist()))


def rank_weights(n: int) -> np.ndarray:
    """Selection probabilities proportional to 1 / rank."""
    weights = 1.0 / np.arange(1, n + 1)
    return weights / weights.sum()


def rank_reciprocal_pick(recs: RecommendationList,
                         rng: np.random.Generator) -> int:
    if len(recs) == 0:
        raise ValueError("Cannot pick from an empty recommendation list.")
    rank = rng.choice(len(recs), p=rank_weights(len(recs)))
    return recs.items[rank]


__all__ = [
    'DEFAULT_LIST_LENGTH',
    'ItemScores',
    'RecommendationList',
    'SimilarityParams',
    'degree_weights',
    'icf_scores',
    'item_similarity',
    'rank_reciprocal_pick',
    'rank_weights',
    'top_list',
    'unit_interval',
]
