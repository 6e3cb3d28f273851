"""Item choice made independently of recommendation."""
from __future__ import annotations

from typing import Callable, Collection, Literal

import numpy as np

from rec_feedback.network import BipartiteNetwork


AttachmentMode = Literal['preferential', 'random']
ATTACHMENT_ALIASES = {'pa': 'preferential', 'ra': 'random'}


def _check_room(net: BipartiteNetwork, excluded: Collection[int]):
    if len(set(excluded)) >= net.n_items:
        raise ValueError("Every item is excluded.")


def preferential_pick(net: BipartiteNetwork,
                      excluded: Collection[int],
                      rng: np.random.Generator) -> int:
    """Pick item a with probability proportional to k_a + 1."""
    _check_room(net, excluded)
    weights = net.degrees.astype(np.float64) + 1
    weights[list(excluded)] = 0

    cumulative = np.cumsum(weights)
    draw = rng.random() * cumulative[-1]
    item = int(np.searchsorted(cumulative, draw, side='right'))
    return min(item, net.n_items - 1)


def random_pick(net: BipartiteNetwork,
                excluded: Collection[int],
                rng: np.random.Generator) -> int:
    """Pick uniformly among the items not in `excluded`."""
    _check_room(net, excluded)
    excluded = set(excluded)
    if 2 * len(excluded) <= net.n_items:
        while True:  # Rejection: accepts with probability >= 1/2.
            item = int(rng.integers(net.n_items))
            if item not in excluded:
                return item

    allowed = np.setdiff1d(np.arange(net.n_items), list(excluded))
    return int(allowed[rng.integers(len(allowed))])


Picker = Callable[[BipartiteNetwork, Collection[int], np.random.Generator],
                  int]
PICKERS: dict[str, Picker] = {
    'preferential': preferential_pick,
    'random': random_pick,
}


def attachment_picker(mode: AttachmentMode) -> Picker:
    mode = ATTACHMENT_ALIASES.get(mode, mode)
    if mode not in PICKERS:
        raise ValueError(f"Unknown attachment mode {mode!r}.")
    return PICKERS[mode]


__all__ = ['AttachmentMode', 'ATTACHMENT_ALIASES', 'attachment_picker',
           'preferential_pick', 'random_pick']
