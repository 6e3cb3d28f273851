"""Timestamped bipartite user-item network.

Holds the adjacency structure the recommender and the rewiring dynamics act
on: per-user links ordered by age, item degrees and the item-item
common-neighbour counts C[a, b] = |Γ_a ∩ Γ_b|, all kept consistent under
`rewire_link`.
"""
from __future__ import annotations

import inspect
from functools import wraps
from typing import Any, Hashable, Iterable, Iterator, Optional

import attr
import networkx as nx
import numpy as np
from bidict import bidict
from more_itertools import duplicates_everseen
from scipy import sparse


Edge = tuple[int, int]


class LinkError(ValueError):
    """Raised when a link operation violates the network's contract."""

    def __init__(self, message: str, pair: Optional[Edge] = None):
        super().__init__(message)
        self.pair = pair


@attr.s(auto_detect=True, auto_attribs=True, frozen=True)
class Link:
    user: int
    item: int
    timestamp: int


def checked(func):
    """Check that `user*` / `item*` arguments are valid dense ids."""
    sig = inspect.signature(func)

    @wraps(func)
    def wrapper(self, *args, **kwargs):
        bound = sig.bind_partial(self, *args, **kwargs)
        for key, val in bound.arguments.items():
            if key.startswith('user') and not 0 <= val < self.n_users:
                raise ValueError(f"Unknown user id {val}.")
            elif key.startswith('item') and not 0 <= val < self.n_items:
                raise ValueError(f"Unknown item id {val}.")
        return func(self, *args, **kwargs)
    return wrapper


def identity_labels(n: int) -> bidict:
    return bidict(enumerate(range(n)))


def cooccurrence_from_edges(users, items, n_users: int,
                            n_items: int) -> np.ndarray:
    """Return the dense item-item common-neighbour matrix (zero diagonal)."""
    incidence = sparse.csr_matrix(
        (np.ones(len(users), dtype=np.int32), (users, items)),
        shape=(n_users, n_items),
    )
    counts = (incidence.T @ incidence).toarray().astype(np.int32)
    np.fill_diagonal(counts, 0)
    return counts


@attr.s(auto_attribs=True, eq=False)
class BipartiteNetwork:
    """Users, items and timestamped links between them.

    `stamps[u]` maps each item of user u to the link's timestamp. Its
    insertion order is the timestamp order, so the first entry is always
    the user's oldest link.
    """
    n_users: int
    n_items: int
    stamps: list[dict[int, int]]
    degrees: np.ndarray       # k_a, item degrees.
    cooccurrence: np.ndarray  # C_ab, common neighbours, zero diagonal.
    clock: int                # Next timestamp to issue.
    seed: Optional[int] = None
    user_labels: bidict = None  # Dense id <-> external label.
    item_labels: bidict = None

    def __attrs_post_init__(self):
        if self.user_labels is None:
            self.user_labels = identity_labels(self.n_users)
        if self.item_labels is None:
            self.item_labels = identity_labels(self.n_items)

    # ------------------------- Construction ---------------------------

    @staticmethod
    def from_edge_list(edges: Iterable[Edge],
                       seed: int = 0,
                       n_users: Optional[int] = None,
                       n_items: Optional[int] = None,
                       user_labels: Optional[bidict] = None,
                       item_labels: Optional[bidict] = None
                       ) -> BipartiteNetwork:
        """Build a network whose initial timestamps are a seeded random
        permutation of 1..E.

        Inputs:
          - edges: (user, item) pairs over dense ids starting at 0.
          - seed: seeds the timestamp permutation.
          - n_users, n_items: universe sizes. Default to max id + 1.
          - user_labels, item_labels: dense id -> external label mappings.
        """
        edges = [(int(u), int(i)) for u, i in edges]
        if not edges:
            raise LinkError("Edge list is empty.")
        dup = next(duplicates_everseen(edges), None)
        if dup is not None:
            raise LinkError(f"Duplicate edge {dup}.", pair=dup)

        rng = np.random.default_rng(seed)
        stamps = rng.permutation(len(edges)) + 1
        links = [Link(u, i, int(t)) for (u, i), t in zip(edges, stamps)]
        return BipartiteNetwork.from_links(
            links,
            n_users=n_users,
            n_items=n_items,
            clock=len(edges) + 1,
            seed=seed,
            user_labels=user_labels,
            item_labels=item_labels,
        )

    @staticmethod
    def from_links(links: Iterable[Link],
                   n_users: Optional[int] = None,
                   n_items: Optional[int] = None,
                   clock: Optional[int] = None,
                   seed: Optional[int] = None,
                   user_labels: Optional[bidict] = None,
                   item_labels: Optional[bidict] = None
                   ) -> BipartiteNetwork:
        """Build a network from links carrying their own timestamps."""
        links = sorted((Link(*x) if not isinstance(x, Link) else x
                        for x in links), key=lambda x: x.timestamp)
        if not links:
            raise LinkError("Link list is empty.")
        if n_users is None:
            n_users = 1 + max(x.user for x in links)
        if n_items is None:
            n_items = 1 + max(x.item for x in links)
        if clock is None:
            clock = links[-1].timestamp + 1

        dup = next(duplicates_everseen((x.user, x.item) for x in links), None)
        if dup is not None:
            raise LinkError(f"Duplicate edge {dup}.", pair=dup)
        dup = next(duplicates_everseen(x.timestamp for x in links), None)
        if dup is not None:
            raise LinkError(f"Timestamp {dup} issued twice.")
        if links[-1].timestamp >= clock:
            raise LinkError("Clock must exceed every issued timestamp.")

        stamps = [{} for _ in range(n_users)]
        for link in links:  # Sorted, so dict order == timestamp order.
            if not (0 <= link.user < n_users and 0 <= link.item < n_items):
                raise LinkError(f"Link {link} outside the id ranges.",
                                pair=(link.user, link.item))
            stamps[link.user][link.item] = link.timestamp

        users = np.fromiter((x.user for x in links), dtype=np.int64)
        items = np.fromiter((x.item for x in links), dtype=np.int64)
        return BipartiteNetwork(
            n_users=n_users,
            n_items=n_items,
            stamps=stamps,
            degrees=np.bincount(items, minlength=n_items).astype(np.int64),
            cooccurrence=cooccurrence_from_edges(users, items,
                                                 n_users, n_items),
            clock=clock,
            seed=seed,
            user_labels=user_labels,
            item_labels=item_labels,
        )

    def copy(self) -> BipartiteNetwork:
        return BipartiteNetwork(
            n_users=self.n_users,
            n_items=self.n_items,
            stamps=[dict(s) for s in self.stamps],
            degrees=self.degrees.copy(),
            cooccurrence=self.cooccurrence.copy(),
            clock=self.clock,
            seed=self.seed,
            user_labels=bidict(self.user_labels),
            item_labels=bidict(self.item_labels),
        )

    # ---------------------------- Queries ------------------------------

    @property
    def n_links(self) -> int:
        return int(self.degrees.sum())

    @property
    def density(self) -> float:
        return self.n_links / (self.n_users * self.n_items)

    @property
    def user_degrees(self) -> np.ndarray:
        return np.array([len(s) for s in self.stamps], dtype=np.int64)

    def links(self) -> Iterator[Link]:
        """Yield all links ordered by timestamp."""
        flat = ((t, u, i) for u, s in enumerate(self.stamps)
                for i, t in s.items())
        for t, u, i in sorted(flat):
            yield Link(u, i, t)

    def edges(self) -> set[Edge]:
        return {(u, i) for u, s in enumerate(self.stamps) for i in s}

    @checked
    def user_items(self, user: int) -> np.ndarray:
        return np.fromiter(self.stamps[user], dtype=np.int64,
                           count=len(self.stamps[user]))

    @checked
    def has_link(self, user: int, item: int) -> bool:
        return item in self.stamps[user]

    @checked
    def oldest_link(self, user: int) -> Link:
        """Return the minimum-timestamp link of `user`."""
        if not self.stamps[user]:
            raise LinkError(f"User {user} has no links.")
        item, stamp = next(iter(self.stamps[user].items()))
        return Link(user, item, stamp)

    @checked
    def common_neighbors(self, item1: int, item2: int) -> int:
        return int(self.cooccurrence[item1, item2])

    # --------------------------- Mutation ------------------------------

    @checked
    def rewire_link(self, user: int, item_old: int, item_new: int) -> Link:
        """Redirect (user, item_old) to (user, item_new) stamped `clock`.

        Degrees and common-neighbour counts are updated in O(user degree).
        Returns the new link.
        """
        links = self.stamps[user]
        if item_old not in links:
            raise LinkError(f"Link {(user, item_old)} does not exist.",
                            pair=(user, item_old))
        if item_new in links:
            raise LinkError(f"Link {(user, item_new)} already exists.",
                            pair=(user, item_new))

        del links[item_old]
        others = np.fromiter(links, dtype=np.int64, count=len(links))

        counts = self.cooccurrence
        counts[item_old, others] -= 1
        counts[others, item_old] -= 1
        counts[item_new, others] += 1
        counts[others, item_new] += 1
        self.degrees[item_old] -= 1
        self.degrees[item_new] += 1

        stamp, self.clock = self.clock, self.clock + 1
        links[item_new] = stamp  # Appended last => newest.
        return Link(user, item_new, stamp)

    # ---------------------------- Exports ------------------------------

    def to_networkx(self) -> nx.Graph:
        """Bipartite graph with nodes ('u', id) and ('i', id)."""
        graph = nx.Graph()
        graph.add_nodes_from((('u', u) for u in range(self.n_users)),
                             bipartite=0)
        graph.add_nodes_from((('i', i) for i in range(self.n_items)),
                             bipartite=1)
        graph.add_edges_from((('u', x.user), ('i', x.item),
                              {'timestamp': x.timestamp})
                             for x in self.links())
        return graph

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, BipartiteNetwork):
            return NotImplemented
        return (self.n_users, self.n_items, self.clock, self.seed) == \
            (other.n_users, other.n_items, other.clock, other.seed) \
            and self.stamps == other.stamps \
            and dict(self.user_labels) == dict(other.user_labels) \
            and dict(self.item_labels) == dict(other.item_labels)

    __hash__ = None


def recount_cooccurrence(net: BipartiteNetwork) -> np.ndarray:
    """Recompute C from scratch."""
    edges = sorted(net.edges())
    users = np.array([u for u, _ in edges], dtype=np.int64)
    items = np.array([i for _, i in edges], dtype=np.int64)
    return cooccurrence_from_edges(users, items, net.n_users, net.n_items)


def relabel(labels: Iterable[Hashable]) -> bidict:
    """Map external labels to dense ids, respecting their order if any."""
    labels = set(labels)
    try:
        labels = sorted(labels)
    except TypeError:
        labels = sorted(labels, key=repr)
    return bidict(enumerate(labels)).inv


__all__ = ['BipartiteNetwork', 'Link', 'LinkError', 'Edge',
           'recount_cooccurrence', 'relabel']
