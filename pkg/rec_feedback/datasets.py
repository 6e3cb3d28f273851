"""Ratings ingest, synthetic networks and network snapshots.

Snapshot layout for `path = network.csv`:
  - network.csv       `user,item,timestamp`, one link per row by timestamp.
  - network.json      header {n_users, n_items, n_links, clock, seed}.
  - network.ids.json  external labels {"users": [...], "items": [...]}.
"""
from __future__ import annotations

import io
import json
import logging
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd
from bidict import bidict

from rec_feedback.network import BipartiteNetwork, Link, relabel


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
SNAPSHOT_COLUMNS = ['user', 'item', 'timestamp']


class IngestError(ValueError):
    def __init__(self, message: str, line: int = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


# ------------------------------ Ratings ----------------------------------


def read_ratings(path: PathLike) -> list[tuple[int, int, float]]:
    """Parse `user item rating [timestamp]` lines (whitespace separated).

    Blank lines and lines starting with '#' are skipped.
    """
    ratings = []
    with open(path) as handle:
        for number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            fields = line.split()
            if len(fields) not in (3, 4):
                raise IngestError(f"expected 3 or 4 fields, got {line!r}",
                                  number)
            try:
                user, item = int(fields[0]), int(fields[1])
                rating = float(fields[2])
            except ValueError:
                raise IngestError(f"unparseable line {line!r}", number)
            if user < 0 or item < 0:
                raise IngestError("ids must be nonnegative", number)
            ratings.append((user, item, rating))
    return ratings


def ingest(path: PathLike, threshold: float = 3,
           seed: int = 0) -> BipartiteNetwork:
    """Network with a link for every rating >= threshold.

    Every item appearing in the file stays in the item universe even
    without links; users need at least one link. Repeated (user, item)
    pairs collapse into one link.
    """
    if not 1 <= threshold <= 5:
        raise IngestError(f"threshold must lie in [1, 5], got {threshold}")
    ratings = read_ratings(path)
    edges = list(dict.fromkeys((u, i) for u, i, r in ratings
                               if r >= threshold))
    if not edges:
        raise IngestError(f"no rating >= {threshold} in {path}")

    users = relabel(u for u, _ in edges)
    items = relabel(i for _, i, _ in ratings)
    dropped = len({u for u, _, _ in ratings}) - len(users)
    if dropped:
        logger.warning("Dropped %d users without ratings >= %s.",
                       dropped, threshold)

    net = BipartiteNetwork.from_edge_list(
        [(users[u], items[i]) for u, i in edges],
        seed=seed,
        n_users=len(users),
        n_items=len(items),
        user_labels=users.inv,
        item_labels=items.inv,
    )
    logger.info("Ingested %s: %d users, %d items, %d links.", path,
                net.n_users, net.n_items, net.n_links)
    return net


# ----------------------------- Synthetic ---------------------------------


def synthetic_network(n_users: int, n_items: int, n_links: int,
                      skew: float = 1.0, seed: int = 0) -> BipartiteNetwork:
    """Random network whose item attractiveness decays as rank^-skew.

    User degrees are 1 + a uniform multinomial share of the remaining
    links (capped at n_items); each user draws their items without
    replacement proportionally to attractiveness.
    """
    if not n_users <= n_links <= n_users * n_items:
        raise ValueError("Need n_users <= n_links <= n_users * n_items.")
    if skew < 0:
        raise ValueError("skew must be nonnegative.")
    rng = np.random.default_rng(seed)

    degrees = 1 + rng.multinomial(n_links - n_users,
                                  np.full(n_users, 1 / n_users))
    overflow = int(np.maximum(degrees - n_items, 0).sum())
    degrees = np.minimum(degrees, n_items)
    while overflow:
        room = np.flatnonzero(degrees < n_items)
        grow = rng.choice(room, size=min(overflow, len(room)), replace=False)
        degrees[grow] += 1
        overflow -= len(grow)

    weights = (rng.permutation(n_items) + 1.0) ** -skew
    weights /= weights.sum()
    edges = [(u, int(i)) for u, d in enumerate(degrees)
             for i in rng.choice(n_items, size=d, replace=False, p=weights)]
    return BipartiteNetwork.from_edge_list(edges, seed=seed,
                                           n_users=n_users, n_items=n_items)


# ----------------------------- Snapshots ---------------------------------


def snapshot_frame(net: BipartiteNetwork) -> pd.DataFrame:
    return pd.DataFrame([(x.user, x.item, x.timestamp) for x in net.links()],
                        columns=SNAPSHOT_COLUMNS)


def snapshot_text(net: BipartiteNetwork) -> str:
    """Canonical CSV text of the links (also hashed into manifests)."""
    return snapshot_frame(net).to_csv(index=False, lineterminator='\n')


def snapshot_header(net: BipartiteNetwork) -> dict:
    return {'n_users': net.n_users, 'n_items': net.n_items,
            'n_links': net.n_links, 'clock': net.clock, 'seed': net.seed}


def sidecar_paths(path: PathLike) -> tuple[Path, Path]:
    path = Path(path)
    return path.with_suffix('.json'), path.with_suffix('.ids.json')


def save_snapshot(net: BipartiteNetwork, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header_path, ids_path = sidecar_paths(path)

    path.write_text(snapshot_text(net))
    header_path.write_text(json.dumps(snapshot_header(net), indent=2) + '\n')
    labels = {
        'users': [net.user_labels[u] for u in range(net.n_users)],
        'items': [net.item_labels[i] for i in range(net.n_items)],
    }
    ids_path.write_text(json.dumps(labels) + '\n')
    return path


def load_snapshot(path: PathLike) -> BipartiteNetwork:
    path = Path(path)
    header_path, ids_path = sidecar_paths(path)
    header = json.loads(header_path.read_text())
    frame = pd.read_csv(io.StringIO(path.read_text()), dtype='int64')
    if list(frame.columns) != SNAPSHOT_COLUMNS:
        raise IngestError(f"{path}: expected columns {SNAPSHOT_COLUMNS}")
    if len(frame) != header['n_links']:
        raise IngestError(f"{path}: header announces {header['n_links']} "
                          f"links, found {len(frame)}")

    labels = {'users': None, 'items': None}
    if ids_path.exists():
        labels = json.loads(ids_path.read_text())

    def to_bidict(values):
        return None if values is None else bidict(enumerate(values))

    return BipartiteNetwork.from_links(
        [Link(int(u), int(i), int(t)) for u, i, t in
         frame.itertuples(index=False)],
        n_users=header['n_users'],
        n_items=header['n_items'],
        clock=header['clock'],
        seed=header['seed'],
        user_labels=to_bidict(labels['users']),
        item_labels=to_bidict(labels['items']),
    )


__all__ = ['IngestError', 'ingest', 'load_snapshot', 'read_ratings',
           'save_snapshot', 'snapshot_header', 'snapshot_text',
           'synthetic_network']
