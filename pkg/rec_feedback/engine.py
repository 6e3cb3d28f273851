"""Co-evolution of the network and the recommendations made on it.

In every sweep each user, in a fresh random order, redirects their oldest
link. With probability p the new item is drawn from the user's current
top-L list with probability proportional to 1 / rank; otherwise (and when
the list is empty) it comes from the configured attachment mode. Updates
are applied immediately, so later users in the sweep see earlier changes.
"""
from __future__ import annotations

import logging
from typing import Callable, Literal, Optional

import attr
import numpy as np

from rec_feedback.attachment import (
    ATTACHMENT_ALIASES, AttachmentMode, attachment_picker
)
from rec_feedback.metrics import InequalitySnapshot
from rec_feedback.network import BipartiteNetwork
from rec_feedback.recommender import (
    DEFAULT_LIST_LENGTH, rank_reciprocal_pick, top_list, unit_interval
)


logger = logging.getLogger(__name__)

Terminal = Literal['stationary', 'max_sweeps_reached']
Source = Literal['recommendation', 'attachment', 'fallback']
MetricsHook = Callable[[int, BipartiteNetwork], None]


def _attachment(mode: str) -> str:
    return ATTACHMENT_ALIASES.get(mode, mode)


@attr.s(auto_detect=True, auto_attribs=True, frozen=True, kw_only=True)
class RewiringConfig:
    """Knobs of a single run.

      - p: probability a rewiring follows the recommendation list.
      - theta: similarity exponent.
      - list_length: L, length of the recommendation list.
      - attachment: choice rule when not following recommendation.
      - max_sweeps: hard limit on the number of sweeps.
      - window: W, sweeps per averaging window of the plateau test.
      - eps: plateau tolerance in Gini units.
      - seed: seeds the run's random stream.
    """
    p: float = attr.ib(default=1.0, converter=float,
                       validator=unit_interval)
    theta: float = attr.ib(default=0.0, converter=float,
                           validator=unit_interval)
    list_length: int = attr.ib(default=DEFAULT_LIST_LENGTH,
                               validator=attr.validators.ge(1))
    attachment: AttachmentMode = attr.ib(
        default='preferential', converter=_attachment,
        validator=attr.validators.in_(['preferential', 'random']))
    max_sweeps: int = attr.ib(default=2000, validator=attr.validators.ge(0))
    window: int = attr.ib(default=50, validator=attr.validators.ge(1))
    eps: float = attr.ib(default=0.002, converter=float,
                         validator=attr.validators.gt(0))
    seed: int = attr.ib(default=0, validator=attr.validators.ge(0))


@attr.s(auto_detect=True, auto_attribs=True, frozen=True)
class RewireEvent:
    user: int
    item_old: int
    item_new: int
    source: Source


@attr.s(auto_detect=True, auto_attribs=True, frozen=True)
class SweepTrace:
    """Per-sweep inequality, sweep 0 being the initial state."""
    snapshots: tuple[InequalitySnapshot, ...]
    fallbacks: tuple[int, ...]
    terminal: Terminal
    window: int

    @property
    def ginis(self) -> np.ndarray:
        return np.array([s.gini for s in self.snapshots])

    @property
    def initial_gini(self) -> float:
        return self.snapshots[0].gini

    @property
    def stationary_gini(self) -> float:
        """G*: mean Gini over the last `window` sweeps."""
        return float(self.ginis[-self.window:].mean())

    @property
    def n_sweeps(self) -> int:
        return len(self.snapshots) - 1

    @property
    def stationary(self) -> bool:
        return self.terminal == 'stationary'


def replica_seed(seed: int, index: int) -> int:
    """Seed of the index-th independent replica of a run seeded `seed`."""
    state = np.random.SeedSequence([seed, index]).generate_state(1)
    return int(state[0])


def rewire_user(net: BipartiteNetwork,
                user: int,
                config: RewiringConfig,
                rng: np.random.Generator) -> RewireEvent:
    """Redirect the user's oldest link; user degree is unchanged."""
    oldest = net.oldest_link(user)
    excluded = net.stamps[user].keys()  # Contains the old item too.

    source = 'attachment'
    if rng.random() < config.p:
        recs = top_list(net, user, config.theta, config.list_length, rng)
        if len(recs) > 0:
            new_item = rank_reciprocal_pick(recs, rng)
            source = 'recommendation'
        else:
            source = 'fallback'
            logger.debug("Empty list for user %d, falling back.", user)

    if source != 'recommendation':
        new_item = attachment_picker(config.attachment)(net, excluded, rng)

    net.rewire_link(user, oldest.item, new_item)
    return RewireEvent(user, oldest.item, new_item, source)


def sweep(net: BipartiteNetwork,
          config: RewiringConfig,
          rng: np.random.Generator) -> int:
    """Rewire every user once in random order. Returns #fallbacks."""
    fallbacks = 0
    for user in rng.permutation(net.n_users):
        event = rewire_user(net, int(user), config, rng)
        fallbacks += event.source == 'fallback'
    return fallbacks


def is_stationary(ginis, window: int, eps: float) -> bool:
    """Compare the means of the last two windows of the Gini series."""
    if len(ginis) < 2 * window:
        return False
    last = np.mean(ginis[-window:])
    previous = np.mean(ginis[-2 * window:-window])
    return bool(abs(last - previous) < eps)


def run_to_stationarity(net: BipartiteNetwork,
                        config: RewiringConfig,
                        metrics_hook: Optional[MetricsHook] = None
                        ) -> SweepTrace:
    """Sweep `net` in place until the Gini coefficient plateaus.

    Inputs:
      - net: initial state; mutated into the terminal state.
      - config: run parameters, including the seed of the run.
      - metrics_hook: optional callback (sweep index, network) invoked on
          the initial state and after every sweep.

    Returns:
      SweepTrace with the terminal flag 'stationary' or
      'max_sweeps_reached'.
    """
    if np.any(net.user_degrees == 0):
        raise ValueError("Every user needs at least one link to rewire.")

    rng = np.random.default_rng(config.seed)
    snapshots = [InequalitySnapshot.measure(0, net.degrees)]
    fallbacks = [0]
    ginis = [snapshots[0].gini]
    if metrics_hook is not None:
        metrics_hook(0, net)

    terminal = 'max_sweeps_reached'
    for index in range(1, config.max_sweeps + 1):
        fallbacks.append(sweep(net, config, rng))
        snapshots.append(InequalitySnapshot.measure(index, net.degrees))
        ginis.append(snapshots[-1].gini)
        if metrics_hook is not None:
            metrics_hook(index, net)
        logger.debug("sweep %d: gini=%.4f", index, ginis[-1])

        if is_stationary(ginis, config.window, config.eps):
            terminal = 'stationary'
            break

    trace = SweepTrace(snapshots=tuple(snapshots),
                       fallbacks=tuple(fallbacks),
                       terminal=terminal,
                       window=config.window)
    logger.info("p=%g theta=%g: %s after %d sweeps, G*=%.4f",
                config.p, config.theta, terminal, trace.n_sweeps,
                trace.stationary_gini)
    return trace


__all__ = [
    'MetricsHook',
    'RewireEvent',
    'RewiringConfig',
    'SweepTrace',
    'is_stationary',
    'replica_seed',
    'rewire_user',
    'run_to_stationarity',
    'sweep',
]
