"""Short-term recommendation quality measured on a static network."""
from __future__ import annotations

import math
from typing import Optional, Sequence

import attr
import funcy as fn
import numpy as np

from rec_feedback.engine import RewiringConfig, replica_seed
from rec_feedback.network import BipartiteNetwork, Edge
from rec_feedback.recommender import (
    DEFAULT_LIST_LENGTH, RecommendationList, top_list
)
from rec_feedback.runner import (
    GiniSummary, RunTask, check_replicas, parallel_map, run_all
)


Lists = dict[int, RecommendationList]


def _open_unit_interval(_, attribute, value):
    if not 0 < value < 1:
        raise ValueError(f"{attribute.name} must lie in (0, 1), got {value}.")


@attr.s(auto_detect=True, auto_attribs=True, frozen=True, kw_only=True)
class SplitSpec:
    probe_fraction: float = attr.ib(default=0.1, converter=float,
                                    validator=_open_unit_interval)
    n_divisions: int = attr.ib(default=10, validator=attr.validators.ge(1))
    seed: int = attr.ib(default=0, validator=attr.validators.ge(0))


@attr.s(auto_detect=True, auto_attribs=True, frozen=True)
class EvaluationReport:
    precision: float
    precision_per_division: tuple[float, ...]
    short_term_diversity: float
    diversity_per_division: tuple[float, ...]
    list_length: int
    theta: float


def split_train_probe(net: BipartiteNetwork,
                      spec: SplitSpec,
                      division_index: int
                      ) -> tuple[BipartiteNetwork, frozenset[Edge]]:
    """Hold out floor(probe_fraction * E) uniformly sampled links.

    Returns the training network (same id spaces and timestamps) and the
    probe links as (user, item) pairs.
    """
    links = list(net.links())
    n_probe = math.floor(spec.probe_fraction * len(links))
    if n_probe == 0:
        raise ValueError("Probe fraction leaves the probe set empty.")

    rng = np.random.default_rng([spec.seed, division_index])
    in_probe = np.zeros(len(links), dtype=bool)
    in_probe[rng.choice(len(links), size=n_probe, replace=False)] = True

    probe = frozenset((x.user, x.item)
                      for x, held in zip(links, in_probe) if held)
    train = BipartiteNetwork.from_links(
        [x for x, held in zip(links, in_probe) if not held],
        n_users=net.n_users,
        n_items=net.n_items,
        clock=net.clock,
        seed=net.seed,
        user_labels=net.user_labels,
        item_labels=net.item_labels,
    )
    return train, probe


def recommendation_lists(train: BipartiteNetwork,
                         theta: float,
                         list_length: int = DEFAULT_LIST_LENGTH,
                         users: Optional[Sequence[int]] = None,
                         rng: Optional[np.random.Generator] = None) -> Lists:
    """Top lists of `users` (default: all users with links) on `train`."""
    if rng is None:
        rng = np.random.default_rng(0)
    if users is None:
        users = np.flatnonzero(train.user_degrees > 0).tolist()
    return {u: top_list(train, u, theta, list_length, rng) for u in users}


def precision_at_L(train: BipartiteNetwork,
                   probe: frozenset[Edge],
                   theta: float,
                   list_length: int = DEFAULT_LIST_LENGTH,
                   lists: Optional[Lists] = None,
                   rng: Optional[np.random.Generator] = None) -> float:
    """Mean of d_i / L over users with probe links and training links.

    d_i counts the user's probe items present in their training top list.
    """
    if list_length < 1:
        raise ValueError("list_length must be at least 1.")
    probe_items = fn.walk_values(set, fn.group_values(probe))
    degrees = train.user_degrees
    eligible = sorted(u for u in probe_items if degrees[u] > 0)
    if not eligible:
        raise ValueError("No user has both probe and training links.")

    if lists is None:
        lists = recommendation_lists(train, theta, list_length, eligible, rng)
    hits = [len(probe_items[u].intersection(lists[u].items))
            for u in eligible]
    return float(np.mean(hits) / list_length)


def short_term_diversity(train: BipartiteNetwork,
                         theta: float,
                         list_length: int = DEFAULT_LIST_LENGTH,
                         lists: Optional[Lists] = None,
                         rng: Optional[np.random.Generator] = None) -> float:
    """Mean training degree of recommended items, counted per list entry."""
    if lists is None:
        lists = recommendation_lists(train, theta, list_length, rng=rng)
    recommended = fn.lcat(recs.items for recs in lists.values())
    if not recommended:
        raise ValueError("Every recommendation list is empty.")
    return float(train.degrees[recommended].mean())


def _evaluate_division(args) -> tuple[float, float]:
    net, spec, index, theta, list_length = args
    train, probe = split_train_probe(net, spec, index)
    rng = np.random.default_rng([spec.seed, index, 1])
    lists = recommendation_lists(train, theta, list_length, rng=rng)
    return (precision_at_L(train, probe, theta, list_length, lists=lists),
            short_term_diversity(train, theta, list_length, lists=lists))


def evaluate(net: BipartiteNetwork,
             spec: SplitSpec,
             theta: float,
             list_length: int = DEFAULT_LIST_LENGTH,
             jobs: int = 1) -> EvaluationReport:
    """Average precision and diversity over `spec.n_divisions` splits."""
    tasks = [(net, spec, i, theta, list_length)
             for i in range(spec.n_divisions)]
    results = parallel_map(_evaluate_division, tasks, jobs)
    precisions, diversities = zip(*results)
    return EvaluationReport(
        precision=float(np.mean(precisions)),
        precision_per_division=tuple(precisions),
        short_term_diversity=float(np.mean(diversities)),
        diversity_per_division=tuple(diversities),
        list_length=list_length,
        theta=float(theta),
    )


# ------------------------ Accuracy vs. inequality ------------------------


@attr.s(auto_detect=True, auto_attribs=True, frozen=True)
class TradeoffPoint:
    theta: float
    precision: float
    short_term_diversity: float
    gini_mean: float
    gini_std: float
    initial_gini: float
    n_replicas: int
    n_stationary: int
    terminal: str


def tradeoff_curve(net: BipartiteNetwork,
                   theta_grid: Sequence[float],
                   config: RewiringConfig,
                   split: SplitSpec = SplitSpec(),
                   replicas: int = 1,
                   jobs: int = 1) -> list[TradeoffPoint]:
    """Short-term precision on `net` and long-run G* for every theta.

    Precision is measured on the original network before any rewiring;
    G* comes from `replicas` runs to stationarity started from `net`.
    """
    theta_grid = list(theta_grid)
    if not theta_grid:
        raise ValueError("Empty theta grid.")
    check_replicas(replicas)

    tasks = [RunTask(net, attr.evolve(config, theta=theta,
                                      seed=replica_seed(config.seed, r)))
             for theta in theta_grid for r in range(replicas)]
    outcomes = run_all(tasks, jobs)

    points = []
    for j, theta in enumerate(theta_grid):
        chunk = outcomes[j * replicas:(j + 1) * replicas]
        summary = GiniSummary.from_traces([o.trace for o in chunk])
        report = evaluate(net, split, theta, config.list_length, jobs)
        points.append(TradeoffPoint(
            theta=float(theta),
            precision=report.precision,
            short_term_diversity=report.short_term_diversity,
            terminal=summary.terminal,
            **attr.asdict(summary),
        ))
    return points


def precision_sacrifice(curve: Sequence[TradeoffPoint],
                        gini_target: float) -> float:
    """Fraction of the optimal precision lost by requiring G* <= target."""
    best = max(p.precision for p in curve)
    feasible = [p.precision for p in curve if p.gini_mean <= gini_target]
    if not feasible:
        raise ValueError(f"No theta reaches G* <= {gini_target}.")
    return 1 - max(feasible) / best


__all__ = [
    'EvaluationReport',
    'SplitSpec',
    'TradeoffPoint',
    'evaluate',
    'precision_at_L',
    'precision_sacrifice',
    'recommendation_lists',
    'short_term_diversity',
    'split_train_probe',
    'tradeoff_curve',
]
