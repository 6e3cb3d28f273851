"""Parameter sweeps, hysteresis and data-density experiments.

Replica r of every grid point runs with seed `replica_seed(config.seed, r)`,
so all grid points share their random streams and tables do not depend on
the order or parallelism of execution.
"""
from __future__ import annotations

import logging
from typing import Literal, Mapping, Sequence, Union

import attr
import numpy as np
from bidict import bidict

from rec_feedback.engine import RewiringConfig, SweepTrace, replica_seed
from rec_feedback.metrics import gini
from rec_feedback.network import BipartiteNetwork
from rec_feedback.recommender import SimilarityParams
from rec_feedback.runner import GiniSummary, RunTask, check_replicas, run_all


logger = logging.getLogger(__name__)

DensityMode = Literal['link_removal', 'user_removal', 'item_removal']
DEFAULT_THETA_GRID = tuple(round(0.05 * i, 2) for i in range(21))
DEFAULT_P_GRID = (0.25, 0.5, 0.75, 1.0)
DEFAULT_REPLICAS = 5


def _summaries(outcomes, n_points: int, replicas: int) -> list[GiniSummary]:
    assert len(outcomes) == n_points * replicas
    return [GiniSummary.from_traces([o.trace for o in outcomes[
                j * replicas:(j + 1) * replicas]])
            for j in range(n_points)]


def _warn_unconverged(label: str, summary: GiniSummary):
    if summary.terminal != 'stationary':
        logger.warning("%s: %d of %d replicas hit max_sweeps", label,
                       summary.n_replicas - summary.n_stationary,
                       summary.n_replicas)


# ------------------------------ Sweeps -----------------------------------


@attr.s(auto_detect=True, auto_attribs=True, frozen=True)
class SweepRow:
    theta: float
    p: float
    attachment: str
    gini_mean: float
    gini_std: float
    initial_gini: float
    n_replicas: int
    n_stationary: int
    terminal: str


def p_theta_sweep(net: BipartiteNetwork,
                  theta_grid: Sequence[float],
                  p_grid: Sequence[float],
                  config: RewiringConfig,
                  replicas: int = DEFAULT_REPLICAS,
                  jobs: int = 1) -> list[SweepRow]:
    """Stationary Gini over the p x theta grid, rows ordered p-major."""
    theta_grid, p_grid = list(theta_grid), list(p_grid)
    if not theta_grid or not p_grid:
        raise ValueError("Empty parameter grid.")
    check_replicas(replicas)

    points = [attr.evolve(config, p=p, theta=theta)
              for p in p_grid for theta in theta_grid]
    tasks = [RunTask(net, attr.evolve(c, seed=replica_seed(config.seed, r)))
             for c in points for r in range(replicas)]
    logger.info("Sweeping %d grid points x %d replicas.",
                len(points), replicas)
    summaries = _summaries(run_all(tasks, jobs), len(points), replicas)

    rows = []
    for point, summary in zip(points, summaries):
        _warn_unconverged(f"p={point.p} theta={point.theta}", summary)
        rows.append(SweepRow(theta=point.theta, p=point.p,
                             attachment=point.attachment,
                             terminal=summary.terminal,
                             **attr.asdict(summary)))
    return rows


def theta_sweep(net: BipartiteNetwork,
                theta_grid: Sequence[float],
                p: float,
                config: RewiringConfig,
                replicas: int = DEFAULT_REPLICAS,
                jobs: int = 1) -> list[SweepRow]:
    """Stationary Gini G*(theta) at fixed p, one fresh copy per run."""
    return p_theta_sweep(net, theta_grid, [p], config, replicas, jobs)


def attachment_baseline(net: BipartiteNetwork,
                        config: RewiringConfig,
                        replicas: int = DEFAULT_REPLICAS,
                        jobs: int = 1) -> SweepRow:
    """G* when users never follow recommendation (p = 0)."""
    row, = p_theta_sweep(net, [config.theta], [0.0], config, replicas, jobs)
    return row


# ----------------------------- Hysteresis --------------------------------


def _theta_only_differs(instance, attribute, phase2):
    def strip(c):
        return attr.evolve(c, theta=0.0, seed=0)

    if strip(instance.phase1) != strip(phase2):
        raise ValueError("Hysteresis phases may only differ in theta/seed.")


@attr.s(auto_detect=True, auto_attribs=True, frozen=True)
class HysteresisProtocol:
    """Two stationary states and a theta grid continued from each.

    Phase 1 runs from the input network (e.g. theta = 1, a low-inequality
    state). Phase 2 continues from the phase-1 terminal state (e.g. theta
    = 0, a high-inequality state). Each branch reruns the grid from the
    respective terminal state.
    """
    phase1: RewiringConfig
    phase2: RewiringConfig = attr.ib(validator=_theta_only_differs)
    theta_grid: tuple[float, ...] = attr.ib(default=DEFAULT_THETA_GRID,
                                            converter=tuple)

    @staticmethod
    def from_config(config: RewiringConfig,
                    theta_grid: Sequence[float] = DEFAULT_THETA_GRID,
                    low_theta: float = 1.0,
                    high_theta: float = 0.0) -> HysteresisProtocol:
        return HysteresisProtocol(
            phase1=attr.evolve(config, theta=low_theta),
            phase2=attr.evolve(config, theta=high_theta,
                               seed=replica_seed(config.seed, 1)),
            theta_grid=theta_grid,
        )


@attr.s(auto_detect=True, auto_attribs=True, frozen=True)
class HysteresisRow:
    branch: str  # 'from_phase1' or 'from_phase2'.
    theta: float
    gini_mean: float
    gini_std: float
    initial_gini: float
    n_replicas: int
    n_stationary: int
    terminal: str


@attr.s(auto_detect=True, auto_attribs=True, frozen=True, eq=False)
class HysteresisResult:
    rows: tuple[HysteresisRow, ...]
    phase1_trace: SweepTrace  # Replica 0, input -> phase-1 state.
    phase2_trace: SweepTrace  # Replica 0, phase-1 state -> phase-2 state.

    def branch(self, name: str) -> dict[float, float]:
        return {r.theta: r.gini_mean for r in self.rows if r.branch == name}

    def gaps(self) -> dict[float, float]:
        """G* from the phase-2 state minus G* from the phase-1 state."""
        low, high = self.branch('from_phase1'), self.branch('from_phase2')
        return {theta: high[theta] - low[theta] for theta in low}


def hysteresis_run(net: BipartiteNetwork,
                   protocol: HysteresisProtocol,
                   replicas: int = DEFAULT_REPLICAS,
                   jobs: int = 1) -> HysteresisResult:
    check_replicas(replicas)
    seeds = [replica_seed(protocol.phase1.seed, r) for r in range(replicas)]

    phase1 = run_all([RunTask(net, attr.evolve(protocol.phase1, seed=s), True)
                      for s in seeds], jobs)
    phase2 = run_all([RunTask(o.state, attr.evolve(
                          protocol.phase2,
                          seed=replica_seed(protocol.phase2.seed, r)), True)
                      for r, o in enumerate(phase1)], jobs)

    grid = list(protocol.theta_grid)
    rows = []
    for name, starts in [('from_phase1', phase1), ('from_phase2', phase2)]:
        # Both branches share seeds per (replica, theta).
        tasks = [RunTask(o.state, attr.evolve(
                     protocol.phase1, theta=theta,
                     seed=replica_seed(seeds[r], 1 + j)))
                 for j, theta in enumerate(grid)
                 for r, o in enumerate(starts)]
        summaries = _summaries(run_all(tasks, jobs), len(grid), replicas)
        for theta, summary in zip(grid, summaries):
            _warn_unconverged(f"{name} theta={theta}", summary)
            rows.append(HysteresisRow(branch=name, theta=float(theta),
                                      terminal=summary.terminal,
                                      **attr.asdict(summary)))

    return HysteresisResult(rows=tuple(rows),
                            phase1_trace=phase1[0].trace,
                            phase2_trace=phase2[0].trace)


# ------------------------------ Density ----------------------------------


@attr.s(auto_detect=True, auto_attribs=True, frozen=True)
class DensitySpec:
    """Fraction `target` of links, users or items to keep."""
    mode: DensityMode = attr.ib(validator=attr.validators.in_(
        ['link_removal', 'user_removal', 'item_removal']))
    target: float = attr.ib(converter=float)
    seed: int = attr.ib(default=0, validator=attr.validators.ge(0))

    @target.validator
    def _check_target(self, attribute, value):
        if not 0 < value <= 1:
            raise ValueError("Density target must lie in (0, 1].")


def _compact(net: BipartiteNetwork, links, users, items) -> BipartiteNetwork:
    """Rebuild `net` over the kept users/items with dense ids."""
    user_ids = {u: n for n, u in enumerate(users)}
    item_ids = {i: n for n, i in enumerate(items)}
    return BipartiteNetwork.from_links(
        [(user_ids[x.user], item_ids[x.item], x.timestamp) for x in links],
        n_users=len(users),
        n_items=len(items),
        clock=net.clock,
        seed=net.seed,
        user_labels=bidict({n: net.user_labels[u] for u, n in
                            user_ids.items()}),
        item_labels=bidict({n: net.item_labels[i] for i, n in
                            item_ids.items()}),
    )


def modify_density(net: BipartiteNetwork,
                   spec: DensitySpec) -> BipartiteNetwork:
    """Return a reduced copy of `net`; `net` is left untouched.

      - link_removal: remove random links, never a user's last one.
      - user_removal: remove random users with all their links.
      - item_removal: remove random items with all their links; users
          left without links are dropped.
    """
    if spec.target == 1:
        return net.copy()

    rng = np.random.default_rng(spec.seed)
    links = list(net.links())

    if spec.mode == 'link_removal':
        n_remove = len(links) - round(spec.target * len(links))
        if len(links) - n_remove < net.n_users:
            raise ValueError("Target is below one link per user.")
        degrees = net.user_degrees
        removed = np.zeros(len(links), dtype=bool)
        for j in rng.permutation(len(links)):
            if n_remove == 0:
                break
            user = links[j].user
            if degrees[user] > 1:
                degrees[user] -= 1
                removed[j] = True
                n_remove -= 1
        kept = [x for x, gone in zip(links, removed) if not gone]
        return _compact(net, kept, range(net.n_users), range(net.n_items))

    if spec.mode == 'user_removal':
        n_keep = round(spec.target * net.n_users)
        if n_keep < 1:
            raise ValueError("Target removes every user.")
        users = sorted(int(u) for u in
                       rng.choice(net.n_users, n_keep, replace=False))
        keep = set(users)
        kept = [x for x in links if x.user in keep]
        return _compact(net, kept, users, range(net.n_items))

    n_keep = round(spec.target * net.n_items)
    if n_keep < 1:
        raise ValueError("Target removes every item.")
    items = sorted(int(i) for i in
                   rng.choice(net.n_items, n_keep, replace=False))
    keep = set(items)
    kept = [x for x in links if x.item in keep]
    if not kept:
        raise ValueError("Item removal left no links.")
    users = sorted({x.user for x in kept})
    if len(users) < net.n_users:
        logger.warning("Item removal dropped %d users without links.",
                       net.n_users - len(users))
    return _compact(net, kept, users, items)


@attr.s(auto_detect=True, auto_attribs=True, frozen=True)
class DensityRow:
    target: float
    mode: str
    method: str
    theta: float
    density: float
    avg_item_degree: float
    original_gini: float
    gini_mean: float
    gini_std: float
    initial_gini: float
    n_replicas: int
    n_stationary: int
    terminal: str


Method = Union[float, SimilarityParams]


def density_sweep(net: BipartiteNetwork,
                  density_grid: Sequence[float],
                  methods: Mapping[str, Method],
                  config: RewiringConfig,
                  mode: DensityMode = 'link_removal',
                  replicas: int = DEFAULT_REPLICAS,
                  jobs: int = 1) -> list[DensityRow]:
    """G* against data density, all links drawn from recommendation.

    Replica r reduces `net` with seed replica_seed(config.seed, r); the
    reduced network's Gini before rewiring is reported as original_gini.
    """
    density_grid = list(density_grid)
    methods = {name: m.theta if isinstance(m, SimilarityParams) else float(m)
               for name, m in methods.items()}
    if not density_grid or not methods:
        raise ValueError("Empty density grid or method set.")
    check_replicas(replicas)

    seeds = [replica_seed(config.seed, r) for r in range(replicas)]
    rows = []
    for target in density_grid:
        reduced = [modify_density(net, DensitySpec(mode, target, s))
                   for s in seeds]
        tasks = [RunTask(small, attr.evolve(config, p=1.0, theta=theta,
                                            seed=s))
                 for theta in methods.values()
                 for small, s in zip(reduced, seeds)]
        summaries = _summaries(run_all(tasks, jobs), len(methods), replicas)

        for (name, theta), summary in zip(methods.items(), summaries):
            _warn_unconverged(f"{mode} {target} {name}", summary)
            rows.append(DensityRow(
                target=target,
                mode=mode,
                method=name,
                theta=theta,
                density=float(np.mean([x.density for x in reduced])),
                avg_item_degree=float(np.mean(
                    [x.n_links / x.n_items for x in reduced])),
                original_gini=float(np.mean(
                    [gini(x.degrees) for x in reduced])),
                terminal=summary.terminal,
                **attr.asdict(summary),
            ))
    return rows


__all__ = [
    'DEFAULT_P_GRID',
    'DEFAULT_REPLICAS',
    'DEFAULT_THETA_GRID',
    'DensityMode',
    'DensityRow',
    'DensitySpec',
    'HysteresisProtocol',
    'HysteresisResult',
    'HysteresisRow',
    'SweepRow',
    'attachment_baseline',
    'density_sweep',
    'hysteresis_run',
    'modify_density',
    'p_theta_sweep',
    'theta_sweep',
]
