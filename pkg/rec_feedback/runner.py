"""Batch execution of independent runs.

Every task owns its network copy and seed, so results depend only on the
task list, never on the number of workers or completion order.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Optional, Sequence, TypeVar

import attr
import numpy as np

from rec_feedback.engine import RewiringConfig, SweepTrace, run_to_stationarity
from rec_feedback.network import BipartiteNetwork


T = TypeVar('T')
R = TypeVar('R')


def parallel_map(func: Callable[[T], R], tasks: Sequence[T],
                 jobs: int = 1) -> list[R]:
    """Map in task order, over `jobs` worker processes when jobs > 1."""
    tasks = list(tasks)
    if jobs <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(func, tasks))


@attr.s(auto_detect=True, auto_attribs=True, frozen=True, eq=False)
class RunTask:
    net: BipartiteNetwork
    config: RewiringConfig
    keep_state: bool = False


@attr.s(auto_detect=True, auto_attribs=True, frozen=True, eq=False)
class RunOutcome:
    trace: SweepTrace
    state: Optional[BipartiteNetwork] = None


def execute(task: RunTask) -> RunOutcome:
    net = task.net.copy()
    trace = run_to_stationarity(net, task.config)
    return RunOutcome(trace, net if task.keep_state else None)


def run_all(tasks: Iterable[RunTask], jobs: int = 1) -> list[RunOutcome]:
    return parallel_map(execute, list(tasks), jobs)


def check_replicas(replicas: int) -> int:
    if replicas < 1:
        raise ValueError(f"Need at least one replica, got {replicas}.")
    return replicas


@attr.s(auto_detect=True, auto_attribs=True, frozen=True)
class GiniSummary:
    """Stationary Gini over replicas: mean and sample stddev."""
    gini_mean: float
    gini_std: float
    initial_gini: float
    n_replicas: int
    n_stationary: int

    @property
    def terminal(self) -> str:
        if self.n_stationary == self.n_replicas:
            return 'stationary'
        return 'max_sweeps_reached'

    @staticmethod
    def from_traces(traces: Sequence[SweepTrace]) -> GiniSummary:
        if not traces:
            raise ValueError("No traces to summarise.")
        values = np.array([t.stationary_gini for t in traces])
        return GiniSummary(
            gini_mean=float(values.mean()),
            gini_std=float(values.std(ddof=1)) if len(values) > 1 else 0.0,
            initial_gini=float(np.mean([t.initial_gini for t in traces])),
            n_replicas=len(traces),
            n_stationary=sum(t.stationary for t in traces),
        )


__all__ = ['GiniSummary', 'RunOutcome', 'RunTask', 'check_replicas',
           'execute', 'parallel_map', 'run_all']
