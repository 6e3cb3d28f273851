"""Output tables and run manifests."""
from __future__ import annotations

import hashlib
import json
from importlib import metadata
from pathlib import Path
from typing import Any, Iterable, Literal, Sequence

import attr
import pandas as pd

from rec_feedback.datasets import PathLike, snapshot_text
from rec_feedback.engine import SweepTrace
from rec_feedback.evaluation import EvaluationReport
from rec_feedback.metrics import popularity_rank_curve
from rec_feedback.network import BipartiteNetwork


Format = Literal['csv', 'json']
TRACE_COLUMNS = ['sweep', 'gini', 'herfindahl', 'top1_share', 'fallbacks']


def trace_frame(trace: SweepTrace) -> pd.DataFrame:
    frame = pd.DataFrame([attr.asdict(s) for s in trace.snapshots])
    frame['fallbacks'] = trace.fallbacks
    return frame[TRACE_COLUMNS]


def rows_frame(rows: Sequence[Any]) -> pd.DataFrame:
    """One column per attrs field, in declaration order."""
    if not rows:
        raise ValueError("No rows to tabulate.")
    columns = [a.name for a in attr.fields(type(rows[0]))]
    return pd.DataFrame([attr.astuple(r, recurse=False) for r in rows],
                        columns=columns)


def curve_frame(degrees) -> pd.DataFrame:
    return pd.DataFrame(popularity_rank_curve(degrees),
                        columns=['rank_norm', 'pop_norm'])


def divisions_frame(report: EvaluationReport) -> pd.DataFrame:
    return pd.DataFrame({
        'division': range(len(report.precision_per_division)),
        'precision': report.precision_per_division,
        'short_term_diversity': report.diversity_per_division,
    })


def write_table(frame: pd.DataFrame, path: PathLike,
                fmt: Format = 'csv') -> Path:
    path = Path(path).with_suffix(f'.{fmt}')
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == 'csv':
        path.write_text(frame.to_csv(index=False, lineterminator='\n'))
    elif fmt == 'json':
        path.write_text(frame.to_json(orient='records', indent=2) + '\n')
    else:
        raise ValueError(f"Unknown table format {fmt!r}.")
    return path


def write_json(obj: Any, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + '\n')
    return path


def dataset_hash(net: BipartiteNetwork) -> str:
    return hashlib.sha256(snapshot_text(net).encode()).hexdigest()


def code_version() -> str:
    try:
        return metadata.version('rec_feedback')
    except metadata.PackageNotFoundError:
        from rec_feedback import __version__
        return __version__


def manifest(command: str, params: dict, net: BipartiteNetwork,
             outputs: Iterable[PathLike]) -> dict:
    """Everything needed to rerun `command` and get identical outputs."""
    return {
        'command': command,
        'params': params,
        'dataset': {'sha256': dataset_hash(net),
                    'n_users': net.n_users,
                    'n_items': net.n_items,
                    'n_links': net.n_links,
                    'seed': net.seed},
        'version': code_version(),
        'outputs': sorted(Path(p).name for p in outputs),
    }


__all__ = ['TRACE_COLUMNS', 'code_version', 'curve_frame', 'dataset_hash',
           'divisions_frame', 'manifest', 'rows_frame', 'trace_frame',
           'write_json', 'write_table']
