"""Command line interface.

    rec-feedback ingest ratings.data --threshold 3 --output data/ml100k
    rec-feedback ingest --synthetic users=500 items=300 links=8000
    rec-feedback simulate --input data/ml100k/network.csv --theta 0 --p 1
    rec-feedback sweep --input ... --theta-grid 0:1:0.05 --p-grid 0.5,1
    rec-feedback hysteresis --input ... --theta-grid 0:1:0.1
    rec-feedback density --input ... --density-grid 1,0.8,0.6 --mode user_removal
    rec-feedback evaluate --input ... --theta 0.6 [--theta-grid 0:1:0.05]
    rec-feedback metrics --input ...

Every command prints a JSON summary on stdout and writes its tables plus a
`<command>_manifest.json` into the output directory. Exit codes: 0 success,
2 usage or input error, 1 runtime failure; failures print a JSON error
report on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import attr
import pandas as pd

from rec_feedback.config import (
    ConfigError, RunConfigFile, default_output, load_config, merge,
    parse_grid, parse_methods, parse_pairs, pick
)
from rec_feedback.datasets import (
    IngestError, ingest, load_snapshot, save_snapshot, synthetic_network
)
from rec_feedback.engine import RewiringConfig, run_to_stationarity
from rec_feedback.evaluation import (
    SplitSpec, evaluate, precision_sacrifice, tradeoff_curve
)
from rec_feedback.experiments import (
    DEFAULT_P_GRID, DEFAULT_REPLICAS, DEFAULT_THETA_GRID, DensitySpec,
    HysteresisProtocol, attachment_baseline, density_sweep, hysteresis_run,
    p_theta_sweep
)
from rec_feedback.metrics import gini, herfindahl, top_share
from rec_feedback.reporting import (
    curve_frame, divisions_frame, manifest, rows_frame, trace_frame,
    write_json, write_table
)


logger = logging.getLogger(__name__)

DEFAULT_DENSITY_GRID = (1.0, 0.8, 0.6, 0.4)


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ------------------------------- Parsers ---------------------------------


def _common() -> argparse.ArgumentParser:
    common = Parser(add_help=False)
    common.add_argument('--config', help='JSON run configuration file.')
    common.add_argument('--output', help='Output directory.')
    common.add_argument('--format', choices=['csv', 'json'], default='csv')
    common.add_argument('--jobs', type=int, help='Worker processes.')
    common.add_argument('--log-level', default='WARNING',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    return common


def _rewiring() -> argparse.ArgumentParser:
    rewiring = Parser(add_help=False)
    rewiring.add_argument('--input', required=True,
                          help='Snapshot CSV written by `ingest`.')
    rewiring.add_argument('--theta', type=float)
    rewiring.add_argument('--p', type=float)
    rewiring.add_argument('--list-length', type=int)
    rewiring.add_argument('--attachment',
                          choices=['pa', 'ra', 'preferential', 'random'])
    rewiring.add_argument('--seed', type=int)
    rewiring.add_argument('--max-sweeps', type=int)
    rewiring.add_argument('--window', type=int)
    rewiring.add_argument('--eps', type=float)
    rewiring.add_argument('--replicas', type=int)
    return rewiring


def build_parser() -> Parser:
    parser = Parser(prog='rec-feedback', description=__doc__.split('\n')[0])
    commands = parser.add_subparsers(dest='command', required=True)
    common, rewiring = _common(), _rewiring()

    cmd = commands.add_parser('ingest', parents=[common],
                              help='Build a network snapshot.')
    cmd.add_argument('ratings', nargs='?', help='Ratings file.')
    cmd.add_argument('--threshold', type=float, default=3)
    cmd.add_argument('--seed', type=int)
    cmd.add_argument('--synthetic', nargs='+', metavar='KEY=VALUE',
                     help='users=N items=M links=E [skew=S]')
    cmd.set_defaults(handler=cmd_ingest)

    cmd = commands.add_parser('simulate', parents=[common, rewiring],
                              help='Run the rewiring model to stationarity.')
    cmd.set_defaults(handler=cmd_simulate)

    cmd = commands.add_parser('sweep', parents=[common, rewiring],
                              help='Stationary Gini over a p x theta grid.')
    cmd.add_argument('--theta-grid', type=parse_grid)
    cmd.add_argument('--p-grid', type=parse_grid)
    cmd.add_argument('--baseline', action='store_true',
                     help='Add the p = 0 attachment-only row.')
    cmd.set_defaults(handler=cmd_sweep)

    cmd = commands.add_parser('hysteresis', parents=[common, rewiring],
                              help='Theta branches from two stationary states.')
    cmd.add_argument('--theta-grid', type=parse_grid)
    cmd.add_argument('--low-theta', type=float, default=1.0)
    cmd.add_argument('--high-theta', type=float, default=0.0)
    cmd.set_defaults(handler=cmd_hysteresis)

    cmd = commands.add_parser('density', parents=[common, rewiring],
                              help='Stationary Gini against data density.')
    cmd.add_argument('--density-grid', type=parse_grid)
    cmd.add_argument('--mode', choices=['link_removal', 'user_removal',
                                        'item_removal'])
    cmd.add_argument('--methods', nargs='+', metavar='NAME=THETA')
    cmd.set_defaults(handler=cmd_density)

    cmd = commands.add_parser('evaluate', parents=[common, rewiring],
                              help='Precision and short-term diversity.')
    cmd.add_argument('--probe-fraction', type=float)
    cmd.add_argument('--divisions', type=int)
    cmd.add_argument('--theta-grid', type=parse_grid,
                     help='Also compute the precision / G* trade-off.')
    cmd.set_defaults(handler=cmd_evaluate)

    cmd = commands.add_parser('metrics', parents=[common],
                              help='Inequality metrics of a snapshot.')
    cmd.add_argument('--input', required=True)
    cmd.set_defaults(handler=cmd_metrics)
    return parser


# ------------------------------- Helpers ---------------------------------


def rewiring_config(args, cfg: RunConfigFile) -> RewiringConfig:
    flags = {
        'p': args.p,
        'theta': args.theta,
        'list_length': args.list_length,
        'attachment': args.attachment,
        'seed': args.seed,
        'max_sweeps': args.max_sweeps,
        'window': args.window,
        'eps': args.eps,
    }
    return merge(RewiringConfig, cfg.rewiring, flags, 'rewiring')


def output_dir(args, cfg: RunConfigFile) -> Path:
    return Path(pick(args.output, cfg.output, default_output()))


def jobs(args, cfg: RunConfigFile) -> int:
    return pick(args.jobs, cfg.jobs, 1)


def replicas(args, cfg: RunConfigFile) -> int:
    n = pick(args.replicas, cfg.replicas, DEFAULT_REPLICAS)
    if n < 1:
        raise UsageError(f"--replicas must be at least 1, got {n}.")
    return n


def read_network(path: str):
    if not Path(path).is_file():
        raise UsageError(f"No such snapshot: {path}")
    try:
        return load_snapshot(path)
    except (OSError, json.JSONDecodeError) as err:
        raise UsageError(f"Cannot read snapshot {path}: {err}") from err


def finish(command: str, out: Path, params: dict, net, outputs) -> None:
    outputs = list(outputs)
    write_json(manifest(command, params, net, outputs),
               out / f'{command}_manifest.json')


# ------------------------------- Commands --------------------------------


def cmd_ingest(args, cfg: RunConfigFile) -> dict:
    seed = pick(args.seed, cfg.rewiring.get('seed'), 0)
    if args.synthetic:
        raw = parse_pairs(args.synthetic)
        unknown = set(raw) - {'users', 'items', 'links', 'skew'}
        if unknown or not {'users', 'items', 'links'} <= set(raw):
            raise UsageError("--synthetic needs users=, items=, links= "
                             "and optionally skew=.")
        try:
            params = {'n_users': int(raw['users']),
                      'n_items': int(raw['items']),
                      'n_links': int(raw['links']),
                      'skew': float(raw.get('skew', 1.0))}
        except ValueError as err:
            raise UsageError(f"--synthetic: {err}") from err
        net = synthetic_network(**params, seed=seed)
        source = {'synthetic': params}
    elif args.ratings:
        if not Path(args.ratings).exists():
            raise UsageError(f"No such ratings file: {args.ratings}")
        net = ingest(args.ratings, args.threshold, seed)
        source = {'ratings': Path(args.ratings).name,
                  'threshold': args.threshold}
    else:
        raise UsageError("Give a ratings file or --synthetic.")

    out = output_dir(args, cfg)
    path = save_snapshot(net, out / 'network.csv')
    finish('ingest', out, {**source, 'seed': seed}, net,
           [path, path.with_suffix('.json'), path.with_suffix('.ids.json')])
    return {'snapshot': str(path), 'n_users': net.n_users,
            'n_items': net.n_items, 'n_links': net.n_links,
            'gini': gini(net.degrees)}


def cmd_simulate(args, cfg: RunConfigFile) -> dict:
    net, config = read_network(args.input), rewiring_config(args, cfg)
    start = net.copy()
    trace = run_to_stationarity(net, config)

    out = output_dir(args, cfg)
    outputs = [write_table(trace_frame(trace), out / 'trace', args.format),
               save_snapshot(net, out / 'final.csv')]
    finish('simulate', out, {'rewiring': attr.asdict(config)}, start,
           outputs)
    return {'terminal': trace.terminal, 'sweeps': trace.n_sweeps,
            'initial_gini': trace.initial_gini,
            'stationary_gini': trace.stationary_gini}


def cmd_sweep(args, cfg: RunConfigFile) -> dict:
    net, config = read_network(args.input), rewiring_config(args, cfg)
    thetas = pick(args.theta_grid, cfg.grids.theta, DEFAULT_THETA_GRID)
    ps = pick(args.p_grid, (args.p,) if args.p is not None else None,
              cfg.grids.p, DEFAULT_P_GRID)
    n, workers = replicas(args, cfg), jobs(args, cfg)

    rows = p_theta_sweep(net, thetas, ps, config, n, workers)
    if args.baseline:
        rows.append(attachment_baseline(net, config, n, workers))

    out = output_dir(args, cfg)
    path = write_table(rows_frame(rows), out / 'sweep', args.format)
    finish('sweep', out, {'rewiring': attr.asdict(config),
                          'theta_grid': list(thetas), 'p_grid': list(ps),
                          'replicas': n, 'baseline': args.baseline},
           net, [path])
    return {'rows': len(rows), 'table': str(path)}


def cmd_hysteresis(args, cfg: RunConfigFile) -> dict:
    net, config = read_network(args.input), rewiring_config(args, cfg)
    thetas = pick(args.theta_grid, cfg.grids.theta, DEFAULT_THETA_GRID)
    protocol = HysteresisProtocol.from_config(config, thetas, args.low_theta,
                                              args.high_theta)
    n = replicas(args, cfg)
    result = hysteresis_run(net, protocol, n, jobs(args, cfg))

    phases = []
    for name, trace in [('phase1', result.phase1_trace),
                        ('phase2', result.phase2_trace)]:
        frame = trace_frame(trace)
        frame.insert(0, 'phase', name)
        phases.append(frame)

    out = output_dir(args, cfg)
    outputs = [
        write_table(rows_frame(result.rows), out / 'hysteresis', args.format),
        write_table(pd.concat(phases, ignore_index=True),
                    out / 'hysteresis_traces', args.format),
    ]
    finish('hysteresis', out, {'phase1': attr.asdict(protocol.phase1),
                               'phase2': attr.asdict(protocol.phase2),
                               'theta_grid': list(thetas), 'replicas': n},
           net, outputs)
    return {'gaps': {str(k): v for k, v in result.gaps().items()}}


def cmd_density(args, cfg: RunConfigFile) -> dict:
    net, config = read_network(args.input), rewiring_config(args, cfg)
    grid = pick(args.density_grid, cfg.grids.density, DEFAULT_DENSITY_GRID)
    extra = set(cfg.density) - {'mode'}
    if extra:
        raise ConfigError(f"Unknown density keys: {sorted(extra)}; use "
                          "--density-grid or grids.density for targets.")
    spec = merge(DensitySpec, {'mode': 'link_removal', 'target': 1.0,
                               **cfg.density},
                 {'mode': args.mode}, 'density')
    methods = parse_methods(parse_pairs(args.methods) if args.methods
                            else cfg.methods)
    n = replicas(args, cfg)

    rows = density_sweep(net, grid, methods, config, spec.mode, n,
                         jobs(args, cfg))
    out = output_dir(args, cfg)
    path = write_table(rows_frame(rows), out / 'density', args.format)
    finish('density', out, {
        'rewiring': attr.asdict(config), 'mode': spec.mode,
        'density_grid': list(grid), 'replicas': n,
        'methods': {k: m.theta for k, m in methods.items()},
    }, net, [path])
    return {'rows': len(rows), 'table': str(path)}


def cmd_evaluate(args, cfg: RunConfigFile) -> dict:
    net, config = read_network(args.input), rewiring_config(args, cfg)
    split = merge(SplitSpec, cfg.split,
                  {'probe_fraction': args.probe_fraction,
                   'n_divisions': args.divisions}, 'split')
    workers = jobs(args, cfg)
    report = evaluate(net, split, config.theta, config.list_length, workers)

    out = output_dir(args, cfg)
    outputs = [write_json(attr.asdict(report), out / 'report.json'),
               write_table(divisions_frame(report), out / 'divisions',
                           args.format)]
    summary = {'precision': report.precision,
               'short_term_diversity': report.short_term_diversity}
    params = {'rewiring': attr.asdict(config), 'split': attr.asdict(split)}

    thetas = pick(args.theta_grid, cfg.grids.theta)
    if thetas is not None:
        n = replicas(args, cfg)
        curve = tradeoff_curve(net, thetas, config, split, n, workers)
        outputs.append(write_table(rows_frame(curve), out / 'tradeoff',
                                   args.format))
        params.update(theta_grid=list(thetas), replicas=n)
        try:
            summary['precision_sacrifice'] = precision_sacrifice(
                curve, gini(net.degrees))
        except ValueError:
            logger.warning("No theta keeps G* at the original Gini.")

    finish('evaluate', out, params, net, outputs)
    return summary


def cmd_metrics(args, cfg: RunConfigFile) -> dict:
    net = read_network(args.input)
    summary = {
        'n_users': net.n_users, 'n_items': net.n_items,
        'n_links': net.n_links, 'density': net.density,
        'gini': gini(net.degrees), 'herfindahl': herfindahl(net.degrees),
        'top1_share': top_share(net.degrees),
    }
    out = output_dir(args, cfg)
    outputs = [write_json(summary, out / 'metrics.json'),
               write_table(curve_frame(net.degrees), out / 'curve',
                           args.format)]
    finish('metrics', out, {}, net, outputs)
    return summary


# --------------------------------- Main ----------------------------------


def _report(kind: str, err: BaseException):
    print(json.dumps({'error': kind, 'type': type(err).__name__,
                      'message': str(err)}), file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as err:
        _report('usage', err)
        return 2

    logging.basicConfig(level=args.log_level,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        summary: Any = args.handler(args, load_config(args.config))
    except (UsageError, ConfigError, IngestError) as err:
        _report('usage', err)
        return 2
    except Exception as err:
        logger.debug("Runtime failure.", exc_info=True)
        _report('runtime', err)
        return 1

    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


if __name__ == '__main__':
    sys.exit(main())
