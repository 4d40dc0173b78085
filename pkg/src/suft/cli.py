"""
Command-line entry point: ``suft <command> ...``.

Commands:
    verify-bound   random-joint verification of the factual-loss bound
    gradcheck      finite-difference check of the SUFT objective gradient
    train          multi-seed training from a run configuration file
    compare        baseline-versus-SUFT comparison of two run configurations
    sweep          lambda_tf grid against a lambda_tf = 0 baseline
    report         metrics and plot-ready CSV tables from a run folder

Exit codes: 0 success, 1 configuration or usage error, 2 verification failure, 3 protocol error.
Summaries are printed to stdout as JSON; logging goes to stderr.
"""

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import replace

import numpy as np

from suft import __version__
from suft.causal.bound import run_bound_trials
from suft.common.errors import ConfigError, ProtocolError, SuftError
from suft.common.losses import loss_from_name
from suft.common.utilities import make_rngs, setup_logging, write_json
from suft.harness.comparison import compare, lambda_sweep, DEFAULT_SWEEP_LAMBDAS
from suft.harness.metrics import smooth
from suft.harness.report import build_report
from suft.harness.run_config import RunConfig
from suft.harness.training import train_seeds
from suft.network.grad_check import grad_check, PASS_THRESHOLD
from suft.network.mlp import Mlp
from suft.network.objectives import SuftObjective

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VERIFICATION = 2
EXIT_PROTOCOL = 3


class _ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as ConfigError so they exit with code 1."""

    def error(self, message):
        raise ConfigError('', f'{self.prog}: {message}')


def _print_json(document):
    print(json.dumps(document, indent=2, sort_keys=True, default=_json_default))


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f'cannot serialize {type(value).__name__}')


def _finite_or_none(value):
    return None if value is None or (isinstance(value, float) and not math.isfinite(value)) else value


def cmd_verify_bound(args):
    if args.trials < 1:
        raise ConfigError('trials', f'must be >= 1 ({args.trials})')
    if args.max_controls < 1:
        raise ConfigError('max-controls', f'must be >= 1 ({args.max_controls})')
    loss = loss_from_name(args.loss)
    summary = run_bound_trials(args.trials, loss, seed=args.seed, max_controls=args.max_controls,
                               n_controls=args.controls)
    summary['min_slack'] = _finite_or_none(summary['min_slack'])
    if args.output:
        write_json(args.output, summary)
    _print_json(summary)
    if loss.name == 'l1' and summary['n_violations']:
        logger.error(f'verify-bound: {summary["n_violations"]} L1 trials violated the bound')
        return EXIT_VERIFICATION
    return EXIT_OK


def cmd_gradcheck(args):
    if args.instances < 1:
        raise ConfigError('instances', f'must be >= 1 ({args.instances})')
    worst = None
    for rng in make_rngs(args.seed, args.instances):
        n_in, n_out = int(rng.integers(2, 6)), int(rng.integers(2, 5))
        net = Mlp.initialize((n_in, 8, 8, n_out), rng, args.activation)
        inputs = rng.normal(size=(args.batch_size, n_in))
        objective = SuftObjective(td_targets=rng.normal(size=args.batch_size),
                                  behavior_values=rng.normal(size=args.batch_size),
                                  loss=args.loss, lambda_tf=args.lambda_tf,
                                  columns=rng.integers(0, n_out, size=args.batch_size))
        report = grad_check(net, inputs, objective)
        if worst is None or report.max_rel_err > worst.max_rel_err:
            worst = report
    summary = dict(instances=args.instances, seed=args.seed, loss=args.loss, lambda_tf=args.lambda_tf, **worst.as_dict())
    _print_json(summary)
    if worst.passed:
        print(f'passed, max_rel_err < {PASS_THRESHOLD:g}')
        return EXIT_OK
    print(f'FAILED, max_rel_err = {worst.max_rel_err:.3e}')
    return EXIT_VERIFICATION


def _load_config(path, output=None):
    config = RunConfig.from_file(path)
    if output is not None:
        config = replace(config, output_dir=output)
    return config


def cmd_train(args):
    config = _load_config(args.config, args.output)
    seeds = config.seeds if args.seeds is None else args.seeds
    records = train_seeds(config, seeds, config.output_dir, verbose=args.verbose)
    runs = []
    for record in records:
        rewards = record.episode_rewards
        runs.append(dict(seed=record.seed, episodes=len(rewards), updates=len(record.updates),
                         final_smoothed_reward=float(smooth(rewards, config.smoothing_window)[-1]) if rewards else None,
                         mean_suft_term=float(np.mean(record.suft_terms)) if record.updates else None))
    _print_json(dict(config_hash=config.config_hash, output_dir=config.output_dir, runs=runs))
    return EXIT_OK


def cmd_compare(args):
    baseline = _load_config(args.baseline_config)
    suft = _load_config(args.suft_config)
    output_dir = args.output or os.path.join(baseline.output_dir, 'comparison')
    report = compare(baseline, suft, env=args.env, n_seeds=args.n_seeds, output_dir=output_dir,
                     random_episodes=args.random_episodes, verbose=args.verbose)
    _print_json(dict(output_dir=output_dir, **report.as_dict()))
    return EXIT_OK


def cmd_sweep(args):
    config = _load_config(args.config)
    output_dir = args.output or os.path.join(config.output_dir, 'sweep')
    reports = lambda_sweep(config, args.lambdas, seeds=args.seeds, output_dir=output_dir,
                           random_episodes=args.random_episodes, verbose=args.verbose)
    _print_json(dict(output_dir=output_dir, results=[
        {k: v for k, v in r.as_dict().items() if k not in ('baseline_finals', 'suft_finals')} for r in reports]))
    return EXIT_OK


def cmd_report(args):
    tables = build_report(args.run_dir, args.output)
    _print_json(dict(output_dir=args.output or args.run_dir, comparisons=len(tables['metrics']),
                     arms=len(tables['arms']), curve_points=len(tables['curves']),
                     mean_reward_ratio_pct=_finite_or_none(tables['mean_reward_ratio_pct'])))
    return EXIT_OK


def build_parser():
    parser = _ArgumentParser(prog='suft', description='SUFT causal-bound verification and SUFT-regularized RL.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('-v', '--verbose', action='store_true', help='log progress at INFO level')
    commands = parser.add_subparsers(dest='command', required=True)

    p = commands.add_parser('verify-bound', help='verify the bound on random finite joints')
    p.add_argument('--trials', type=int, default=10000)
    p.add_argument('--max-controls', type=int, default=1, help='number of control treatments drawn from 1..K')
    p.add_argument('--controls', type=int, default=None, help='fixed number of control treatments')
    p.add_argument('--loss', choices=('l1', 'l2'), default='l1')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--output', default=None, help='also write the JSON summary to this file')
    p.set_defaults(handler=cmd_verify_bound)

    p = commands.add_parser('gradcheck', help='finite-difference check of the SUFT objective gradient')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--instances', type=int, default=50)
    p.add_argument('--batch-size', type=int, default=8)
    p.add_argument('--loss', choices=('l1', 'l2'), default='l2')
    p.add_argument('--lambda-tf', type=float, default=1.0)
    p.add_argument('--activation', choices=('relu', 'tanh'), default='tanh')
    p.set_defaults(handler=cmd_gradcheck)

    p = commands.add_parser('train', help='train every seed of a run configuration')
    p.add_argument('config')
    p.add_argument('--output', default=None, help='overrides output_dir')
    p.add_argument('--seeds', type=int, nargs='+', default=None)
    p.set_defaults(handler=cmd_train)

    p = commands.add_parser('compare', help='compare a baseline and a SUFT run configuration')
    p.add_argument('baseline_config')
    p.add_argument('suft_config')
    p.add_argument('--env', default=None)
    p.add_argument('--n-seeds', type=int, default=None)
    p.add_argument('--random-episodes', type=int, default=10)
    p.add_argument('--output', default=None)
    p.set_defaults(handler=cmd_compare)

    p = commands.add_parser('sweep', help='compare a lambda_tf grid against lambda_tf = 0')
    p.add_argument('config')
    p.add_argument('--lambdas', type=float, nargs='+', default=list(DEFAULT_SWEEP_LAMBDAS))
    p.add_argument('--seeds', type=int, nargs='+', default=None)
    p.add_argument('--random-episodes', type=int, default=10)
    p.add_argument('--output', default=None)
    p.set_defaults(handler=cmd_sweep)

    p = commands.add_parser('report', help='write metrics and curve CSV files for a run folder')
    p.add_argument('run_dir')
    p.add_argument('--output', default=None)
    p.set_defaults(handler=cmd_report)
    return parser


def main(argv=None):
    """
    Runs one command.

    Args:
        argv (list of str, optional): Arguments without the program name. Defaults to sys.argv[1:].

    Returns:
        int: Process exit code.
    """
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f'error: {exc}', file=sys.stderr)
        return EXIT_CONFIG
    setup_logging(args.verbose)
    try:
        return args.handler(args)
    except ProtocolError as exc:
        logger.error(str(exc))
        return EXIT_PROTOCOL
    except (SuftError, OSError) as exc:
        logger.error(str(exc))
        return EXIT_CONFIG
