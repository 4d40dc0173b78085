"""
Plot-ready tables from a folder of training runs and comparisons.

Description:
    ``build_report`` walks a run folder. Every folder holding a run_config.json is an arm whose
    seed_*/log.jsonl files are read; every comparison.json becomes a metrics row. Three tables
    are produced:

        metrics.csv   one row per comparison (env, medians, improvement, ratio, p-value)
        arms.csv      one row per arm (env, lambda_tf, seeds, episodes, final upper median)
        curves.csv    step column plus the across-seed upper median of the smoothed episode
                      reward of every arm, forward-filled on the union of episode-end steps
"""

import json
import logging
import math
import os

import numpy as np
import pandas as pd

from suft.common.errors import ConfigError, UndefinedResultError
from suft.common.utilities import read_jsonl
from suft.harness.comparison import COMPARISON_FILE
from suft.harness.metrics import smooth, upper_median, mean_reward_ratio_pct
from suft.harness.training import RUN_CONFIG_FILE, RUN_LOG_FILE

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ['comparison', 'env', 'baseline_lambda', 'suft_lambda', 'baseline_median', 'suft_median',
                  'random_reward', 'improvement_pct', 'log_improvement', 'reward_ratio_pct', 'p_value', 'valid']
ARM_COLUMNS = ['arm', 'env', 'lambda_tf', 'n_seeds', 'n_episodes', 'final_median']


def _label(run_dir, folder):
    relative = os.path.relpath(folder, run_dir)
    return os.path.basename(os.path.abspath(run_dir)) if relative == '.' else relative.replace(os.sep, '/')


def _read_json(path):
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def read_arm(folder):
    """
    Smoothed episode-reward curves of every seed of one arm.

    Returns:
        tuple: (run config dict, {seed folder name: pd.Series of smoothed reward indexed by step}).
    """
    config = _read_json(os.path.join(folder, RUN_CONFIG_FILE))
    window = int(config.get('smoothing_window', 50))
    curves = {}
    for name in sorted(os.listdir(folder)):
        log_path = os.path.join(folder, name, RUN_LOG_FILE)
        if not (name.startswith('seed_') and os.path.isfile(log_path)):
            continue
        episodes = [row for row in read_jsonl(log_path) if row.get('reward') is not None]
        steps = [row['step'] for row in episodes]
        curves[name] = pd.Series(smooth([row['reward'] for row in episodes], window), index=steps, dtype=np.float64)
    return config, curves


def _row_upper_median(row):
    values = row.dropna().to_numpy()
    return upper_median(values) if values.size else math.nan


def build_report(run_dir, output_dir=None):
    """
    Builds and writes the metrics, arms and curves tables.

    Args:
        run_dir (str): Folder written by the train, compare or sweep commands.
        output_dir (str, optional): Where to write the CSV files. Defaults to ``run_dir``.

    Returns:
        dict: {'metrics': DataFrame, 'arms': DataFrame, 'curves': DataFrame, 'mean_reward_ratio_pct': float}

    Raises:
        ConfigError: If ``run_dir`` does not exist or holds no runs and no comparisons.
    """
    if not os.path.isdir(run_dir):
        raise ConfigError('run_dir', f'report: folder not found ({run_dir})')
    metric_rows, arm_rows, arm_curves = [], [], {}
    for folder, _, files in sorted(os.walk(run_dir)):
        if COMPARISON_FILE in files:
            document = _read_json(os.path.join(folder, COMPARISON_FILE))
            row = {column: document.get(column) for column in METRIC_COLUMNS[1:]}
            metric_rows.append({'comparison': _label(run_dir, folder), **row})
        if RUN_CONFIG_FILE in files:
            config, curves = read_arm(folder)
            label = _label(run_dir, folder)
            finals = [series.iloc[-1] for series in curves.values() if len(series)]
            arm_rows.append({'arm': label, 'env': config.get('env'), 'lambda_tf': config.get('agent', {}).get('lambda_tf'),
                             'n_seeds': len(curves), 'n_episodes': int(sum(len(s) for s in curves.values())),
                             'final_median': upper_median(finals) if finals else math.nan})
            arm_curves[label] = curves
    if not metric_rows and not arm_rows:
        raise ConfigError('run_dir', f'report: no run logs or comparison reports under {run_dir}')

    steps = sorted({int(step) for curves in arm_curves.values() for series in curves.values() for step in series.index})
    curves_frame = pd.DataFrame({'step': steps})
    for label, curves in arm_curves.items():
        if not curves:
            curves_frame[label] = math.nan
            continue
        per_seed = pd.DataFrame(curves)
        per_seed = per_seed.reindex(steps).ffill()
        curves_frame[label] = per_seed.apply(_row_upper_median, axis=1).to_numpy() if steps else []

    metrics_frame = pd.DataFrame(metric_rows, columns=METRIC_COLUMNS)
    arms_frame = pd.DataFrame(arm_rows, columns=ARM_COLUMNS)
    triples = [(r['suft_median'], r['baseline_median'], r['random_reward']) for r in metric_rows
               if None not in (r['suft_median'], r['baseline_median'], r['random_reward'])]
    try:
        ratio = mean_reward_ratio_pct(triples)
    except UndefinedResultError:
        ratio = math.nan

    output_dir = run_dir if output_dir is None else output_dir
    os.makedirs(output_dir, exist_ok=True)
    metrics_frame.to_csv(os.path.join(output_dir, 'metrics.csv'), index=False)
    arms_frame.to_csv(os.path.join(output_dir, 'arms.csv'), index=False)
    curves_frame.to_csv(os.path.join(output_dir, 'curves.csv'), index=False)
    logger.info(f'report: {len(metric_rows)} comparisons, {len(arm_rows)} arms, {len(steps)} curve points')
    return {'metrics': metrics_frame, 'arms': arms_frame, 'curves': curves_frame, 'mean_reward_ratio_pct': ratio}
