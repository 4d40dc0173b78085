"""
Controlled baseline-versus-SUFT comparison.

Description:
    Two arms may differ in agent.lambda_tf only (seeds and output folders aside); anything
    else is a protocol error. Each arm is trained on the same seed list. Per seed the episode
    rewards are smoothed and the final smoothed value kept; each arm is summarized by the
    upper median of those values, and the arms are compared with the improvement, log
    improvement and reward-ratio formulas against the reward of a uniform random policy.
    The p-value is a two-sided Welch test on the per-seed final values.

    When both arms have zero spread the test is undefined; the report then uses p = 1 for
    equal means and p = 0 otherwise.
"""

import logging
import math
import os
from dataclasses import dataclass, asdict, replace

import pandas as pd

from suft.common.errors import ProtocolError, UndefinedResultError
from suft.common.utilities import write_json
from suft.harness.metrics import (smooth, upper_median, signed_improvement_pct, log_improvement,
                                  mean_reward_ratio_pct, welch_t_test)
from suft.harness.training import train_seeds, random_policy_reward

logger = logging.getLogger(__name__)

COMPARISON_FILE = 'comparison.json'
PER_SEED_FILE = 'per_seed.csv'
DEFAULT_SWEEP_LAMBDAS = (0.5, 1.0, 1.5)


@dataclass(frozen=True)
class ComparisonReport:
    """
    Attributes:
        env (str): Environment of both arms.
        seeds (tuple): Shared seed list.
        baseline_lambda (float): lambda_tf of the baseline arm.
        suft_lambda (float): lambda_tf of the SUFT arm.
        baseline_median (float): Upper median of the baseline's final smoothed rewards.
        suft_median (float): Same for the SUFT arm.
        random_reward (float): Mean return of the uniform random policy.
        improvement_pct (float): Signed improvement of SUFT over the baseline, NaN if invalid.
        log_improvement (float): sign * log10(1 + |improvement_pct|).
        reward_ratio_pct (float): (suft - random) / (baseline - random) * 100, NaN if invalid.
        p_value (float): Two-sided Welch p-value in [0, 1].
        baseline_finals (tuple): Final smoothed reward per seed, baseline arm.
        suft_finals (tuple): Same for the SUFT arm.
    """
    env: str
    seeds: tuple
    baseline_lambda: float
    suft_lambda: float
    baseline_median: float
    suft_median: float
    random_reward: float
    improvement_pct: float
    log_improvement: float
    reward_ratio_pct: float
    p_value: float
    baseline_finals: tuple
    suft_finals: tuple

    @property
    def valid(self):
        return not math.isnan(self.improvement_pct)

    def as_dict(self):
        document = asdict(self)
        for key, value in document.items():
            if isinstance(value, float) and math.isnan(value):
                document[key] = None
        document['seeds'] = list(self.seeds)
        document['baseline_finals'] = list(self.baseline_finals)
        document['suft_finals'] = list(self.suft_finals)
        document['valid'] = self.valid
        return document

    def per_seed_frame(self):
        return pd.DataFrame({'seed': list(self.seeds), 'baseline_final': list(self.baseline_finals),
                             'suft_final': list(self.suft_finals)})

    def write(self, output_dir):
        write_json(os.path.join(output_dir, COMPARISON_FILE), self.as_dict())
        self.per_seed_frame().to_csv(os.path.join(output_dir, PER_SEED_FILE), index=False)


def _flatten(document, prefix=''):
    flat = {}
    for key, value in document.items():
        path = f'{prefix}.{key}' if prefix else key
        if isinstance(value, dict):
            flat.update(_flatten(value, path))
        else:
            flat[path] = value
    return flat


def check_protocol(config_baseline, config_suft):
    """
    Verifies that two run configs differ at most in agent.lambda_tf, seeds and output_dir.

    Raises:
        ProtocolError: Listing every other field that differs.
    """
    baseline = _flatten(config_baseline.protocol_dict())
    suft = _flatten(config_suft.protocol_dict())
    drift = sorted(key for key in set(baseline) | set(suft)
                   if key != 'agent.lambda_tf' and baseline.get(key) != suft.get(key))
    if drift:
        details = ', '.join(f'{key}: {baseline.get(key)!r} vs {suft.get(key)!r}' for key in drift)
        raise ProtocolError(f'compare: arms may differ only in agent.lambda_tf ({details})')


def final_smoothed_rewards(records, window):
    """
    Last value of each run's smoothed episode rewards.

    Raises:
        UndefinedResultError: If a run completed no episode.
    """
    finals = []
    for record in records:
        if not record.episode_rewards:
            raise UndefinedResultError(f'compare: seed {record.seed} completed no episode, increase steps')
        finals.append(float(smooth(record.episode_rewards, window)[-1]))
    return tuple(finals)


def _p_value(baseline_finals, suft_finals):
    try:
        return welch_t_test(suft_finals, baseline_finals)
    except UndefinedResultError:
        if len(baseline_finals) < 2 or len(suft_finals) < 2:
            raise
        return 1.0 if suft_finals[0] == baseline_finals[0] else 0.0


def build_report(env, seeds, baseline_lambda, suft_lambda, baseline_finals, suft_finals, random_reward):
    """Computes every comparison statistic from per-seed final rewards."""
    baseline_median = upper_median(baseline_finals)
    suft_median = upper_median(suft_finals)
    improvement = signed_improvement_pct(suft_median, baseline_median, random_reward)
    try:
        ratio = mean_reward_ratio_pct([(suft_median, baseline_median, random_reward)])
    except UndefinedResultError:
        ratio = math.nan
    return ComparisonReport(env=env, seeds=tuple(seeds), baseline_lambda=baseline_lambda, suft_lambda=suft_lambda,
                            baseline_median=baseline_median, suft_median=suft_median, random_reward=random_reward,
                            improvement_pct=improvement, log_improvement=log_improvement(improvement),
                            reward_ratio_pct=ratio, p_value=_p_value(baseline_finals, suft_finals),
                            baseline_finals=tuple(baseline_finals), suft_finals=tuple(suft_finals))


def _seed_list(config, n_seeds, seeds):
    if seeds is not None:
        return list(seeds)
    if n_seeds is not None:
        return list(range(n_seeds))
    return list(config.seeds)


def compare(config_baseline, config_suft, env=None, n_seeds=None, seeds=None, output_dir=None,
            random_episodes=10, verbose=False):
    """
    Trains both arms on a shared seed list and compares them.

    Args:
        config_baseline (RunConfig): Baseline arm, usually lambda_tf = 0.
        config_suft (RunConfig): SUFT arm.
        env (str, optional): Overrides the environment of both arms.
        n_seeds (int, optional): Use seeds 0..n_seeds-1 instead of the baseline's seed list.
        seeds (sequence of int, optional): Explicit seed list; wins over ``n_seeds``.
        output_dir (str, optional): Writes baseline/, suft/, comparison.json and per_seed.csv.
        random_episodes (int, optional): Episodes per seed for the random-policy reward.
        verbose (bool, optional): Defaults to False.

    Returns:
        ComparisonReport

    Raises:
        ProtocolError: If the arms differ beyond agent.lambda_tf.
    """
    if env is not None:
        config_baseline, config_suft = replace(config_baseline, env=env), replace(config_suft, env=env)
    check_protocol(config_baseline, config_suft)
    seed_list = _seed_list(config_baseline, n_seeds, seeds)
    level = logging.INFO if verbose else logging.DEBUG
    logger.log(level, f'compare: {config_baseline.env}, lambda_tf {config_baseline.agent.lambda_tf} vs '
                      f'{config_suft.agent.lambda_tf}, seeds {seed_list}')

    arm_dirs = (None, None) if output_dir is None else (os.path.join(output_dir, 'baseline'), os.path.join(output_dir, 'suft'))
    baseline_records = train_seeds(config_baseline, seed_list, arm_dirs[0], verbose)
    suft_records = train_seeds(config_suft, seed_list, arm_dirs[1], verbose)
    window = config_baseline.smoothing_window
    report = build_report(config_baseline.env, seed_list, config_baseline.agent.lambda_tf, config_suft.agent.lambda_tf,
                          final_smoothed_rewards(baseline_records, window), final_smoothed_rewards(suft_records, window),
                          random_policy_reward(config_baseline.env, seed_list, random_episodes))
    if output_dir is not None:
        report.write(output_dir)
    logger.log(level, f'compare: improvement {report.improvement_pct:.2f}%, p={report.p_value:.4g}')
    return report


def lambda_sweep(config, lambdas=DEFAULT_SWEEP_LAMBDAS, seeds=None, output_dir=None, random_episodes=10, verbose=False):
    """
    Compares a lambda_tf = 0 baseline against each lambda_tf of a grid.

    The baseline arm and the random-policy reward are computed once and shared by every
    grid point.

    Args:
        config (RunConfig): Arm template; its lambda_tf is replaced.
        lambdas (sequence of float, optional): Grid, defaults to (0.5, 1.0, 1.5).
        seeds (sequence of int, optional): Defaults to config.seeds.
        output_dir (str, optional): Writes one folder per arm plus sweep.csv.

    Returns:
        list: One ComparisonReport per grid value.
    """
    seed_list = _seed_list(config, None, seeds)
    baseline = config.with_lambda(0.0)
    arm_dir = (lambda name: None) if output_dir is None else (lambda name: os.path.join(output_dir, name))
    baseline_finals = final_smoothed_rewards(train_seeds(baseline, seed_list, arm_dir('lambda_0'), verbose),
                                             config.smoothing_window)
    random_reward = random_policy_reward(config.env, seed_list, random_episodes)
    reports = []
    for lambda_tf in lambdas:
        arm = config.with_lambda(lambda_tf)
        finals = final_smoothed_rewards(train_seeds(arm, seed_list, arm_dir(f'lambda_{lambda_tf:g}'), verbose),
                                        config.smoothing_window)
        reports.append(build_report(config.env, seed_list, 0.0, float(lambda_tf), baseline_finals, finals, random_reward))
    if output_dir is not None:
        frame = pd.DataFrame([{k: v for k, v in r.as_dict().items() if k not in ('seeds', 'baseline_finals', 'suft_finals')}
                              for r in reports])
        frame.to_csv(os.path.join(output_dir, 'sweep.csv'), index=False)
    return reports
