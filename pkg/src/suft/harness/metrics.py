"""
Reward statistics of the comparison protocol.

Description:
    Episode rewards of each seed are smoothed with a trailing moving average; the final
    smoothed value of every seed is summarized across seeds by the upper median (the larger
    of the two middle values of an even-sized sample). Two arms are then compared against a
    random-policy reward r with

        improvement = ((higher - r) - (lower - r)) / (lower - r) * 100
        log improvement = sign * log10(1 + |improvement|)
        reward ratio = mean over valid envs of (suft - r) / (baseline - r) * 100

    An environment is valid only when both differences to r are positive; invalid ones yield
    NaN and are excluded from means. Significance is a two-sided Welch t-test.
"""

import math

import numpy as np
import pandas as pd
from scipy.special import betainc

from suft.common.errors import DomainError, UndefinedResultError


def smooth(series, window):
    """
    Trailing moving average; the first window-1 points average over what is available.

    Args:
        series (sequence of float): Values in time order.
        window (int): Window length, >= 1.

    Returns:
        np.ndarray: Smoothed series of the same length.

    Raises:
        DomainError: If window < 1.
    """
    if window < 1:
        raise DomainError(f'smooth: window must be >= 1 ({window})')
    values = np.asarray(series, dtype=np.float64)
    if values.size == 0:
        return values
    return pd.Series(values).rolling(window, min_periods=1).mean().to_numpy()


def upper_median(values):
    """
    Median that picks the higher middle value for even-sized samples.

    Raises:
        DomainError: If ``values`` is empty.
    """
    ordered = np.sort(np.asarray(values, dtype=np.float64))
    if ordered.size == 0:
        raise DomainError('upper_median: empty sample')
    return float(ordered[ordered.size // 2])


def is_valid_triple(higher, lower, random_reward):
    return higher - random_reward > 0 and lower - random_reward > 0


def improvement_pct(higher, lower, random_reward):
    """Improvement of ``higher`` over ``lower`` in percent, NaN when the env is invalid."""
    if not is_valid_triple(higher, lower, random_reward):
        return math.nan
    return ((higher - random_reward) - (lower - random_reward)) / (lower - random_reward) * 100.0


def signed_improvement_pct(suft, baseline, random_reward):
    """
    Improvement of the SUFT arm over the baseline; negative when the baseline wins, in which
    case the magnitude is the baseline's improvement over SUFT.
    """
    if suft >= baseline:
        return improvement_pct(suft, baseline, random_reward)
    return -improvement_pct(baseline, suft, random_reward)


def log_improvement(pct):
    """sign(pct) * log10(1 + |pct|); NaN stays NaN."""
    if math.isnan(pct):
        return math.nan
    return math.copysign(math.log10(1.0 + abs(pct)), pct)


def mean_reward_ratio_pct(per_env):
    """
    Mean over valid environments of (suft - random) / (baseline - random) * 100.

    Args:
        per_env (iterable): (suft, baseline, random) triples.

    Raises:
        UndefinedResultError: If no environment is valid.
    """
    ratios = [(s - r) / (b - r) * 100.0 for s, b, r in per_env if is_valid_triple(s, b, r)]
    if not ratios:
        raise UndefinedResultError('mean_reward_ratio_pct: no environment has both arms above the random reward')
    return float(np.mean(ratios))


def human_normalized_score(agent, random_reward, human):
    """(agent - random) / (human - random) * 100."""
    if human == random_reward:
        raise UndefinedResultError('human_normalized_score: human and random rewards are equal')
    return (agent - random_reward) / (human - random_reward) * 100.0


def improvement_summary(pcts):
    """
    Headline counts over a set of per-environment improvements.

    Args:
        pcts (iterable of float): Improvements in percent, NaN for invalid environments.

    Returns:
        dict: n_valid, n_wins, frac_above_10 and frac_above_100 (fractions of valid envs).

    Raises:
        UndefinedResultError: If no value is valid.
    """
    values = np.asarray([p for p in pcts if not math.isnan(p)], dtype=np.float64)
    if values.size == 0:
        raise UndefinedResultError('improvement_summary: no valid environment')
    return dict(n_valid=int(values.size), n_wins=int(np.sum(values > 0)),
                frac_above_10=float(np.mean(values > 10.0)), frac_above_100=float(np.mean(values > 100.0)))


def welch_t_test(sample_a, sample_b):
    """
    Two-sided Welch t-test.

    The p-value is I_{df/(df+t^2)}(df/2, 1/2) with the Welch-Satterthwaite degrees of freedom.

    Args:
        sample_a (sequence of float): At least two values.
        sample_b (sequence of float): At least two values.

    Returns:
        float: p-value in [0, 1].

    Raises:
        UndefinedResultError: If a sample has fewer than two values or both have zero variance.
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise UndefinedResultError(f'welch_t_test: each sample needs at least two values ({a.size}, {b.size})')
    se_a = a.var(ddof=1) / a.size
    se_b = b.var(ddof=1) / b.size
    se2 = se_a + se_b
    if se2 == 0:
        raise UndefinedResultError('welch_t_test: both samples have zero variance')
    t = (a.mean() - b.mean()) / math.sqrt(se2)
    df = se2 ** 2 / (se_a ** 2 / (a.size - 1) + se_b ** 2 / (b.size - 1))
    p = betainc(df / 2.0, 0.5, df / (df + t * t))
    return float(min(1.0, max(0.0, p)))
