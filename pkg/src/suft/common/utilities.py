"""
Small shared utilities: logging setup, seeding, worker limits and file writers.
"""

import json
import logging
import os

import numpy as np

from suft.common.errors import ConfigError


def setup_logging(verbose=False):
    """
    Configures the root logger once for command-line use.

    Args:
        verbose (bool, optional): INFO level when True, WARNING otherwise. Defaults to False.
    """
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )


def make_rngs(seed, n):
    """Returns ``n`` independent numpy Generators derived from a single integer seed."""
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(n)]


def worker_count(default_cap=4):
    """
    Number of worker threads for seed sweeps, capped by the SUFT_THREADS variable.

    Raises:
        ConfigError: If SUFT_THREADS is set but is not a positive integer.
    """
    cap = os.environ.get('SUFT_THREADS')
    if cap is None:
        return max(1, min(default_cap, os.cpu_count() or 1))
    try:
        value = int(cap)
    except ValueError:
        raise ConfigError('SUFT_THREADS', f'expected a positive integer, got {cap!r}') from None
    if value < 1:
        raise ConfigError('SUFT_THREADS', f'expected a positive integer, got {cap!r}')
    return value


def write_json(path, data):
    """Writes ``data`` as indented, key-sorted JSON, through a temporary file."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    temp_path = f'{path}.tmp'
    with open(temp_path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write('\n')
    os.replace(temp_path, path)


def write_jsonl(path, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        for row in rows:
            f.write(json.dumps(row, separators=(', ', ': ')))
            f.write('\n')


def read_jsonl(path):
    with open(path, 'r', encoding='utf-8') as f:
        return [json.loads(line) for line in f if line.strip()]
