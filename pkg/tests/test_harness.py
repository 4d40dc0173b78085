import json
import math
import os

import numpy as np
import pandas as pd
import pytest
from scipy import stats

from suft.common.errors import ConfigError, DomainError, ProtocolError, UndefinedResultError
from suft.common.utilities import read_jsonl
from suft.harness import (RunConfig, train_run, train_seeds, random_policy_reward, smooth, upper_median,
                          improvement_pct, signed_improvement_pct, log_improvement, mean_reward_ratio_pct,
                          welch_t_test, human_normalized_score, improvement_summary, check_protocol, compare,
                          lambda_sweep, build_report)
from suft.harness import comparison
from suft.harness.training import RunRecord, RUN_CONFIG_FILE, RUN_LOG_FILE, CHECKPOINT_FOLDER

# Reward triples (higher, lower, random) of three Atari rows of a 4K-buffer DQN comparison.
PONG = (-17.9, -20.2, -20.7)
KANGAROO = (5810.0, 460.0, 100.0)
KRULL_SUFT, KRULL_BASELINE, KRULL_RANDOM = 3670.0, 315.0, 1598.0


class TestSmoothing:
    def test_window_one_is_identity(self):
        np.testing.assert_array_equal(smooth([3.0, -1.0, 2.0], 1), [3.0, -1.0, 2.0])

    def test_partial_windows(self):
        np.testing.assert_allclose(smooth([0.0, 10.0], 2), [0.0, 5.0])
        np.testing.assert_allclose(smooth([1.0, 2.0, 3.0, 4.0], 3), [1.0, 1.5, 2.0, 3.0])

    def test_constant_and_empty(self):
        np.testing.assert_allclose(smooth(np.full(7, 2.5), 4), np.full(7, 2.5))
        assert smooth([], 5).size == 0

    def test_invalid_window(self):
        with pytest.raises(DomainError):
            smooth([1.0], 0)


class TestUpperMedian:
    @pytest.mark.parametrize('values, expected', [((1, 2, 3, 4), 3.0), ((5,), 5.0), ((3, 1, 2), 2.0), ((4, 1), 4.0)])
    def test_values(self, values, expected):
        assert upper_median(values) == expected

    def test_empty(self):
        with pytest.raises(DomainError):
            upper_median([])


class TestImprovementMetrics:
    def test_pong(self):
        assert improvement_pct(*PONG) == pytest.approx(460.0)
        assert log_improvement(improvement_pct(*PONG)) == pytest.approx(math.log10(461.0))
        assert math.log10(461.0) == pytest.approx(2.6637, abs=1e-4)

    def test_kangaroo(self):
        assert improvement_pct(*KANGAROO) == pytest.approx((5810 - 100) / (460 - 100) * 100 - 100)
        assert improvement_pct(*KANGAROO) == pytest.approx(1486.11, abs=0.01)

    def test_equal_arms(self):
        assert improvement_pct(5.0, 5.0, 1.0) == 0.0

    def test_krull_is_invalid(self):
        assert math.isnan(improvement_pct(KRULL_SUFT, KRULL_BASELINE, KRULL_RANDOM))
        assert math.isnan(signed_improvement_pct(KRULL_SUFT, KRULL_BASELINE, KRULL_RANDOM))
        assert math.isnan(log_improvement(math.nan))

    def test_signed_improvement(self):
        assert signed_improvement_pct(-17.9, -20.2, -20.7) == pytest.approx(460.0)
        assert signed_improvement_pct(-20.2, -17.9, -20.7) == pytest.approx(-460.0)
        assert log_improvement(-460.0) == pytest.approx(-math.log10(461.0))

    def test_reward_ratio(self):
        pong_suft, pong_baseline, pong_random = PONG
        assert mean_reward_ratio_pct([PONG]) == pytest.approx(560.0)
        assert mean_reward_ratio_pct([(3.0, 3.0, 1.0)]) == pytest.approx(100.0)
        assert mean_reward_ratio_pct([(2.0, 2.0, 1.0), (4.0, 2.0, 1.0)]) == pytest.approx(200.0)
        with_krull = [(pong_suft, pong_baseline, pong_random), (KRULL_SUFT, KRULL_BASELINE, KRULL_RANDOM)]
        assert mean_reward_ratio_pct(with_krull) == pytest.approx(560.0)

    def test_reward_ratio_without_valid_env(self):
        with pytest.raises(UndefinedResultError):
            mean_reward_ratio_pct([(KRULL_SUFT, KRULL_BASELINE, KRULL_RANDOM)])

    def test_human_normalized_score(self):
        assert human_normalized_score(60.0, 10.0, 110.0) == pytest.approx(50.0)
        with pytest.raises(UndefinedResultError):
            human_normalized_score(1.0, 2.0, 2.0)

    def test_summary(self):
        summary = improvement_summary([460.0, 1486.11, -5.0, math.nan, 50.0])
        assert summary == dict(n_valid=4, n_wins=3, frac_above_10=0.75, frac_above_100=0.5)


class TestWelch:
    def test_identical_samples(self):
        assert welch_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == pytest.approx(1.0)

    def test_separated_samples(self):
        jitter = 1e-9 * np.array([1.0, -1.0, 0.5, -0.5, 0.0])
        assert welch_t_test(np.zeros(5) + jitter, np.ones(5) - jitter) < 1e-6

    def test_textbook_pair(self):
        z = np.random.default_rng(7).normal(size=(2, 10))
        unit = (z - z.mean(axis=1, keepdims=True)) / z.std(axis=1, ddof=1, keepdims=True)
        a, b = 10.0 + unit[0], 12.0 + unit[1]
        p = welch_t_test(a, b)
        assert 1e-4 < p < 1e-3
        assert p == pytest.approx(stats.ttest_ind(a, b, equal_var=False).pvalue, rel=1e-8)

    def test_matches_scipy_on_unequal_samples(self, rng):
        a, b = rng.normal(0.0, 1.0, size=7), rng.normal(0.8, 3.0, size=12)
        assert welch_t_test(a, b) == pytest.approx(stats.ttest_ind(a, b, equal_var=False).pvalue, rel=1e-8)

    @pytest.mark.parametrize('a, b', [([1.0], [1.0, 2.0]), ([2.0, 2.0], [3.0, 3.0])])
    def test_degenerate(self, a, b):
        with pytest.raises(UndefinedResultError):
            welch_t_test(a, b)


class TestRunConfig:
    def test_hash_ignores_key_order_seeds_and_output(self, run_document):
        document = run_document()
        reordered = json.loads(json.dumps(document, sort_keys=True))
        reordered['agent'] = dict(reversed(list(reordered['agent'].items())))
        base = RunConfig.from_dict(document)
        assert RunConfig.from_dict(reordered).config_hash == base.config_hash
        moved = dict(document, seeds=[5, 6, 7], output_dir='elsewhere')
        assert RunConfig.from_dict(moved).config_hash == base.config_hash
        assert RunConfig.from_dict(run_document(gamma=0.8)).config_hash != base.config_hash

    def test_round_trip(self, run_document):
        config = RunConfig.from_dict(run_document(lambda_tf=1.0))
        assert RunConfig.from_dict(config.to_dict()) == config
        assert config.learning_starts == 8

    @pytest.mark.parametrize('change, field_path', [
        ({'env': 'pong'}, 'env'),
        ({'steps': -1}, 'steps'),
        ({'learning_starts': 4}, 'learning_starts'),
        ({'seeds': []}, 'seeds'),
        ({'smoothing': 5}, 'smoothing'),
    ])
    def test_invalid(self, run_document, change, field_path):
        with pytest.raises(ConfigError) as excinfo:
            RunConfig.from_dict(dict(run_document(), **change))
        assert excinfo.value.field_path == field_path

    def test_nested_field_path(self, run_document):
        with pytest.raises(ConfigError) as excinfo:
            RunConfig.from_dict(run_document(epsilon={'start': 1.5}))
        assert excinfo.value.field_path == 'agent.epsilon.start'

    def test_epsilon_resolution(self, run_document):
        document = run_document(steps=1000)
        del document['agent']['epsilon']
        assert RunConfig.from_dict(document).resolved_agent().epsilon.decay_steps == 200


class TestTraining:
    def test_deterministic(self, run_document):
        config = RunConfig.from_dict(run_document(lambda_tf=1.0))
        first, second = train_run(config, 3), train_run(config, 3)
        assert first == second
        assert first.episode_rewards and first.updates

    def test_logs_are_byte_identical(self, run_document, tmp_path):
        config = RunConfig.from_dict(run_document(lambda_tf=1.0, steps=250))
        train_run(config, 3, output_dir=str(tmp_path / 'a'))
        train_run(config, 3, output_dir=str(tmp_path / 'b'))
        first = (tmp_path / 'a' / 'seed_3' / RUN_LOG_FILE).read_bytes()
        assert first
        assert first == (tmp_path / 'b' / 'seed_3' / RUN_LOG_FILE).read_bytes()

    def test_zero_steps(self, run_document):
        record = train_run(RunConfig.from_dict(run_document(steps=0)), 0)
        assert record.episode_rewards == () and record.updates == () and record.log == ()

    def test_suft_term_follows_lambda(self, run_document):
        suft = train_run(RunConfig.from_dict(run_document(lambda_tf=1.0, steps=400)), 0)
        baseline = train_run(RunConfig.from_dict(run_document(lambda_tf=0.0, steps=400)), 0)
        assert np.all(suft.suft_terms[20:] > 0)
        assert np.all(baseline.suft_terms == 0)
        for m in suft.updates:
            assert m.total_loss == pytest.approx(m.td_loss + m.suft_term, abs=1e-12)

    def test_log_rows(self, run_document, tmp_path):
        config = RunConfig.from_dict(run_document(lambda_tf=1.0, steps=250))
        record = train_run(config, 1, output_dir=str(tmp_path))
        rows = read_jsonl(os.path.join(tmp_path, 'seed_1', RUN_LOG_FILE))
        assert rows == [json.loads(json.dumps(row)) for row in record.log]
        assert all(set(row) == {'step', 'episode', 'reward', 'td_loss', 'suft_term', 'total_loss'} for row in rows)
        steps = [row['step'] for row in rows]
        assert steps == sorted(set(steps))
        assert [row['reward'] for row in rows if row['reward'] is not None] == pytest.approx(list(record.episode_rewards))
        assert len([row for row in rows if row['td_loss'] is not None]) == len(record.updates)
        assert os.path.isfile(os.path.join(tmp_path, 'seed_1', CHECKPOINT_FOLDER, 'agent_config.json'))

    def test_seed_sweep(self, run_document, tmp_path):
        config = RunConfig.from_dict(run_document(steps=150))
        records = train_seeds(config, output_dir=str(tmp_path))
        assert [r.seed for r in records] == [0, 1]
        assert records[0] == train_run(config, 0)
        saved = RunConfig.from_file(os.path.join(tmp_path, RUN_CONFIG_FILE))
        assert saved.config_hash == config.config_hash

    def test_random_policy_reward(self):
        value = random_policy_reward('gridworld', [0, 1], episodes=3)
        assert value == random_policy_reward('gridworld', [0, 1], episodes=3)
        assert -1.0 <= value <= 1.0


class TestComparison:
    def test_protocol_drift(self, run_document):
        baseline = RunConfig.from_dict(run_document(lambda_tf=0.0))
        with pytest.raises(ProtocolError, match='agent.gamma'):
            check_protocol(baseline, RunConfig.from_dict(run_document(lambda_tf=1.0, gamma=0.8)))
        with pytest.raises(ProtocolError, match='steps'):
            check_protocol(baseline, RunConfig.from_dict(run_document(lambda_tf=1.0, steps=301)))
        check_protocol(baseline, RunConfig.from_dict(run_document(lambda_tf=1.0, seeds=(4,))))

    def test_compare_refuses_drift_before_training(self, run_document, tmp_path):
        with pytest.raises(ProtocolError):
            compare(RunConfig.from_dict(run_document()), RunConfig.from_dict(run_document(lambda_tf=1.0, lr=0.01)),
                    output_dir=str(tmp_path))
        assert not os.listdir(tmp_path)

    def test_no_episode(self):
        record = RunRecord(config_hash='x', seed=0)
        with pytest.raises(UndefinedResultError):
            comparison.final_smoothed_rewards([record], 5)

    def test_zero_variance_arms(self):
        equal = comparison.build_report('gridworld', (0, 1), 0.0, 1.0, (0.5, 0.5), (0.5, 0.5), -1.0)
        assert equal.p_value == 1.0 and equal.improvement_pct == 0.0
        apart = comparison.build_report('gridworld', (0, 1), 0.0, 1.0, (0.5, 0.5), (0.7, 0.7), -1.0)
        assert apart.p_value == 0.0 and apart.improvement_pct == pytest.approx(0.2 / 1.5 * 100)

    def test_invalid_env_report(self):
        report = comparison.build_report('gridworld', (0, 1), 0.0, 1.0, (-2.0, -1.0), (0.0, 1.0), 0.5)
        assert not report.valid
        document = report.as_dict()
        assert document['improvement_pct'] is None and document['valid'] is False

    def test_compare(self, run_document, tmp_path):
        report = compare(RunConfig.from_dict(run_document(lambda_tf=0.0)), RunConfig.from_dict(run_document(lambda_tf=1.0)),
                         output_dir=str(tmp_path), random_episodes=2)
        assert report.seeds == (0, 1)
        assert (report.baseline_lambda, report.suft_lambda) == (0.0, 1.0)
        assert 0.0 <= report.p_value <= 1.0
        assert report.suft_median == upper_median(report.suft_finals)
        with open(os.path.join(tmp_path, comparison.COMPARISON_FILE), encoding='utf-8') as f:
            assert json.load(f)['seeds'] == [0, 1]
        per_seed = pd.read_csv(os.path.join(tmp_path, comparison.PER_SEED_FILE))
        assert list(per_seed.columns) == ['seed', 'baseline_final', 'suft_final']
        for arm in ('baseline', 'suft'):
            assert os.path.isfile(os.path.join(tmp_path, arm, 'seed_0', RUN_LOG_FILE))

        tables = build_report(str(tmp_path))
        assert len(tables['metrics']) == 1 and len(tables['arms']) == 2
        assert tables['curves']['step'].is_monotonic_increasing
        assert {'baseline', 'suft'} <= set(tables['curves'].columns)
        for name in ('metrics.csv', 'arms.csv', 'curves.csv'):
            assert os.path.isfile(os.path.join(tmp_path, name))

    def test_equal_arms(self, run_document):
        config = RunConfig.from_dict(run_document(lambda_tf=1.0, steps=200))
        report = compare(config, config, random_episodes=2)
        assert report.baseline_finals == report.suft_finals
        assert report.p_value == pytest.approx(1.0)
        assert report.improvement_pct == 0.0 or math.isnan(report.improvement_pct)

    def test_env_override(self, run_document):
        document = run_document(steps=600, seeds=(0, 1))
        document['smoothing_window'] = 2
        config = RunConfig.from_dict(document)
        report = compare(config, config.with_lambda(0.5), env='cartpole', random_episodes=1)
        assert report.env == 'cartpole'

    def test_lambda_sweep(self, run_document, tmp_path):
        config = RunConfig.from_dict(run_document(lambda_tf=1.0, steps=200))
        reports = lambda_sweep(config, lambdas=(0.5, 1.5), output_dir=str(tmp_path), random_episodes=2)
        assert [r.suft_lambda for r in reports] == [0.5, 1.5]
        assert reports[0].baseline_finals == reports[1].baseline_finals
        assert {'lambda_0', 'lambda_0.5', 'lambda_1.5', 'sweep.csv'} <= set(os.listdir(tmp_path))
        assert len(pd.read_csv(os.path.join(tmp_path, 'sweep.csv'))) == 2


class TestReport:
    def test_missing_folder(self, tmp_path):
        with pytest.raises(ConfigError):
            build_report(str(tmp_path / 'absent'))

    def test_empty_folder(self, tmp_path):
        with pytest.raises(ConfigError):
            build_report(str(tmp_path))

    def test_single_arm(self, run_document, tmp_path):
        config = RunConfig.from_dict(run_document(lambda_tf=1.0, steps=250))
        train_seeds(config, output_dir=str(tmp_path / 'arm'))
        tables = build_report(str(tmp_path), output_dir=str(tmp_path / 'tables'))
        assert tables['metrics'].empty
        assert tables['arms'].iloc[0]['arm'] == 'arm' and tables['arms'].iloc[0]['n_seeds'] == 2
        assert math.isnan(tables['mean_reward_ratio_pct'])
        curves = pd.read_csv(tmp_path / 'tables' / 'curves.csv')
        assert list(curves.columns) == ['step', 'arm'] and curves['step'].is_monotonic_increasing
