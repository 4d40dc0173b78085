import json
import os

import pytest

from suft import __version__
from suft import cli
from suft.cli import main, EXIT_OK, EXIT_CONFIG, EXIT_VERIFICATION, EXIT_PROTOCOL
from suft.network.grad_check import GradCheckReport


def write_config(path, document):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(document, f)
    return str(path)


class TestVerifyBound:
    def test_l1_holds(self, capsys, tmp_path):
        output = tmp_path / 'bound.json'
        assert main(['verify-bound', '--trials', '300', '--max-controls', '3', '--output', str(output)]) == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        assert summary['trials'] == 300 and summary['n_violations'] == 0
        with open(output, encoding='utf-8') as f:
            assert json.load(f)['n_violations'] == 0

    def test_l2_reports_without_failing(self, capsys):
        assert main(['verify-bound', '--trials', '200', '--loss', 'l2', '--seed', '3']) == EXIT_OK
        assert json.loads(capsys.readouterr().out)['loss'] == 'l2'

    def test_l1_violation_fails(self, capsys, monkeypatch):
        def violated(trials, loss, **kwargs):
            return dict(trials=trials, loss=loss.name, seed=kwargs['seed'], max_controls=kwargs['max_controls'],
                        min_slack=-0.5, n_violations=1, violations=[], pointwise_violation_trials=0)

        monkeypatch.setattr(cli, 'run_bound_trials', violated)
        assert main(['verify-bound', '--trials', '1']) == EXIT_VERIFICATION
        assert json.loads(capsys.readouterr().out)['n_violations'] == 1

    def test_l2_violation_is_reported_only(self, capsys, monkeypatch):
        def violated(trials, loss, **kwargs):
            return dict(trials=trials, loss=loss.name, seed=0, max_controls=1, min_slack=-0.5, n_violations=1,
                        violations=[], pointwise_violation_trials=0)

        monkeypatch.setattr(cli, 'run_bound_trials', violated)
        assert main(['verify-bound', '--trials', '1', '--loss', 'l2']) == EXIT_OK

    @pytest.mark.parametrize('argv', [['verify-bound', '--trials', '0'], ['verify-bound', '--loss', 'huber'],
                                      ['verify-bound', '--max-controls', '0'], ['fit'], []])
    def test_usage_errors(self, argv):
        assert main(argv) == EXIT_CONFIG


def test_gradcheck(capsys):
    assert main(['gradcheck', '--instances', '5', '--seed', '1']) == EXIT_OK
    assert 'passed' in capsys.readouterr().out


def test_gradcheck_failure(capsys, monkeypatch):
    monkeypatch.setattr(cli, 'grad_check', lambda net, inputs, objective: GradCheckReport(1.0, 3, False, 10, 0))
    assert main(['gradcheck', '--instances', '2']) == EXIT_VERIFICATION
    out = capsys.readouterr().out
    assert 'FAILED' in out
    assert '"worst_index": 3' in out


def test_version(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(['--version'])
    assert excinfo.value.code == 0
    assert __version__ in capsys.readouterr().out


class TestRunCommands:
    def test_train_and_report(self, capsys, tmp_path, run_document):
        config = write_config(tmp_path / 'run.json', run_document(lambda_tf=1.0, steps=200))
        run_dir = str(tmp_path / 'run')
        assert main(['train', config, '--output', run_dir, '--seeds', '0', '1']) == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        assert [run['seed'] for run in summary['runs']] == [0, 1]
        assert all(run['mean_suft_term'] > 0 for run in summary['runs'])
        assert main(['report', run_dir]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)['arms'] == 1
        assert os.path.isfile(os.path.join(run_dir, 'curves.csv'))

    def test_compare(self, capsys, tmp_path, run_document):
        baseline = write_config(tmp_path / 'baseline.json', run_document(lambda_tf=0.0, steps=200))
        suft = write_config(tmp_path / 'suft.json', run_document(lambda_tf=1.0, steps=200))
        output = str(tmp_path / 'cmp')
        assert main(['compare', baseline, suft, '--n-seeds', '2', '--random-episodes', '2', '--output', output]) == EXIT_OK
        document = json.loads(capsys.readouterr().out)
        assert document['seeds'] == [0, 1] and 0.0 <= document['p_value'] <= 1.0
        assert os.path.isfile(os.path.join(output, 'comparison.json'))

    def test_compare_protocol_drift(self, tmp_path, run_document):
        baseline = write_config(tmp_path / 'baseline.json', run_document(lambda_tf=0.0))
        suft = write_config(tmp_path / 'suft.json', run_document(lambda_tf=1.0, gamma=0.8))
        assert main(['compare', baseline, suft, '--output', str(tmp_path / 'cmp')]) == EXIT_PROTOCOL
        assert not os.path.exists(tmp_path / 'cmp')

    def test_sweep(self, capsys, tmp_path, run_document):
        config = write_config(tmp_path / 'run.json', run_document(lambda_tf=1.0, steps=200))
        output = str(tmp_path / 'sweep')
        assert main(['sweep', config, '--lambdas', '0.5', '--random-episodes', '2', '--output', output]) == EXIT_OK
        assert [r['suft_lambda'] for r in json.loads(capsys.readouterr().out)['results']] == [0.5]

    def test_invalid_config(self, tmp_path, run_document, caplog):
        config = write_config(tmp_path / 'bad.json', run_document(gamma=2.0))
        assert main(['train', config]) == EXIT_CONFIG
        assert 'agent.gamma' in caplog.text

    def test_missing_files(self, tmp_path):
        assert main(['train', str(tmp_path / 'absent.json')]) == EXIT_CONFIG
        assert main(['report', str(tmp_path / 'absent')]) == EXIT_CONFIG
