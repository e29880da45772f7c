"""
Tests del CLI: subcomandos, códigos de salida y archivos producidos
"""
import pytest
import yaml

from ldadam.checks import CheckResult
from ldadam.commands import EXIT_DIVERGENCE, EXIT_MONITOR, EXIT_OK, EXIT_USAGE
from ldadam.main import build_parser, main


# ==================== FIXTURES ====================#
@pytest.fixture
def write_config(tmp_path):
    """Escribe un YAML de experimento y retorna su ruta"""
    def _write(name='quad', **overrides):
        data = {
            'name': name,
            'seed': 1,
            'problem': {'kind': 'quadratic', 'd': 8, 'noise_sigma': 0.5, 'seed': 1},
            'optimizer': {'kind': 'ldadam', 'rank': 2, 'mode': 'analytical'},
            'steps': 30,
            'lr': 0.05,
        }
        data.update(overrides)
        path = tmp_path / f"{name}.yaml"
        path.write_text(yaml.safe_dump(data), encoding='utf-8')
        return path
    return _write


# ==================== TESTS: PARSER ====================#
@pytest.mark.cli
class TestParser:
    """Errores de uso"""

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main(['frobnicate'])
        assert exc.value.code == EXIT_USAGE

    def test_missing_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == EXIT_USAGE

    def test_run_requires_config(self):
        with pytest.raises(SystemExit) as exc:
            main(['run'])
        assert exc.value.code == EXIT_USAGE

    def test_subcommands_registered(self):
        parser = build_parser()
        for command in ('run', 'compare', 'memory', 'check', 'dump-data'):
            assert parser.parse_args([command] + (['--config', 'x'] if command in ('run', 'compare') else [])
                                     + (['--config', 'x', '--output', 'y'] if command == 'dump-data' else []))


# ==================== TESTS: RUN ====================#
@pytest.mark.cli
class TestRunCommand:
    """ldadam run"""

    def test_writes_csv(self, write_config, tmp_path, capsys):
        output = tmp_path / 'out.csv'
        code = main(['run', '--config', str(write_config()), '--output', str(output)])
        assert code == EXIT_OK
        lines = output.read_text(encoding='utf-8').splitlines()
        assert lines[0] == 'step,loss,grad_norm,b_norm,e_norm,q_r,vhat_max,lr'
        assert len(lines) == 31
        assert 'pérdida final' in capsys.readouterr().out

    def test_default_output_next_to_config(self, write_config):
        path = write_config('defaults')
        assert main(['run', '--config', str(path)]) == EXIT_OK
        assert path.with_suffix('.csv').exists()

    def test_missing_config(self, tmp_path):
        output = tmp_path / 'never.csv'
        code = main(['run', '--config', str(tmp_path / 'missing.yaml'), '--output', str(output)])
        assert code == EXIT_USAGE
        assert not output.exists()

    def test_invalid_config(self, write_config, tmp_path):
        path = write_config('bad', optimizer={'kind': 'ldadam', 'rank': 2, 'warp': 9})
        assert main(['run', '--config', str(path), '--output', str(tmp_path / 'bad.csv')]) == EXIT_USAGE

    def test_divergence_exit_code(self, write_config, tmp_path):
        path = write_config('boom', optimizer={'kind': 'adam'}, lr=1e300)
        output = tmp_path / 'boom.csv'
        assert main(['run', '--config', str(path), '--output', str(output)]) == EXIT_DIVERGENCE
        assert output.exists()

    def test_monitors_reported(self, write_config, tmp_path, capsys):
        path = write_config('monitored', monitors=['lemma1', 'lemma4', 'gamma_delta'])
        assert main(['run', '--config', str(path), '--output', str(tmp_path / 'm.csv')]) == EXIT_OK
        out = capsys.readouterr().out
        assert 'lemma1' in out and 'gamma_delta' in out
        assert (tmp_path / 'm.monitors.csv').exists()

    def test_metrics_file(self, write_config, tmp_path):
        metrics = tmp_path / 'metrics' / 'run.prom'
        code = main(['run', '--config', str(write_config()), '--output', str(tmp_path / 'o.csv'),
                     '--metrics-file', str(metrics)])
        assert code == EXIT_OK
        assert 'ldadam_steps_total' in metrics.read_text(encoding='utf-8')


# ==================== TESTS: COMPARE ====================#
@pytest.mark.cli
class TestCompareCommand:
    """ldadam compare"""

    def test_table(self, write_config, tmp_path, capsys):
        first = write_config('ldadam')
        second = write_config('adam', optimizer={'kind': 'adam'})
        output = tmp_path / 'table.csv'
        code = main(['compare', '--config', str(first), str(second), '--seeds', '1', '2',
                     '--output', str(output), '--threads', '2'])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[2].startswith('ldadam') and lines[3].startswith('adam ')
        assert len(output.read_text(encoding='utf-8').splitlines()) == 3

    def test_mismatched_problems(self, write_config):
        first = write_config('a')
        second = write_config('b', problem={'kind': 'rosenbrock', 'd': 4})
        assert main(['compare', '--config', str(first), str(second)]) == EXIT_USAGE

    def test_divergent_run(self, write_config):
        path = write_config('boom', optimizer={'kind': 'adam'}, lr=1e300)
        assert main(['compare', '--config', str(path)]) == EXIT_DIVERGENCE


# ==================== TESTS: MEMORY ====================#
@pytest.mark.cli
class TestMemoryCommand:
    """ldadam memory"""

    def test_llama7b(self, capsys):
        assert main(['memory', '--model', 'llama2-7b', '--optimizer', 'ldadam', '--rank', '32']) == EXIT_OK
        out = capsys.readouterr().out
        assert '655,368,192 tokens' in out
        assert '1.22 GB' in out

    def test_adam_ignores_rank(self, capsys):
        assert main(['memory', '--model', 'llama2-7b', '--optimizer', 'adam']) == EXIT_OK
        assert '25.10 GB' in capsys.readouterr().out

    def test_rank_required(self):
        assert main(['memory', '--model', 'llama2-7b', '--optimizer', 'galore']) == EXIT_USAGE

    def test_unknown_model(self):
        assert main(['memory', '--model', 'nope', '--rank', '4']) == EXIT_USAGE

    def test_table_flags_non_reproducible(self, capsys):
        assert main(['memory', '--table']) == EXIT_OK
        out = capsys.readouterr().out
        assert 'roberta-base' in out
        assert '⚠️' in out

    def test_verbose_breakdown(self, capsys):
        assert main(['memory', '--model', 'roberta-base', '--rank', '8', '--verbose']) == EXIT_OK
        out = capsys.readouterr().out
        assert 'attention' in out
        assert 'publicado: 0.15 GB' in out

    def test_full_precision(self, capsys):
        assert main(['memory', '--model', 'llama2-7b', '--rank', '32', '--bytes', '4']) == EXIT_OK
        assert '2.44 GB' in capsys.readouterr().out


# ==================== TESTS: DUMP-DATA ====================#
@pytest.mark.cli
class TestDumpDataCommand:
    """ldadam dump-data"""

    def test_mlp_dataset(self, write_config, tmp_path):
        path = write_config('mlp', problem={'kind': 'mlp', 'widths': [3, 4, 2], 'n_samples': 10,
                                            'batch_size': 2, 'seed': 1})
        output = tmp_path / 'mlp_data.csv'
        assert main(['dump-data', '--config', str(path), '--output', str(output)]) == EXIT_OK
        lines = output.read_text(encoding='utf-8').splitlines()
        assert lines[0] == 'x0,x1,x2,y0,y1'
        assert len(lines) == 11

    def test_quadratic_coefficients(self, write_config, tmp_path):
        output = tmp_path / 'quad.csv'
        assert main(['dump-data', '--config', str(write_config()), '--output', str(output)]) == EXIT_OK
        lines = output.read_text(encoding='utf-8').splitlines()
        assert lines[0].endswith('h7,b,theta_star')
        assert len(lines) == 9

    def test_problem_without_dataset(self, write_config, tmp_path):
        path = write_config('rosen', problem={'kind': 'rosenbrock', 'd': 4})
        assert main(['dump-data', '--config', str(path), '--output', str(tmp_path / 'x.csv')]) == EXIT_USAGE


# ==================== TESTS: CHECK ====================#
@pytest.mark.cli
class TestCheckCommand:
    """ldadam check y la traducción de fallas a códigos de salida"""

    def test_all_passing(self, monkeypatch, capsys):
        monkeypatch.setattr('ldadam.commands.check.run_checks',
                            lambda full: [CheckResult('a', True, 'ok'), CheckResult('b', False, 'lejos', soft=True)])
        assert main(['check']) == EXIT_OK
        assert '2 chequeos' in capsys.readouterr().out

    def test_failure_exit_code(self, monkeypatch):
        monkeypatch.setattr('ldadam.commands.check.run_checks',
                            lambda full: [CheckResult('a', False, 'roto')])
        assert main(['check', '--full']) == EXIT_MONITOR

    @pytest.mark.slow
    def test_quick_suite(self):
        assert main(['check']) == EXIT_OK
