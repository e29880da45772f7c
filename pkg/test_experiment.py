"""
Tests de la capa de experimentos: configuración YAML, corridas, comparación y batería de chequeos
"""
import csv
import json
from pathlib import Path

import numpy as np
import pytest

from ldadam.checks import (
    CheckResult,
    check_error_feedback_identity,
    check_fixed_row_split,
    check_galore_fixed_equivalence,
    check_gradient_oracles,
    check_memory_parity,
    check_power_iteration,
    check_scalar_layer_adam,
    run_checks,
)
from ldadam.errors import ConfigurationError
from ldadam.experiment import (
    CSV_HEADER,
    build_problem,
    compare,
    dump_data,
    load_experiment_config,
    parse_experiment_config,
    run_experiment,
)
from ldadam.optim import resolve_side

CONFIG_DIR = Path(__file__).parent / 'configs'


# ==================== FIXTURES ====================#
@pytest.fixture
def quadratic_data():
    return {
        'name': 'quad',
        'seed': 1,
        'problem': {'kind': 'quadratic', 'd': 8, 'condition_number': 10.0, 'noise_sigma': 0.5, 'seed': 1},
        'optimizer': {'kind': 'ldadam', 'rank': 2, 'mode': 'analytical'},
        'steps': 40,
        'lr': 0.05,
    }


@pytest.fixture
def logistic_data():
    return {
        'name': 'logistic',
        'seed': 2,
        'problem': {'kind': 'logistic', 'n_samples': 20, 'n_features': 3, 'batch_size': 4, 'seed': 5},
        'optimizer': {'kind': 'adam'},
        'steps': 10,
        'lr': 0.01,
    }


def read_rows(path: Path) -> list[list[str]]:
    with path.open(newline='', encoding='utf-8') as handle:
        return list(csv.reader(handle))


# ==================== TESTS: CONFIGURACIÓN ====================#
@pytest.mark.unit
class TestExperimentConfig:
    """Validación del YAML de experimento"""

    def test_valid(self, quadratic_data):
        config = parse_experiment_config(quadratic_data)
        assert config.problem.kind == 'quadratic'
        assert config.optimizer.rank == 2
        assert config.resolved_record_every == 1

    def test_long_runs_thin_records(self, quadratic_data):
        config = parse_experiment_config({**quadratic_data, 'steps': 20_000})
        assert config.resolved_record_every == 10

    def test_unknown_key(self, quadratic_data):
        with pytest.raises(ConfigurationError):
            parse_experiment_config({**quadratic_data, 'momentum': 0.9})

    def test_missing_learning_rate(self, quadratic_data):
        data = dict(quadratic_data)
        del data['lr']
        with pytest.raises(ConfigurationError):
            parse_experiment_config(data)

    def test_schedule_shorter_than_run(self, quadratic_data):
        data = dict(quadratic_data)
        del data['lr']
        data['optimizer'] = {'kind': 'ldadam', 'rank': 2,
                             'lr_schedule': {'base_lr': 0.1, 'total_steps': 10}}
        with pytest.raises(ConfigurationError):
            parse_experiment_config(data)

    def test_monitors_require_ldadam(self, logistic_data):
        with pytest.raises(ConfigurationError):
            parse_experiment_config({**logistic_data, 'monitors': ['lemma1']})

    def test_unknown_problem_kind(self, quadratic_data):
        with pytest.raises(ConfigurationError):
            parse_experiment_config({**quadratic_data, 'problem': {'kind': 'sphere', 'd': 3}})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_experiment_config(tmp_path / 'missing.yaml')

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / 'broken.yaml'
        path.write_text("name: [sin cerrar\n", encoding='utf-8')
        with pytest.raises(ConfigurationError):
            load_experiment_config(path)

    def test_mlp_configs_project_both_sides(self):
        """Las capas del MLP incluyen n < m (izquierda) y n > m (derecha)"""
        paths = sorted(CONFIG_DIR.glob('mlp_*.yaml'))
        assert paths
        for path in paths:
            shapes = build_problem(load_experiment_config(path).problem).param_shapes
            assert {resolve_side(shape, 'auto') for shape in shapes} == {'left', 'right'}, path.name

    @pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob('*.yaml')), ids=lambda p: p.stem)
    def test_shipped_configs_parse(self, path):
        config = load_experiment_config(path)
        assert build_problem(config.problem).param_shapes


# ==================== TESTS: CORRIDAS ====================#
@pytest.mark.integration
class TestRunExperiment:
    """run_experiment y sus archivos de salida"""

    def test_trajectory_csv(self, quadratic_data, tmp_path):
        output = tmp_path / 'quad.csv'
        result = run_experiment(parse_experiment_config(quadratic_data), output)
        rows = read_rows(output)
        assert rows[0] == CSV_HEADER
        assert len(rows) == 41
        assert [int(row[0]) for row in rows[1:]] == list(range(1, 41))
        summary = json.loads((tmp_path / 'quad.summary.json').read_text(encoding='utf-8'))
        assert summary['diverged'] is False
        assert summary['steps_completed'] == 40
        assert summary['final_loss'] == pytest.approx(result.train.final_loss)

    def test_deterministic(self, quadratic_data, tmp_path):
        config = parse_experiment_config({**quadratic_data, 'micro_batches': 3})
        run_experiment(config, tmp_path / 'a.csv')
        run_experiment(config, tmp_path / 'b.csv')
        assert (tmp_path / 'a.csv').read_bytes() == (tmp_path / 'b.csv').read_bytes()

    def test_record_every(self, quadratic_data, tmp_path):
        config = parse_experiment_config({**quadratic_data, 'steps': 20, 'record_every': 7})
        run_experiment(config, tmp_path / 'thin.csv')
        steps = [int(row[0]) for row in read_rows(tmp_path / 'thin.csv')[1:]]
        assert steps == [1, 7, 14, 20]

    def test_monitors_and_capture(self, quadratic_data, tmp_path):
        config = parse_experiment_config({**quadratic_data, 'monitors': ['lemma1', 'lemma4', 'gamma_delta'],
                                          'capture': True})
        result = run_experiment(config, tmp_path / 'mon.csv')
        assert [r.name for r in result.reports] == ['lemma1', 'lemma4', 'gamma_delta']
        assert result.monitors_passed
        monitor_rows = read_rows(tmp_path / 'mon.monitors.csv')
        assert monitor_rows[0][:2] == ['experiment', 'monitor']
        capture_rows = read_rows(tmp_path / 'mon.capture.csv')
        assert float(capture_rows[1][1]) == pytest.approx(2 / 8)
        assert result.summary['capture']['rank_over_dim'] == pytest.approx(0.25)

    def test_divergence_keeps_partial_csv(self, quadratic_data, tmp_path):
        config = parse_experiment_config({**quadratic_data, 'optimizer': {'kind': 'adam'}, 'lr': 1e300})
        result = run_experiment(config, tmp_path / 'div.csv')
        assert result.diverged
        assert result.summary['final_loss'] is None
        rows = read_rows(tmp_path / 'div.csv')
        assert 1 <= len(rows) - 1 < 40

    def test_metrics_file(self, quadratic_data, tmp_path):
        metrics = tmp_path / 'metrics.prom'
        run_experiment(parse_experiment_config(quadratic_data), None, metrics)
        text = metrics.read_text(encoding='utf-8')
        assert 'ldadam_steps_total{experiment="quad"} 40.0' in text
        assert 'ldadam_final_loss{experiment="quad"}' in text
        assert 'ldadam_step_duration_seconds_bucket' in text

    def test_no_output_writes_nothing(self, quadratic_data, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        result = run_experiment(parse_experiment_config(quadratic_data))
        assert result.csv_path is None
        assert list(tmp_path.iterdir()) == []


# ==================== TESTS: COMPARACIÓN ====================#
@pytest.mark.integration
class TestCompare:
    """compare sobre varias configuraciones y semillas"""

    def test_rows_follow_input_order(self, quadratic_data, tmp_path):
        ldadam = parse_experiment_config(quadratic_data)
        adam = parse_experiment_config({**quadratic_data, 'name': 'adam', 'optimizer': {'kind': 'adam'}})
        table = compare([ldadam, adam], seeds=[1, 2, 3])
        assert [row.experiment for row in table.rows] == ['quad', 'adam']
        assert all(len(row.final_losses) == 3 and row.diverged == 0 for row in table.rows)
        assert table.rows[0].q25 <= table.rows[0].median <= table.rows[0].q75

        output = tmp_path / 'cmp.csv'
        table.write_csv(output)
        assert len(read_rows(output)) == 3
        assert len(read_rows(tmp_path / 'cmp.runs.csv')) == 7
        assert 'median' in table.to_text().splitlines()[0]

    def test_threads_do_not_change_results(self, quadratic_data):
        config = parse_experiment_config(quadratic_data)
        serial = compare([config], seeds=[1, 2, 3, 4])
        parallel = compare([config], seeds=[1, 2, 3, 4], threads=3)
        assert serial.rows[0].final_losses == parallel.rows[0].final_losses

    def test_duplicate_names_are_disambiguated(self, quadratic_data):
        config = parse_experiment_config(quadratic_data)
        table = compare([config, config], seeds=[1])
        assert [row.experiment for row in table.rows] == ['quad#1', 'quad#2']

    def test_mismatched_problems(self, quadratic_data, logistic_data):
        with pytest.raises(ConfigurationError):
            compare([parse_experiment_config(quadratic_data), parse_experiment_config(logistic_data)], seeds=[1])

    def test_requires_seeds(self, quadratic_data):
        with pytest.raises(ConfigurationError):
            compare([parse_experiment_config(quadratic_data)], seeds=[])


# ==================== TESTS: DATOS SINTÉTICOS ====================#
@pytest.mark.unit
class TestDumpData:
    """dump_data"""

    def test_logistic_dataset(self, logistic_data, tmp_path):
        output = tmp_path / 'data.csv'
        assert dump_data(parse_experiment_config(logistic_data), output) == 20
        rows = read_rows(output)
        assert rows[0] == ['x0', 'x1', 'x2', 'y0']
        assert len(rows) == 21

    def test_quadratic_coefficients(self, quadratic_data, tmp_path):
        """Una fila por coordenada: fila de H, b = Hθ* y θ*"""
        config = parse_experiment_config(quadratic_data)
        output = tmp_path / 'quad_data.csv'
        assert dump_data(config, output) == 8
        rows = read_rows(output)
        assert rows[0] == [f"h{j}" for j in range(8)] + ['b', 'theta_star']
        values = np.array([[float(v) for v in row] for row in rows[1:]])
        problem = build_problem(config.problem)
        np.testing.assert_array_equal(values[:, :8], problem.H)
        np.testing.assert_array_equal(values[:, 9], problem.theta_star)
        np.testing.assert_allclose(values[:, 8], problem.H @ problem.theta_star, rtol=1e-15)

    def test_problem_without_dataset(self, quadratic_data, tmp_path):
        config = parse_experiment_config({**quadratic_data, 'problem': {'kind': 'rosenbrock', 'd': 4}})
        with pytest.raises(ConfigurationError):
            dump_data(config, tmp_path / 'none.csv')


# ==================== TESTS: BATERÍA DE CHEQUEOS ====================#
class TestChecks:
    """Chequeos individuales de la batería rápida"""

    @pytest.mark.unit
    def test_result_line(self):
        assert CheckResult('x', True, 'ok').line().startswith('✅ x')
        soft = CheckResult('y', False, 'lejos', soft=True)
        assert not soft.failed and soft.line().startswith('⚠️')

    @pytest.mark.unit
    def test_memory_parity(self):
        result = check_memory_parity(False)
        assert result.passed
        assert 'llama-350m/ldadam (la transcripción de la arquitectura da 0.61 GB)' in result.detail
        assert 'roberta-base/adam' in result.detail

    @pytest.mark.unit
    def test_power_iteration(self):
        assert check_power_iteration(False).passed

    @pytest.mark.integration
    @pytest.mark.parametrize("check", [
        check_gradient_oracles,
        check_scalar_layer_adam,
        check_fixed_row_split,
        check_galore_fixed_equivalence,
        check_error_feedback_identity,
    ], ids=lambda c: c.__name__)
    def test_equivalences(self, check):
        result = check(False)
        assert result.passed, result.detail

    @pytest.mark.slow
    def test_quick_suite(self):
        results = run_checks(full=False)
        assert not [r.name for r in results if r.failed]
