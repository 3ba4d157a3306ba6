"""
Tests for service modules
"""
import os
import time
from unittest.mock import patch

import numpy as np
import pytest

from models import ModelParams, RunConfig
from relativity.signature import set_signature
from services.algebra_checks import AlgebraChecker
from services.batch_processor import BatchProcessor
from services.scenario_runner import ScenarioRunner, dump_json, write_report


def _square(x):
    if x < 0:
        raise ValueError(f"negative item {x}")
    return x * x


def test_batch_processor_initialization(monkeypatch):
    """Test the worker count comes from the environment when not given."""
    monkeypatch.setenv('ATOMFRAME_MAX_WORKERS', '3')
    assert BatchProcessor().max_workers == 3
    assert BatchProcessor(max_workers=2).max_workers == 2


def test_batch_results_keep_submission_order():
    """Test results line up with the items whatever order the threads finish in."""
    def slow_first(x):
        time.sleep(0.01 * (5 - x))
        return x

    result = BatchProcessor(max_workers=4).run_batch('ordered', slow_first, list(range(5)))
    assert result['success'] is True
    assert result['results'] == [0, 1, 2, 3, 4]
    assert result['errors'] == []


def test_batch_collects_errors():
    """Test a failing item is reported without stopping the others."""
    processor = BatchProcessor(max_workers=2)
    result = processor.run_batch('squares', _square, [1, -2, 3])
    assert result['success'] is False
    assert result['results'] == [1, None, 9]
    assert result['errors'] == [{'index': 1, 'error': 'negative item -2'}]

    status = processor.get_job_status(result['job_id'])
    assert status['status'] == 'failed'
    assert status['processed_items'] == 2
    assert status['failed_items'] == 1
    assert status['progress_percentage'] == 100.0


def test_batch_job_status_unknown():
    """Test looking up a job that never ran."""
    assert BatchProcessor().get_job_status(42) == {'error': 'Batch job not found'}


def test_batch_summary_and_cleanup():
    """Test the job summary and removal of finished jobs."""
    processor = BatchProcessor(max_workers=1)
    first = processor.run_batch('a', _square, [2])
    processor.run_batch('b', _square, [-1])
    summary = processor.get_active_jobs_summary()
    assert summary['total_jobs'] == 2
    assert summary['jobs_by_status'] == {'completed': 1, 'failed': 1}
    assert summary['jobs'][0]['job_id'] == first['job_id']

    processor.cleanup_completed_jobs(max_age_hours=1)
    assert processor.get_active_jobs_summary()['total_jobs'] == 2
    processor.cleanup_completed_jobs(max_age_hours=-1)
    assert processor.get_active_jobs_summary()['total_jobs'] == 0


def test_empty_batch():
    """Test an empty batch succeeds with no results."""
    result = BatchProcessor().run_batch('empty', _square, [])
    assert result['success'] is True
    assert result['results'] == []


@pytest.mark.integration
@pytest.mark.parametrize('sgn', [1, -1])
def test_algebra_checker_passes(sgn):
    """Test every suite passes under both signature conventions."""
    set_signature(sgn)
    report = AlgebraChecker(sgn=sgn).run_all(seed=3, n_points=5)
    assert report['success'] is True, {name: s['failing'] for name, s in report['suites'].items()}
    assert report['signature'] == sgn
    assert set(report['suites']) == {'grassmann', 'tetrad', 'poincare', 'spin', 'quantization'}
    assert all(record['passed'] for record in report['records'])


@pytest.mark.integration
def test_algebra_checker_reports_tetrad_fault():
    """Test a corrupted tetrad is reported by name and nothing else fails."""
    report = AlgebraChecker().run_all(seed=0, n_points=2, inject_tetrad_fault=True)
    assert report['success'] is False
    assert report['suites']['tetrad']['failing'] == ['tetrad orthonormality']
    assert all(suite['passed'] for name, suite in report['suites'].items() if name != 'tetrad')


def test_algebra_checker_is_deterministic():
    """Test the same seed gives the same records."""
    checker = AlgebraChecker()
    rng_records = [checker.run_all(seed=7, n_points=2)['records'] for _ in range(2)]
    assert dump_json({'r': rng_records[0]}) == dump_json({'r': rng_records[1]})


def test_quantization_suite_tolerance_scale():
    """Test tolerances scale with the tolerance factor."""
    checker = AlgebraChecker(tolerance_scale=10.0)
    records = checker.quantization_suite()
    assert all(record['tolerance'] == pytest.approx(1e-13) for record in records)
    assert all(record['passed'] for record in records)


def _config(output_dir, **changes):
    params = changes.pop('params', ModelParams(fock_cutoff=8, coupling_form='scalar-aligned'))
    return RunConfig(params=params, output_dir=output_dir, n_times=51, **changes)


def test_write_report(output_dir):
    """Test the report carries the schema version and omits the output directory."""
    path = write_report(output_dir, 'check-algebra', _config(output_dir), {'success': True})
    with open(path) as handle:
        text = handle.read()
    assert '"schema_version": 1' in text
    assert 'output_dir' not in text
    assert text.endswith('}\n')


def test_scenario_runner_spectrum_artifacts(output_dir):
    """Test the spectrum scenario writes its CSV, report and matrix export."""
    result = ScenarioRunner(_config(output_dir, export_matrix=True)).run('spectrum')
    assert result['success'] is True
    assert result['verified'] is True
    assert set(result['artifacts']) == {'csv', 'json', 'binary', 'header', 'text'}
    for path in result['artifacts'].values():
        assert os.path.isfile(path)
    with open(result['artifacts']['csv']) as handle:
        assert handle.readline().strip() == 'index,energy'
    assert result['report']['cutoff_convergence']['converged']


def test_scenario_runner_is_deterministic(tmp_path):
    """Test two runs of the same configuration write identical bytes."""
    contents = []
    for name in ('first', 'second'):
        result = ScenarioRunner(_config(str(tmp_path / name))).run('evolve')
        assert result['success'] is True
        contents.append([open(result['artifacts'][kind], 'rb').read() for kind in ('csv', 'json')])
    assert contents[0] == contents[1]


def test_scenario_runner_evolve_report(output_dir):
    """Test the evolution report holds the final values and rest-frame diagnostics."""
    result = ScenarioRunner(_config(output_dir)).run('evolve')
    report = result['report']
    assert report['trajectory']['n_times'] == 51
    assert report['final_values']['excitation_number'] == pytest.approx(1.0)
    assert report['rest_frame']['internal_momentum'][1] == 0.0
    assert report['cutoff_convergence']['converged']


def test_scenario_runner_cutoff_error(output_dir):
    """Test a coherent amplitude too large for the cutoff is a cutoff error."""
    result = ScenarioRunner(_config(output_dir, coherent_amplitude=3 + 0j)).run('evolve')
    assert result['success'] is False
    assert result['error_type'] == 'cutoff'
    assert result['required_cutoff'] == 27
    assert not os.path.exists(os.path.join(output_dir, 'evolve.csv'))


def test_scenario_runner_positivity_error(output_dir):
    """Test a non-positive square-root argument is a configuration error."""
    params = ModelParams(fock_cutoff=4, level_splitting=0.6)
    result = ScenarioRunner(_config(output_dir, params=params, model='relativistic-rabi')).run('spectrum')
    assert result['success'] is False
    assert result['error_type'] == 'config'


def test_scenario_runner_unknown_scenario(output_dir):
    """Test an unknown scenario name is rejected."""
    result = ScenarioRunner(_config(output_dir)).run('check-algebra')
    assert result == {'success': False, 'error': "Unknown scenario 'check-algebra'", 'error_type': 'config'}


def test_scenario_runner_compare_relativistic(output_dir):
    """Test the comparison converges and writes one row per speed of light."""
    config = _config(output_dir, c_values=(10.0, 100.0, 1000.0), rabi_periods=2.0)
    result = ScenarioRunner(config).run('compare-relativistic')
    assert result['success'] is True
    assert result['verified'] is True
    with open(result['artifacts']['csv']) as handle:
        lines = handle.read().splitlines()
    assert lines[0].startswith('speed_of_light,')
    assert len(lines) == 4


def test_algebra_checker_releases_batch_jobs():
    """Test a finished verification run leaves no tracked batch jobs behind."""
    checker = AlgebraChecker()
    checker.run_all(seed=0, n_points=2)
    assert checker.batch_processor.get_active_jobs_summary()['total_jobs'] == 0


def test_tetrad_records_carry_absolute_residual():
    """Test the tetrad records report the unscaled residual next to the h0^2-scaled one."""
    records = AlgebraChecker().tetrad_suite(np.random.default_rng(0), samples=20)
    scaled = [record for record in records if record.get('residual_scale') == 'h0^2']
    assert [record['relation'] for record in scaled] == ['tetrad orthonormality', 'tetrad time column equals h']
    for record in scaled:
        assert record['absolute_residual'] >= record['residual']
        assert record['passed']


@pytest.mark.slow
def test_scenario_runner_revival_verified(output_dir):
    """Test the collapse-revival scan at nbar = 9 finds the revival within 10%."""
    params = ModelParams(coupling_form='scalar-aligned', dipole_coupling=1.0, fock_cutoff=40)
    result = ScenarioRunner(_config(output_dir, params=params, coherent_amplitude=3 + 0j)).run('scan-revival')
    assert result['success'] is True
    assert result['verified'] is True
    report = result['report']
    assert abs(report['revival_time'] - report['expected_revival_time']) <= 0.1 * report['expected_revival_time']


def test_scenario_runner_revival_not_reached(output_dir):
    """Test a window too short to see the revival is not verified."""
    params = ModelParams(coupling_form='scalar-aligned', dipole_coupling=1.0, fock_cutoff=40)
    config = _config(output_dir, params=params, coherent_amplitude=3 + 0j, t_max=2.0)
    result = ScenarioRunner(config).run('scan-revival')
    assert result['success'] is True
    assert result['verified'] is False


def test_scenario_runner_rwa_weak_coupling_bound(output_dir):
    """Test scan-rwa fails when the weakest coupling already breaks the rotating-wave bound."""
    records = [{'ratio': 0.001, 'coupling': 0.001, 't_max': 1.0, 'max_trace_distance': 0.05},
               {'ratio': 0.3, 'coupling': 0.3, 't_max': 1.0, 'max_trace_distance': 0.2}]
    config = _config(output_dir, coupling_ratios=(0.001, 0.3))
    with patch('services.scenario_runner.rwa_validity', return_value={'records': records, 'monotone': True}):
        result = ScenarioRunner(config).run('scan-rwa')
    assert result['success'] is True
    assert result['verified'] is False


def test_scenario_runner_rwa_verified(output_dir):
    """Test a weak-coupling rotating-wave scan passes."""
    config = _config(output_dir, coupling_ratios=(0.001, 0.01), rabi_periods=1.0)
    result = ScenarioRunner(config).run('scan-rwa')
    assert result['success'] is True
    assert result['verified'] is True
    assert result['report']['records'][0]['max_trace_distance'] <= 1e-2
