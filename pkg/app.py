"""
AtomFrame - Relativistic two-level atom toolkit
Command-line entry point for the verification suites and physics scenarios
"""

import logging
import os
import sys
from typing import Optional

import click
from dotenv import load_dotenv

from models import ConfigError, RunConfig
from relativity.signature import set_signature
from services.algebra_checks import AlgebraChecker
from services.scenario_runner import ScenarioRunner, dump_json, write_report

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_CONFIG_ERROR = 2


def configure_logging():
    """Logs go to stderr so stdout and artifacts stay deterministic"""
    logging.basicConfig(
        level=os.getenv('ATOMFRAME_LOG_LEVEL', 'INFO').upper(),
        stream=sys.stderr,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s'
    )


def load_run_config(command: str, config_path: Optional[str], out: Optional[str],
                    seed: Optional[int], tolerance_scale: Optional[float]) -> RunConfig:
    """File values first, then CLI flags; the sub-command fixes COMMAND"""
    cfg = RunConfig.from_file(config_path) if config_path else RunConfig()
    if cfg.command is not None and cfg.command != command:
        raise ConfigError('COMMAND', f"config is for '{cfg.command}', not '{command}'")
    cfg = cfg.with_overrides(command=command, output_dir=out, seed=seed, tolerance_scale=tolerance_scale)
    set_signature(cfg.params.signature)
    return cfg


def run_options(func):
    """--config, --out, --seed and --tolerance-scale, shared by every command"""
    func = click.option('--tolerance-scale', type=float, default=None, help='Multiply every tolerance')(func)
    func = click.option('--seed', type=click.IntRange(min=0), default=None, help='Seed for randomized checks')(func)
    func = click.option('--out', type=click.Path(file_okay=False), default=None, help='Output directory')(func)
    func = click.option('--config', 'config_path', type=click.Path(), default=None,
                        help='KEY=VALUE run configuration file')(func)
    return func


def _fail(message: str, code: int):
    click.echo(f"Error: {message}", err=True)
    sys.exit(code)


@click.group()
def cli():
    """Relativistic two-level atom: algebra checks and single-mode scenarios."""
    configure_logging()


@cli.command('check-algebra')
@run_options
def check_algebra(config_path, out, seed, tolerance_scale):
    """Run the Grassmann, tetrad, Poincare, spin and quantization suites."""
    try:
        cfg = load_run_config('check-algebra', config_path, out, seed, tolerance_scale)
    except ConfigError as e:
        _fail(str(e), EXIT_CONFIG_ERROR)

    checker = AlgebraChecker(tolerance_scale=cfg.tolerance_scale, sgn=cfg.params.signature)
    report = checker.run_all(seed=cfg.seed, n_points=cfg.n_points, inject_tetrad_fault=cfg.inject_tetrad_fault)
    try:
        path = write_report(cfg.output_dir, 'check-algebra', cfg, report)
    except OSError as e:
        _fail(f"cannot write report: {str(e)}", EXIT_CONFIG_ERROR)

    summary = {name: {'passed': suite['passed'], 'failing': suite['failing'], 'max_residual': suite['max_residual']}
               for name, suite in report['suites'].items()}
    click.echo(dump_json({'success': report['success'], 'report': path, 'suites': summary}), nl=False)
    sys.exit(EXIT_OK if report['success'] else EXIT_VERIFICATION_FAILED)


def _scenario(command: str, config_path, out, seed, tolerance_scale):
    try:
        cfg = load_run_config(command, config_path, out, seed, tolerance_scale)
    except ConfigError as e:
        _fail(str(e), EXIT_CONFIG_ERROR)

    result = ScenarioRunner(cfg).run(command)
    if not result['success']:
        code = EXIT_VERIFICATION_FAILED if result['error_type'] == 'runtime' else EXIT_CONFIG_ERROR
        _fail(result['error'], code)
    click.echo(dump_json({'success': True, 'verified': result['verified'], 'artifacts': result['artifacts']}),
               nl=False)
    sys.exit(EXIT_OK if result['verified'] else EXIT_VERIFICATION_FAILED)


@cli.command('spectrum')
@run_options
def spectrum(config_path, out, seed, tolerance_scale):
    """Eigenvalues of the configured Hamiltonian."""
    _scenario('spectrum', config_path, out, seed, tolerance_scale)


@cli.command('evolve')
@run_options
def evolve(config_path, out, seed, tolerance_scale):
    """Time evolution of the configured model and initial state."""
    _scenario('evolve', config_path, out, seed, tolerance_scale)


@cli.command('scan-revival')
@run_options
def scan_revival(config_path, out, seed, tolerance_scale):
    """Collapse and revival of the inversion in a coherent field."""
    _scenario('scan-revival', config_path, out, seed, tolerance_scale)


@cli.command('scan-rwa')
@run_options
def scan_rwa(config_path, out, seed, tolerance_scale):
    """Rabi versus Jaynes-Cummings distance per coupling ratio."""
    _scenario('scan-rwa', config_path, out, seed, tolerance_scale)


@cli.command('compare-relativistic')
@run_options
def compare_relativistic(config_path, out, seed, tolerance_scale):
    """Relativistic versus non-relativistic dynamics and spectra as c grows."""
    _scenario('compare-relativistic', config_path, out, seed, tolerance_scale)


if __name__ == '__main__':
    cli()
