"""
Pytest configuration and fixtures for AtomFrame tests
"""
import pytest
import numpy as np
from click.testing import CliRunner

from algebra.brackets import standard_bracket_spec
from algebra.generators import two_level_atom_table
from models import ModelParams
from relativity.signature import get_signature, set_signature


@pytest.fixture(autouse=True)
def restore_signature():
    """Every test starts and ends with the session signature it found."""
    original = get_signature()
    yield
    set_signature(original)


@pytest.fixture
def table():
    """The standard two-level atom generator table."""
    return two_level_atom_table()


@pytest.fixture
def spec(table):
    """Fundamental brackets at sgn = +1."""
    return standard_bracket_spec(table, 1)


@pytest.fixture
def params():
    """Small default parameters that keep the Fock space cheap."""
    return ModelParams(fock_cutoff=8)


@pytest.fixture
def rng():
    """Seeded generator for the property checks."""
    return np.random.default_rng(1234)


@pytest.fixture
def output_dir(tmp_path):
    """Fresh directory for run artifacts."""
    return str(tmp_path / 'out')


@pytest.fixture
def runner():
    """A test runner for the app's Click commands."""
    return CliRunner(mix_stderr=False)


@pytest.fixture
def write_config(tmp_path):
    """Write KEY=VALUE lines to a config file and return its path."""
    def _write(name='run.env', **values):
        path = tmp_path / name
        path.write_text(''.join(f"{key}={value}\n" for key, value in values.items()))
        return str(path)
    return _write
