"""
Parameter and run-configuration models for AtomFrame
Flat KEY=VALUE configuration parsed with python-dotenv into typed dataclasses
"""

import logging
import os
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np
from dotenv import dotenv_values

logger = logging.getLogger(__name__)

__version__ = '1.0.0'
SCHEMA_VERSION = 1

__all__ = ['ConfigError', 'ModelParams', 'RunConfig', 'SCHEMA_VERSION', '__version__']

COUPLING_FORMS = ('full-dipole-tensor', 'scalar-aligned')
MODELS = ('rabi', 'jaynes-cummings', 'relativistic-rabi', 'relativistic-jaynes-cummings')
INITIAL_STATES = ('excited', 'ground', 'superposition')
COMMANDS = ('check-algebra', 'spectrum', 'evolve', 'scan-revival', 'scan-rwa', 'compare-relativistic')


class ConfigError(ValueError):
    """Raised for unknown keys, unparsable values or violated parameter invariants"""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def _vector(key: str, raw: str) -> Tuple[float, float, float]:
    parts = [part.strip() for part in str(raw).split(',')]
    try:
        values = tuple(float(part) for part in parts)
    except ValueError:
        raise ConfigError(key, f"expected three comma-separated numbers, got '{raw}'")
    if len(values) != 3 or not np.all(np.isfinite(values)):
        raise ConfigError(key, f"expected three finite numbers, got '{raw}'")
    return values


def _number(key: str, raw: str, cast=float):
    try:
        value = cast(str(raw).strip())
    except ValueError:
        raise ConfigError(key, f"cannot parse '{raw}' as {cast.__name__}")
    if cast is float and not np.isfinite(value):
        raise ConfigError(key, f"value must be finite, got '{raw}'")
    return value


def _number_list(key: str, raw: str) -> Tuple[float, ...]:
    values = tuple(_number(key, part) for part in str(raw).split(',') if part.strip())
    if not values:
        raise ConfigError(key, "expected at least one value")
    return values


def _flag(key: str, raw: str) -> bool:
    text = str(raw).strip().lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off'):
        return False
    raise ConfigError(key, f"expected true or false, got '{raw}'")


def _choice(key: str, raw: str, choices) -> str:
    text = str(raw).strip().lower()
    if text not in choices:
        raise ConfigError(key, f"expected one of {', '.join(choices)}, got '{raw}'")
    return text


def _sign(key: str, raw: str) -> int:
    value = _number(key, raw, int)
    if value not in (1, -1):
        raise ConfigError(key, f"expected +1 or -1, got '{raw}'")
    return value


@dataclass(frozen=True)
class ModelParams:
    """
    Physical parameters of the two-level atom in a single-mode field.

    Internal units: every quantity is expressed in the units fixed by
    mass, speed_of_light and hbar (1, 1, 1 by default). level_splitting
    carries momentum units, level_frequency is an angular frequency.
    """
    mass: float = 1.0
    speed_of_light: float = 1.0
    hbar: float = 1.0
    level_splitting: float = 0.1
    level_frequency: float = 1.0
    mode_frequency: float = 1.0
    dipole_coupling: float = 0.05
    atom_momentum: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    field_amplitude: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    mode_direction: Tuple[float, float, float] = (1.0, 0.0, 0.0)
    fock_cutoff: int = 30
    coupling_form: str = 'full-dipole-tensor'
    dipole_sign: int = 1
    signature: int = 1

    KEYS = {
        'MASS': 'mass',
        'SPEED_OF_LIGHT': 'speed_of_light',
        'HBAR': 'hbar',
        'LEVEL_SPLITTING': 'level_splitting',
        'LEVEL_FREQUENCY': 'level_frequency',
        'MODE_FREQUENCY': 'mode_frequency',
        'DIPOLE_COUPLING': 'dipole_coupling',
        'ATOM_MOMENTUM': 'atom_momentum',
        'FIELD_AMPLITUDE': 'field_amplitude',
        'MODE_DIRECTION': 'mode_direction',
        'FOCK_CUTOFF': 'fock_cutoff',
        'COUPLING_FORM': 'coupling_form',
        'DIPOLE_SIGN': 'dipole_sign',
        'SIGNATURE': 'signature',
    }

    def __post_init__(self):
        for key, name in (('MASS', 'mass'), ('SPEED_OF_LIGHT', 'speed_of_light'),
                          ('HBAR', 'hbar'), ('MODE_FREQUENCY', 'mode_frequency')):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ConfigError(key, f"must be positive, got {value}")
        if int(self.fock_cutoff) < 1:
            raise ConfigError('FOCK_CUTOFF', f"must be at least 1, got {self.fock_cutoff}")
        if self.coupling_form not in COUPLING_FORMS:
            raise ConfigError('COUPLING_FORM', f"unknown coupling form '{self.coupling_form}'")
        if self.dipole_sign not in (1, -1):
            raise ConfigError('DIPOLE_SIGN', f"expected +1 or -1, got {self.dipole_sign}")
        if self.signature not in (1, -1):
            raise ConfigError('SIGNATURE', f"expected +1 or -1, got {self.signature}")
        for name in ('atom_momentum', 'field_amplitude', 'mode_direction'):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        object.__setattr__(self, 'fock_cutoff', int(self.fock_cutoff))

    @property
    def mc(self) -> float:
        return self.mass * self.speed_of_light

    @property
    def kappa_squared(self) -> float:
        return float(np.dot(self.atom_momentum, self.atom_momentum))

    @property
    def field_norm(self) -> float:
        return float(np.linalg.norm(self.field_amplitude))

    @property
    def coupling(self) -> float:
        """g = c hbar d |E|"""
        return self.speed_of_light * self.hbar * self.dipole_coupling * self.field_norm

    def with_updates(self, **changes) -> 'ModelParams':
        return replace(self, **changes)

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> 'ModelParams':
        kwargs = {}
        for key, raw in values.items():
            if key not in cls.KEYS or raw is None:
                continue
            name = cls.KEYS[key]
            if name in ('atom_momentum', 'field_amplitude', 'mode_direction'):
                kwargs[name] = _vector(key, raw)
            elif name == 'fock_cutoff':
                kwargs[name] = _number(key, raw, int)
            elif name == 'coupling_form':
                kwargs[name] = _choice(key, raw, COUPLING_FORMS)
            elif name in ('dipole_sign', 'signature'):
                kwargs[name] = _sign(key, raw)
            else:
                kwargs[name] = _number(key, raw)
        return cls(**kwargs)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'mass': self.mass,
            'speed_of_light': self.speed_of_light,
            'hbar': self.hbar,
            'level_splitting': self.level_splitting,
            'level_frequency': self.level_frequency,
            'mode_frequency': self.mode_frequency,
            'dipole_coupling': self.dipole_coupling,
            'atom_momentum': list(self.atom_momentum),
            'field_amplitude': list(self.field_amplitude),
            'mode_direction': list(self.mode_direction),
            'fock_cutoff': self.fock_cutoff,
            'coupling_form': self.coupling_form,
            'dipole_sign': self.dipole_sign,
            'signature': self.signature,
        }


RUN_KEYS = {
    'COMMAND': 'command',
    'MODEL': 'model',
    'INITIAL_STATE': 'initial_state',
    'COHERENT_AMPLITUDE': 'coherent_amplitude',
    'T_MAX': 't_max',
    'N_TIMES': 'n_times',
    'RABI_PERIODS': 'rabi_periods',
    'COUPLING_RATIOS': 'coupling_ratios',
    'C_VALUES': 'c_values',
    'N_POINTS': 'n_points',
    'SEED': 'seed',
    'TOLERANCE_SCALE': 'tolerance_scale',
    'OUTPUT_DIR': 'output_dir',
    'EXPORT_MATRIX': 'export_matrix',
    'INJECT_TETRAD_FAULT': 'inject_tetrad_fault',
}


@dataclass(frozen=True)
class RunConfig:
    """One CLI run: command word, model parameters and run options"""
    command: Optional[str] = None
    params: ModelParams = field(default_factory=ModelParams)
    model: str = 'jaynes-cummings'
    initial_state: str = 'excited'
    coherent_amplitude: complex = 0j
    t_max: Optional[float] = None
    n_times: int = 401
    rabi_periods: float = 5.0
    coupling_ratios: Tuple[float, ...] = (0.001, 0.01, 0.1, 0.3)
    c_values: Tuple[float, ...] = (10.0, 100.0, 1000.0, 10000.0)
    n_points: int = 100
    seed: int = 0
    tolerance_scale: float = 1.0
    output_dir: str = field(default_factory=lambda: os.getenv('ATOMFRAME_OUTPUT_DIR', 'output'))
    export_matrix: bool = False
    inject_tetrad_fault: bool = False

    def __post_init__(self):
        if self.command is not None and self.command not in COMMANDS:
            raise ConfigError('COMMAND', f"unknown command '{self.command}'")
        if self.model not in MODELS:
            raise ConfigError('MODEL', f"unknown model '{self.model}'")
        if self.initial_state not in INITIAL_STATES:
            raise ConfigError('INITIAL_STATE', f"unknown initial state '{self.initial_state}'")
        if not self.tolerance_scale > 0:
            raise ConfigError('TOLERANCE_SCALE', f"must be positive, got {self.tolerance_scale}")
        if self.t_max is not None and not self.t_max > 0:
            raise ConfigError('T_MAX', f"must be positive, got {self.t_max}")
        if self.n_times < 2:
            raise ConfigError('N_TIMES', f"must be at least 2, got {self.n_times}")
        if not self.rabi_periods > 0:
            raise ConfigError('RABI_PERIODS', f"must be positive, got {self.rabi_periods}")
        if self.n_points < 1:
            raise ConfigError('N_POINTS', f"must be at least 1, got {self.n_points}")
        if self.seed < 0:
            raise ConfigError('SEED', f"must be non-negative, got {self.seed}")
        if any(ratio < 0 for ratio in self.coupling_ratios):
            raise ConfigError('COUPLING_RATIOS', "ratios must be non-negative")
        if any(c <= 0 for c in self.c_values):
            raise ConfigError('C_VALUES', "speeds of light must be positive")

    @property
    def relativistic(self) -> bool:
        return self.model.startswith('relativistic')

    @property
    def rotating_wave(self) -> bool:
        return self.model.endswith('jaynes-cummings')

    def with_overrides(self, **changes) -> 'RunConfig':
        return replace(self, **{key: value for key, value in changes.items() if value is not None})

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> 'RunConfig':
        """
        Build a run configuration from flat upper-case keys

        Args:
            values: KEY -> raw string value

        Returns:
            RunConfig with parsed ModelParams

        Raises:
            ConfigError: naming the first offending key
        """
        known = set(RUN_KEYS) | set(ModelParams.KEYS)
        for key in values:
            if key not in known:
                raise ConfigError(key, "unknown configuration key")

        kwargs: Dict[str, Any] = {'params': ModelParams.from_mapping(values)}
        for key, raw in values.items():
            if key not in RUN_KEYS or raw is None:
                continue
            name = RUN_KEYS[key]
            if name in ('command', 'model', 'initial_state'):
                kwargs[name] = str(raw).strip().lower()
            elif name == 'coherent_amplitude':
                kwargs[name] = _number(key, str(raw).replace(' ', ''), complex)
            elif name in ('n_times', 'n_points', 'seed'):
                kwargs[name] = _number(key, raw, int)
            elif name in ('coupling_ratios', 'c_values'):
                kwargs[name] = _number_list(key, raw)
            elif name in ('export_matrix', 'inject_tetrad_fault'):
                kwargs[name] = _flag(key, raw)
            elif name == 'output_dir':
                kwargs[name] = str(raw).strip()
            else:
                kwargs[name] = _number(key, raw)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str) -> 'RunConfig':
        if not os.path.isfile(path):
            raise ConfigError('--config', f"configuration file not found: {path}")
        values = dotenv_values(path)
        logger.debug(f"Loaded {len(values)} configuration keys from {path}")
        return cls.from_mapping(values)

    def to_dict(self) -> Dict[str, Any]:
        data = {f.name: getattr(self, f.name) for f in fields(self) if f.name != 'params'}
        data['coherent_amplitude'] = [self.coherent_amplitude.real, self.coherent_amplitude.imag]
        data['coupling_ratios'] = list(self.coupling_ratios)
        data['c_values'] = list(self.c_values)
        data['params'] = self.params.to_dict()
        return data

