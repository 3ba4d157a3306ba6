"""
Hamiltonian builders for the two-level atom in a single-mode field
Relativistic and non-relativistic Rabi models, their rotating-wave (Jaynes-Cummings) forms,
and the pseudo-classical invariant mass
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from algebra.element import GrassmannElement
from algebra.generators import GeneratorTable
from models import ModelParams
from quantum.operators import Layout, OperatorMatrix, SIGMA_Z, single_leg, tensor_lift
from quantum.quantize import (DIPOLE_LEG, LEVEL_LEG, dipole_operator, fock_leg, fock_operators,
                              physical_projector_and_c)
from relativity.kinematics import transverse_dipole_variables
from relativity.poincare import spin_from_grassmann

logger = logging.getLogger(__name__)

HERMITICITY_TOL = 1e-13
REST_ENERGY_MODES = (None, 'mass', 'mass-shell')
LINK_CONVENTIONS = ('expansion', 'mass')

# (mass, speed of light, hbar) exponents of the internal unit of each dimension
UNIT_EXPONENTS = {
    'mass': (1, 0, 0),
    'velocity': (0, 1, 0),
    'action': (0, 0, 1),
    'momentum': (1, 1, 0),
    'energy': (1, 2, 0),
    'length': (-1, -1, 1),
    'time': (-1, -2, 1),
    'frequency': (1, 2, -1),
}


class PositivityError(ValueError):
    """Raised when m^2c^2 + 2mc Omega sigma3 + kappa^2 is not positive on a branch"""

    def __init__(self, branch: int, value: float):
        super().__init__(f"Square-root argument is {value:.6g} on the sigma3 = {branch:+d} branch")
        self.branch = branch
        self.value = value


def strictly_decreasing(values: Sequence[float], floor: float = 0.0) -> bool:
    """Each value below the previous one; runs at or below floor count as converged"""
    return all(later < earlier or max(earlier, later) <= floor for earlier, later in zip(values, values[1:]))


def unit_scale(dimension: str, mass: float, speed_of_light: float, hbar: float) -> float:
    if dimension not in UNIT_EXPONENTS:
        raise ValueError(f"Unknown dimension '{dimension}'")
    a, b, c = UNIT_EXPONENTS[dimension]
    return mass ** a * speed_of_light ** b * hbar ** c


def to_internal_units(value: float, dimension: str, mass: float, speed_of_light: float, hbar: float) -> float:
    """Express a dimensional value as a multiple of the (m, c, hbar) unit"""
    return value / unit_scale(dimension, mass, speed_of_light, hbar)


def from_internal_units(value: float, dimension: str, mass: float, speed_of_light: float, hbar: float) -> float:
    return value * unit_scale(dimension, mass, speed_of_light, hbar)


@dataclass(frozen=True, eq=False)
class HamiltonianBundle:
    """A built Hamiltonian with its observables and a snapshot of the parameters"""
    H: OperatorMatrix
    kind: str
    params: ModelParams
    observables: Dict[str, OperatorMatrix]

    @property
    def layout(self) -> Layout:
        return self.H.layout

    def spectrum(self) -> np.ndarray:
        return self.H.eigvalsh()

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind,
            'dimension': self.H.dim,
            'layout': self.layout.to_dict(),
            'hermiticity_defect': self.H.hermiticity_defect(),
            'observables': sorted(self.observables),
            'params': self.params.to_dict()
        }


def model_layout(p: ModelParams) -> Layout:
    """[level, dipole, fock] for the full dipole tensor, [level, fock] when scalar-aligned"""
    if p.coupling_form == 'full-dipole-tensor':
        return Layout.of(LEVEL_LEG, DIPOLE_LEG, fock_leg(p.fock_cutoff))
    return Layout.of(LEVEL_LEG, fock_leg(p.fock_cutoff))


def _branch_arguments(p: ModelParams) -> Dict[int, float]:
    mc = p.mc
    arguments = {}
    for branch in (1, -1):
        value = mc ** 2 + 2 * mc * p.level_splitting * branch + p.kappa_squared
        if not value > 0:
            raise PositivityError(branch, value)
        arguments[branch] = value
    return arguments


def relativistic_level_energies(p: ModelParams, rest_energy: Optional[str] = None) -> Dict[int, float]:
    """
    c sqrt(m^2c^2 + x) per sigma3 branch, x = 2mc Omega sigma3 + kappa^2,
    optionally minus mc^2 ('mass') or c sqrt(m^2c^2 + kappa^2) ('mass-shell').

    The subtraction is done analytically as c (x - x0) / (sqrt(m^2c^2 + x) + sqrt(m^2c^2 + x0))
    so large c does not cancel digits.
    """
    if rest_energy not in REST_ENERGY_MODES:
        raise ValueError(f"Unknown rest-energy mode '{rest_energy}'")
    c = p.speed_of_light
    mc2 = p.mc ** 2
    energies = {}
    for branch, argument in _branch_arguments(p).items():
        x = 2 * p.mc * p.level_splitting * branch + p.kappa_squared
        if rest_energy is None:
            energies[branch] = c * np.sqrt(argument)
            continue
        x0 = 0.0 if rest_energy == 'mass' else p.kappa_squared
        energies[branch] = c * (x - x0) / (np.sqrt(argument) + np.sqrt(mc2 + x0))
    return energies


def nonrelativistic_level_energies(p: ModelParams) -> Dict[int, float]:
    """kappa^2/2m + sigma3 hbar Omega-tilde / 2"""
    kinetic = p.kappa_squared / (2 * p.mass)
    return {branch: kinetic + branch * 0.5 * p.hbar * p.level_frequency for branch in (1, -1)}


class _Legs:
    """Single-leg building blocks lifted into one model layout"""

    def __init__(self, p: ModelParams):
        self.p = p
        self.layout = model_layout(p)
        self.full_dipole = p.coupling_form == 'full-dipole-tensor'
        space = physical_projector_and_c(p.hbar)
        self.c = space.c
        self.c_dag = space.c_dag
        self.a, self.a_dag, self.n = fock_operators(p.fock_cutoff)

    def lift(self, op: OperatorMatrix) -> OperatorMatrix:
        return tensor_lift(op, self.layout)

    def level_diagonal(self, energies: Dict[int, float]) -> OperatorMatrix:
        return self.lift(single_leg(np.diag([energies[1], energies[-1]]), LEVEL_LEG[0]))

    def sigma3(self) -> OperatorMatrix:
        return self.lift(single_leg(SIGMA_Z, LEVEL_LEG[0]))

    def field_energy(self) -> OperatorMatrix:
        p = self.p
        return self.lift(self.n + OperatorMatrix.identity(self.n.layout) * 0.5) * (p.hbar * p.mode_frequency)

    def dipole_projection(self) -> Tuple[Optional[OperatorMatrix], float]:
        """(d-hat . E on the dipole leg, 1) or (None, s hbar d |E|) in scalar mode"""
        p = self.p
        if not self.full_dipole:
            return None, p.dipole_sign * p.hbar * p.dipole_coupling * p.field_norm
        components = dipole_operator(p.dipole_coupling, p.hbar)
        projection = OperatorMatrix.zeros(components[0].layout)
        for component, amplitude in zip(components, p.field_amplitude):
            projection = projection + component * amplitude
        return projection, 1.0

    def interaction(self, rotating_wave: bool, prefactor: float) -> OperatorMatrix:
        p = self.p
        if rotating_wave:
            level_field = (self.lift(self.c_dag) @ self.lift(self.a)) + (self.lift(self.c) @ self.lift(self.a_dag))
        else:
            level_field = self.lift(self.c_dag + self.c) @ self.lift(self.a + self.a_dag)
        projection, scalar = self.dipole_projection()
        term = level_field * (p.speed_of_light * prefactor * scalar)
        if projection is not None:
            term = self.lift(projection) @ term
        return term

    def observables(self, H: OperatorMatrix) -> Dict[str, OperatorMatrix]:
        p = self.p
        excited = self.lift(self.c_dag @ self.c)
        number = self.lift(self.n)
        flip = np.diag((-1.0) ** np.arange(p.fock_cutoff + 1))
        parity = self.sigma3() @ self.lift(single_leg(flip, 'fock'))
        observables = {
            'sigma3': self.sigma3(),
            'photon_number': number,
            'excited_population': excited,
            'excitation_number': excited + number,
            'parity': parity,
            'energy': H,
        }
        if self.full_dipole:
            for r, component in enumerate(dipole_operator(p.dipole_coupling, p.hbar)):
                observables[f'dipole_{r + 1}'] = self.lift(component)
        return observables


def _bundle(legs: _Legs, H: OperatorMatrix, kind: str) -> HamiltonianBundle:
    defect = H.hermiticity_defect()
    if defect > HERMITICITY_TOL:
        raise ValueError(f"{kind} Hamiltonian is not Hermitian (relative defect {defect:.3e})")
    logger.debug(f"Built {kind} Hamiltonian of dimension {H.dim}")
    return HamiltonianBundle(H, kind, legs.p, legs.observables(H))


def _relativistic(p: ModelParams, rotating_wave: bool, rest_energy: Optional[str]) -> HamiltonianBundle:
    legs = _Legs(p)
    mc = p.mc
    prefactor = mc / np.sqrt(mc ** 2 + p.kappa_squared)
    H = (legs.level_diagonal(relativistic_level_energies(p, rest_energy))
         + legs.field_energy()
         + legs.interaction(rotating_wave, prefactor))
    kind = 'relativistic-jaynes-cummings' if rotating_wave else 'relativistic-rabi'
    return _bundle(legs, H, kind)


def _nonrelativistic(p: ModelParams, rotating_wave: bool) -> HamiltonianBundle:
    legs = _Legs(p)
    H = (legs.level_diagonal(nonrelativistic_level_energies(p))
         + legs.field_energy()
         + legs.interaction(rotating_wave, 1.0))
    return _bundle(legs, H, 'jaynes-cummings' if rotating_wave else 'rabi')


def build_relativistic_rabi(p: ModelParams, rest_energy: Optional[str] = None) -> HamiltonianBundle:
    """
    H = c sqrt(m^2c^2 + 2mc Omega sigma3 + kappa^2) + hbar omega (n + 1/2)
        + c (mc / sqrt(m^2c^2 + kappa^2)) (d.E)(c-dagger + c)(a + a-dagger)

    The square root is diagonal per sigma3 branch since kappa is a c-number.

    Args:
        p: model parameters
        rest_energy: None, 'mass' (subtract mc^2) or 'mass-shell'
            (subtract c sqrt(m^2c^2 + kappa^2))

    Raises:
        PositivityError: if a branch argument is not positive
    """
    return _relativistic(p, False, rest_energy)


def build_nonrel_rabi(p: ModelParams) -> HamiltonianBundle:
    """H = kappa^2/2m + (hbar/2) Omega-tilde sigma3 + hbar omega (n + 1/2) + c (d.E)(sigma+ + sigma-)(a + a-dagger)"""
    return _nonrelativistic(p, False)


def build_jaynes_cummings(p: ModelParams, relativistic: bool = False,
                          rest_energy: Optional[str] = None) -> HamiltonianBundle:
    """Rabi Hamiltonian with the interaction replaced by c (d.E)(sigma+ a + sigma- a-dagger)"""
    if relativistic:
        return _relativistic(p, True, rest_energy)
    return _nonrelativistic(p, True)


def build_model(p: ModelParams, model: str, rest_energy: Optional[str] = None) -> HamiltonianBundle:
    """Dispatch on the model name used in run configurations"""
    if model == 'rabi':
        return build_nonrel_rabi(p)
    if model == 'jaynes-cummings':
        return build_jaynes_cummings(p)
    if model == 'relativistic-rabi':
        return build_relativistic_rabi(p, rest_energy)
    if model == 'relativistic-jaynes-cummings':
        return build_jaynes_cummings(p, relativistic=True, rest_energy=rest_energy)
    raise ValueError(f"Unknown model '{model}'")


def link_splitting(p: ModelParams, convention: str = 'expansion') -> ModelParams:
    """
    Set Omega from Omega-tilde.

    'expansion': Omega = hbar Omega-tilde / (2c), which makes the expanded
    relativistic splitting equal hbar Omega-tilde.
    'mass': Omega = m Omega-tilde.
    """
    if convention == 'expansion':
        omega = p.hbar * p.level_frequency / (2 * p.speed_of_light)
    elif convention == 'mass':
        omega = p.mass * p.level_frequency
    else:
        raise ValueError(f"Unknown link convention '{convention}', expected one of {LINK_CONVENTIONS}")
    return p.with_updates(level_splitting=omega)


def at_speed_of_light(p: ModelParams, c: float, convention: str = 'expansion') -> ModelParams:
    """
    Move to another c holding Omega-tilde and g = c hbar d |E| fixed,
    then relink Omega.
    """
    g = p.coupling
    scaled = p.with_updates(speed_of_light=c)
    if p.field_norm > 0:
        scaled = scaled.with_updates(dipole_coupling=g / (c * p.hbar * p.field_norm))
    return link_splitting(scaled, convention)


def nonrelativistic_limit_scan(p: ModelParams, c_values: Sequence[float], convention: str = 'expansion',
                               levels: int = 5, rotating_wave: bool = False) -> Dict[str, Any]:
    """
    Compare the mc^2-subtracted relativistic spectrum with the non-relativistic
    one at each speed of light.

    Args:
        p: base parameters
        c_values: increasing speeds of light
        convention: link between Omega and Omega-tilde
        levels: number of lowest eigenvalues compared
        rotating_wave: compare Jaynes-Cummings forms instead of Rabi forms

    Returns:
        Dict with per-c records, monotonicity flag and fitted order in 1/c
    """
    records = []
    for c in c_values:
        pc = at_speed_of_light(p, c, convention)
        relativistic = build_jaynes_cummings(pc, True, 'mass') if rotating_wave else build_relativistic_rabi(pc, 'mass')
        reference = build_jaynes_cummings(pc) if rotating_wave else build_nonrel_rabi(pc)
        rel_levels = relativistic.spectrum()[:levels]
        ref_levels = reference.spectrum()[:levels]
        deviation = float(np.max(np.abs(rel_levels - ref_levels)))
        scale = float(np.max(np.abs(ref_levels)))
        records.append({
            'speed_of_light': float(c),
            'level_splitting': pc.level_splitting,
            'max_deviation': deviation,
            'relative_deviation': deviation / scale if scale > 0 else deviation,
            'relativistic_levels': rel_levels.tolist(),
            'nonrelativistic_levels': ref_levels.tolist()
        })
        logger.debug(f"c = {c}: spectral deviation {deviation:.3e}")

    deviations = [r['relative_deviation'] for r in records]
    monotone = strictly_decreasing(deviations)
    order = None
    positive = [(r['speed_of_light'], r['relative_deviation']) for r in records if r['relative_deviation'] > 0]
    if len(positive) >= 2:
        logs = np.log(np.array(positive))
        order = float(-np.polyfit(logs[:, 0], logs[:, 1], 1)[0])
    if not monotone:
        logger.warning(f"Non-relativistic limit is not monotone under the '{convention}' link")
    return {'convention': convention, 'records': records, 'monotone': monotone, 'order': order}


@dataclass(frozen=True)
class SingleModeField:
    """Classical single mode: complex amplitude a, polarization amplitude E, frequency omega"""
    amplitude: complex
    field_amplitude: Tuple[float, float, float]
    omega: float
    hbar: float = 1.0

    @property
    def energy(self) -> float:
        return self.hbar * self.omega * abs(self.amplitude) ** 2

    def field_value(self) -> np.ndarray:
        return np.asarray(self.field_amplitude, dtype=float) * 2.0 * complex(self.amplitude).real

    def to_dict(self):
        return {
            'amplitude': [complex(self.amplitude).real, complex(self.amplitude).imag],
            'field_amplitude': list(self.field_amplitude),
            'omega': self.omega,
            'energy': self.energy
        }


def grassmann_dipole(xi_perp: Sequence[GrassmannElement], d: float) -> List[GrassmannElement]:
    """d = -i d xi_perp x xi_perp, i.e. 2 d S"""
    return [component.scale(2.0 * d) for component in spin_from_grassmann(xi_perp)]


def classical_invariant_mass(p: ModelParams, table: GeneratorTable, field: SingleModeField,
                             h: Sequence[float] = (0.0, 0.0, 0.0)) -> GrassmannElement:
    """
    Mc = sqrt(m^2c^2 + 2mc Omega beta* beta + kappa^2) + E_field / c
         + (mc / sqrt(m^2c^2 + kappa^2)) (beta* alpha + alpha* beta) d . E_field-value

    The square root is the exact Grassmann series; it truncates because
    beta* beta is nilpotent.

    Args:
        p: model parameters
        table: generator table holding xi and the level variables
        field: classical single-mode field
        h: direction defining the transverse dipole variables

    Returns:
        Even GrassmannElement in momentum units
    """
    mc = p.mc
    rest = mc ** 2 + p.kappa_squared
    occupation = GrassmannElement.monomial(table, ['beta*', 'beta'])
    radicand = GrassmannElement.scalar(table, rest) + occupation.scale(2 * mc * p.level_splitting)
    mass = radicand.sqrt()

    hop = GrassmannElement.monomial(table, ['beta*', 'alpha']) + GrassmannElement.monomial(table, ['alpha*', 'beta'])
    dipole = grassmann_dipole(transverse_dipole_variables(table, h), p.dipole_coupling)
    value = field.field_value()
    coupling = GrassmannElement.zero(table)
    for component, amplitude in zip(dipole, value):
        coupling = coupling + component.scale(amplitude)

    interaction = (hop * coupling).scale(mc / np.sqrt(rest))
    return mass + interaction + GrassmannElement.scalar(table, field.energy / p.speed_of_light)
