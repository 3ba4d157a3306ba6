"""
Minkowski kinematics
Four-vectors, Wigner-boost tetrads, the rest-frame embedding and tetrad derivatives
"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Union

import numpy as np

from algebra.element import GrassmannElement
from algebra.generators import GeneratorTable
from relativity.autodiff import Dual, seed, sqrt
from relativity.signature import get_signature, minkowski_metric

logger = logging.getLogger(__name__)

UNITS = ('length', 'momentum', 'dimensionless')


def _finite_array(values, size: int, label: str) -> np.ndarray:
    array = np.asarray(values, dtype=float).reshape(-1)
    if array.shape != (size,):
        raise ValueError(f"{label} needs {size} components, got {array.shape[0]}")
    if not np.all(np.isfinite(array)):
        raise ValueError(f"{label} has non-finite components: {array.tolist()}")
    return array


@dataclass(frozen=True, eq=False)
class FourVector:
    """Contravariant components (time, x, y, z) with a units tag"""
    components: np.ndarray
    units: str = 'dimensionless'
    sgn: int = field(default_factory=get_signature)

    def __post_init__(self):
        object.__setattr__(self, 'components', _finite_array(self.components, 4, 'FourVector'))
        if self.units not in UNITS:
            raise ValueError(f"Unknown units tag '{self.units}'")
        self.components.setflags(write=False)

    def lower(self) -> np.ndarray:
        return minkowski_metric(self.sgn) @ self.components

    def dot(self, other: 'FourVector') -> float:
        return float(self.components @ minkowski_metric(self.sgn) @ other.components)

    def __add__(self, other: 'FourVector') -> 'FourVector':
        if other.units != self.units:
            raise ValueError(f"Cannot add {self.units} and {other.units} four-vectors")
        return FourVector(self.components + other.components, self.units, self.sgn)

    def __sub__(self, other: 'FourVector') -> 'FourVector':
        if other.units != self.units:
            raise ValueError(f"Cannot subtract {other.units} from {self.units} four-vector")
        return FourVector(self.components - other.components, self.units, self.sgn)

    def to_dict(self):
        return {'components': self.components.tolist(), 'units': self.units, 'sgn': self.sgn}


@dataclass(frozen=True, eq=False)
class RapidityVector:
    """Dimensionless spatial part h of the unit time-like direction h^mu"""
    h: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'h', _finite_array(self.h, 3, 'RapidityVector'))
        self.h.setflags(write=False)

    @property
    def h0(self) -> float:
        return float(np.sqrt(1.0 + self.h @ self.h))

    def four_velocity(self) -> FourVector:
        return FourVector(np.concatenate([[self.h0], self.h]), 'dimensionless')


@dataclass(frozen=True, eq=False)
class Tetrad:
    """
    Wigner-boost frame.

    forward: matrix[mu, A] = eps^mu_A(h); inverse: matrix[A, mu] = eps^A_mu(h).
    """
    matrix: np.ndarray
    kind: str
    h: RapidityVector
    sgn: int = field(default_factory=get_signature)

    def __post_init__(self):
        if self.kind not in ('forward', 'inverse'):
            raise ValueError(f"Tetrad kind must be forward or inverse, got {self.kind}")
        self.matrix.setflags(write=False)

    def orthonormality_residual(self) -> float:
        """max |eps^mu_A eta_{mu nu} eps^nu_B - eta_AB| for a forward tetrad"""
        eta = minkowski_metric(self.sgn)
        frame = self.matrix if self.kind == 'forward' else np.linalg.inv(self.matrix)
        return float(np.abs(frame.T @ eta @ frame - eta).max())

    def time_column_residual(self) -> float:
        """max |eps^mu_tau - h^mu|"""
        frame = self.matrix if self.kind == 'forward' else np.linalg.inv(self.matrix)
        return float(np.abs(frame[:, 0] - self.h.four_velocity().components).max())


def _boost_entries(h: Sequence) -> List[List]:
    """
    Columns of the standard Wigner boost in terms of contravariant h:
    eps_tau = (h0; h), eps_r = (h^r; delta^i_r + h^i h^r / (1 + h0)).

    Entries may be floats or Duals.
    """
    h0 = sqrt(1.0 + h[0] * h[0] + h[1] * h[1] + h[2] * h[2])
    rows = [[h0] + [h[r] for r in range(3)]]
    for i in range(3):
        row = [h[i]]
        for r in range(3):
            row.append((1.0 if i == r else 0.0) + h[i] * h[r] / (1.0 + h0))
        rows.append(row)
    return rows


def _lower_frame(frame: List[List], sgn: int) -> List[List]:
    """eps^A_mu = eta^{AB} eps^nu_B eta_{nu mu}, exact for diagonal eta"""
    eta = np.diag(minkowski_metric(sgn))
    return [[eta[a] * frame[mu][a] * eta[mu] for mu in range(4)] for a in range(4)]


def wigner_tetrad(h: Union[RapidityVector, Sequence[float]]) -> Tetrad:
    """
    Forward tetrad eps^mu_A(h).

    Args:
        h: rapidity vector or its three components

    Returns:
        Forward Tetrad with eps^mu_tau = h^mu and determinant +1
    """
    if not isinstance(h, RapidityVector):
        h = RapidityVector(h)
    matrix = np.array(_boost_entries(list(h.h)), dtype=float)
    return Tetrad(matrix, 'forward', h)


def inverse_tetrad(tetrad: Tetrad) -> Tetrad:
    """Inverse tetrad eps^A_mu(h) from the metric relation, not a numerical inverse"""
    if tetrad.kind != 'forward':
        raise ValueError("inverse_tetrad expects a forward tetrad")
    eta = minkowski_metric(tetrad.sgn)
    return Tetrad(eta @ tetrad.matrix.T @ eta, 'inverse', tetrad.h, tetrad.sgn)


def embed_rest_frame(x0: FourVector, h: Union[RapidityVector, Sequence[float]], sigma: Sequence[float]) -> FourVector:
    """z^mu(tau, sigma) = x0^mu + eps^mu_A(h) sigma^A with sigma = (tau, sigma^r)"""
    if x0.units != 'length':
        raise ValueError(f"Embedding origin must carry length units, got {x0.units}")
    sigma = _finite_array(sigma, 4, 'sigma')
    tetrad = wigner_tetrad(h)
    return FourVector(x0.components + tetrad.matrix @ sigma, 'length', x0.sgn)


def tetrad_derivative(h: Union[RapidityVector, Sequence[float]], mc: float, sgn: int = None) -> np.ndarray:
    """
    Derivatives of the inverse tetrad with respect to the covariant momentum.

    Evaluated at P^mu = Mc h^mu with h^mu = P^mu / sqrt(sgn P^2), using
    forward-mode dual numbers.

    Args:
        h: rapidity vector
        mc: mass scale Mc > 0
        sgn: metric signature (session value when omitted)

    Returns:
        Array D[mu, B, rho] = d eps^B_rho / d P_mu
    """
    if mc <= 0:
        raise ValueError(f"Mc must be positive, got {mc}")
    if not isinstance(h, RapidityVector):
        h = RapidityVector(h)
    sgn = get_signature() if sgn is None else sgn
    eta = np.diag(minkowski_metric(sgn))

    p_upper_values = mc * h.four_velocity().components
    p_lower = seed(eta * p_upper_values)
    p_upper = [eta[mu] * p_lower[mu] for mu in range(4)]
    invariant = sgn * sum((p_lower[mu] * p_upper[mu] for mu in range(4)), Dual.constant(0.0, 4))
    norm = invariant.sqrt()
    h_dual = [p_upper[i + 1] / norm for i in range(3)]

    inverse = _lower_frame(_boost_entries(h_dual), sgn)
    derivative = np.zeros((4, 4, 4))
    for b in range(4):
        for rho in range(4):
            entry = inverse[b][rho]
            if isinstance(entry, Dual):
                derivative[:, b, rho] = entry.grad
    return derivative


def transverse_dipole_variables(table: GeneratorTable, h: Union[RapidityVector, Sequence[float]]) -> List[GrassmannElement]:
    """xi_perp^r = eps^r_mu(h) xi^mu for r = 1, 2, 3"""
    inverse = inverse_tetrad(wigner_tetrad(h)).matrix
    xis = GrassmannElement.generators(table, table.xi_names())
    result = []
    for r in range(1, 4):
        element = GrassmannElement.zero(table)
        for mu in range(4):
            element = element + xis[mu].scale(inverse[r, mu])
        result.append(element)
    return result


def center_of_mass_shift(h: Union[RapidityVector, Sequence[float]], mc: float,
                         xi_perp: Sequence[GrassmannElement], sgn: int = None) -> List[GrassmannElement]:
    """
    Grassmann bilinear correction to the canonical center of mass:

        (i/2) eps^A_nu eta_AB (d eps^B_rho / d P_mu) eps^rho_r eps^nu_s xi_perp^r xi_perp^s

    Returns:
        Four even GrassmannElements, one per mu
    """
    if len(xi_perp) != 3:
        raise ValueError(f"xi_perp needs 3 components, got {len(xi_perp)}")
    sgn = get_signature() if sgn is None else sgn
    forward = wigner_tetrad(h)
    inverse = inverse_tetrad(forward).matrix
    eta = minkowski_metric(sgn)
    derivative = tetrad_derivative(forward.h, mc, sgn)
    spatial = forward.matrix[:, 1:]

    coefficients = 0.5j * np.einsum('an,ab,mbp,pr,ns->mrs', inverse, eta, derivative, spatial, spatial)
    table = xi_perp[0].table
    shift = []
    for mu in range(4):
        element = GrassmannElement.zero(table)
        for r in range(3):
            for s in range(3):
                if coefficients[mu, r, s] != 0:
                    element = element + (xi_perp[r] * xi_perp[s]).scale(coefficients[mu, r, s])
        shift.append(element)
    return shift
