"""
External Poincare realization
Generators on Jacobi data (z, h), rest spin S and mass scale Mc, with a bracket-closure checker
and the spin tensor built from the transverse Grassmann dipole
"""

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from algebra.brackets import DiracReduction
from algebra.element import GrassmannElement
from relativity.autodiff import seed, sqrt, grad_of, value_of
from relativity.signature import get_signature, minkowski_metric

logger = logging.getLogger(__name__)

GENERATOR_LABELS = ('P0', 'P1', 'P2', 'P3', 'J01', 'J02', 'J03', 'J12', 'J13', 'J23')

# sgn-independent form of the metric inside the closure relations;
# brackets of the realization do not depend on the sign convention
_ETA_HAT = np.diag([1.0, -1.0, -1.0, -1.0])

LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_i, _j, _k] = 1.0
    LEVI_CIVITA[_i, _k, _j] = -1.0


def _j_label(mu: int, nu: int) -> Tuple[int, str]:
    """Sign and canonical label of J^{mu nu}"""
    if mu == nu:
        return 0, ''
    if mu < nu:
        return 1, f'J{mu}{nu}'
    return -1, f'J{nu}{mu}'


def _add(combination: Dict[str, float], label: str, coefficient: float):
    if coefficient == 0 or not label:
        return
    combination[label] = combination.get(label, 0.0) + coefficient
    if combination[label] == 0:
        del combination[label]


def _expected_bracket(a: str, b: str) -> Dict[str, float]:
    """Right-hand side of {a, b} as a linear combination of generators"""
    if a[0] == 'P' and b[0] == 'P':
        return {}
    if a[0] == 'P':
        return {label: -c for label, c in _expected_bracket(b, a).items()}

    mu, nu = int(a[1]), int(a[2])
    combination: Dict[str, float] = {}
    if b[0] == 'P':
        rho = int(b[1])
        _add(combination, f'P{mu}', _ETA_HAT[nu, rho])
        _add(combination, f'P{nu}', -_ETA_HAT[mu, rho])
        return combination

    rho, sigma = int(b[1]), int(b[2])
    for coefficient, (x, y) in ((_ETA_HAT[nu, rho], (mu, sigma)),
                                (-_ETA_HAT[mu, rho], (nu, sigma)),
                                (-_ETA_HAT[nu, sigma], (mu, rho)),
                                (_ETA_HAT[mu, sigma], (nu, rho))):
        sign, label = _j_label(x, y)
        _add(combination, label, coefficient * sign)
    return combination


# frozen at import; the symbolic oracle in the test suite regenerates it independently
STRUCTURE_TABLE: Dict[Tuple[str, str], Dict[str, float]] = {
    (a, b): _expected_bracket(a, b) for a, b in combinations(GENERATOR_LABELS, 2)
}


@dataclass(frozen=True, eq=False)
class PhaseSpacePoint:
    """Jacobi data with {z^i, h^j} = delta^ij, rest spin S and external mass scale Mc"""
    z: np.ndarray
    h: np.ndarray
    S: np.ndarray
    mc: float

    def __post_init__(self):
        for name in ('z', 'h', 'S'):
            array = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if array.shape != (3,) or not np.all(np.isfinite(array)):
                raise ValueError(f"PhaseSpacePoint.{name} must be 3 finite numbers")
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        if not np.isfinite(self.mc) or self.mc <= 0:
            raise ValueError(f"Mc must be positive and finite, got {self.mc}")
        object.__setattr__(self, 'mc', float(self.mc))

    def as_vector(self) -> np.ndarray:
        """(z, h, S) flattened; the ordering used by the bracket"""
        return np.concatenate([self.z, self.h, self.S])

    def scaled(self, factor: float) -> 'PhaseSpacePoint':
        return PhaseSpacePoint(self.z, self.h, self.S, self.mc * factor)

    def to_dict(self):
        return {'z': self.z.tolist(), 'h': self.h.tolist(), 'S': self.S.tolist(), 'mc': self.mc}


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    """P^mu and the antisymmetric J^{mu nu} at one point"""
    P: np.ndarray
    J: np.ndarray

    def value(self, label: str) -> float:
        if label[0] == 'P':
            return float(self.P[int(label[1])])
        return float(self.J[int(label[1]), int(label[2])])

    def to_dict(self):
        return {label: self.value(label) for label in GENERATOR_LABELS}


def _generator_values(z: Sequence, h: Sequence, S: Sequence, mc: float) -> Dict[str, Any]:
    """
    P^mu = Mc h^mu
    J^{oi} = -h^0 z^i - eps^{ijr} h^j S^r / (1 + h^0)
    J^{ij} = z^i h^j - z^j h^i + eps^{ijr} S^r
    """
    h0 = sqrt(1.0 + h[0] * h[0] + h[1] * h[1] + h[2] * h[2])
    values = {'P0': h0 * mc}
    for i in range(3):
        values[f'P{i + 1}'] = h[i] * mc

    for i in range(3):
        boost_spin = 0.0
        for j in range(3):
            for r in range(3):
                if LEVI_CIVITA[i, j, r]:
                    boost_spin = boost_spin + LEVI_CIVITA[i, j, r] * h[j] * S[r]
        values[f'J0{i + 1}'] = -h0 * z[i] - boost_spin / (1.0 + h0)

    for i, j in ((0, 1), (0, 2), (1, 2)):
        spin = 0.0
        for r in range(3):
            if LEVI_CIVITA[i, j, r]:
                spin = spin + LEVI_CIVITA[i, j, r] * S[r]
        values[f'J{i + 1}{j + 1}'] = z[i] * h[j] - z[j] * h[i] + spin
    return values


def external_generators(point: PhaseSpacePoint) -> GeneratorSet:
    """Evaluate the ten generators; J is antisymmetric by construction"""
    values = _generator_values(point.z, point.h, point.S, point.mc)
    P = np.array([values[f'P{mu}'] for mu in range(4)], dtype=float)
    J = np.zeros((4, 4))
    for mu, nu in combinations(range(4), 2):
        J[mu, nu] = values[f'J{mu}{nu}']
        J[nu, mu] = -J[mu, nu]
    return GeneratorSet(P, J)


def generator_gradients(point: PhaseSpacePoint) -> Dict[str, Tuple[float, np.ndarray]]:
    """Value and gradient in (z, h, S) of every generator, by dual numbers"""
    variables = seed(point.as_vector())
    values = _generator_values(variables[0:3], variables[3:6], variables[6:9], point.mc)
    return {label: (value_of(values[label]), grad_of(values[label], 9)) for label in GENERATOR_LABELS}


def _bracket_from_gradients(grad_f: np.ndarray, grad_g: np.ndarray, spin: np.ndarray) -> float:
    canonical = grad_f[0:3] @ grad_g[3:6] - grad_f[3:6] @ grad_g[0:3]
    spin_part = np.einsum('rsu,u,r,s->', LEVI_CIVITA, spin, grad_f[6:9], grad_g[6:9])
    return float(canonical + spin_part)


def poisson_bracket(f: str, g: str, point: PhaseSpacePoint) -> float:
    """
    {f, g} = sum_i (df/dz^i dg/dh^i - df/dh^i dg/dz^i) + eps^{rsu} S^u df/dS^r dg/dS^s

    Args:
        f: generator label, e.g. 'J12'
        g: generator label
        point: phase-space point

    Returns:
        The bracket value
    """
    gradients = generator_gradients(point)
    for label in (f, g):
        if label not in gradients:
            raise ValueError(f"Unknown generator label '{label}'")
    return _bracket_from_gradients(gradients[f][1], gradients[g][1], point.S)


def check_poincare_algebra(point: PhaseSpacePoint, tol: float = 1e-10) -> Dict[str, Any]:
    """
    Evaluate every commutation relation of the ten generators at a point.

    Returns:
        Report with the point, per-relation residuals, the maximum residual
        and the list of relations whose residual exceeds tol
    """
    gradients = generator_gradients(point)
    records = []
    failing = []
    max_residual = 0.0
    for (a, b), combination in STRUCTURE_TABLE.items():
        bracket = _bracket_from_gradients(gradients[a][1], gradients[b][1], point.S)
        expected = sum(c * gradients[label][0] for label, c in combination.items())
        residual = abs(bracket - expected)
        relation = f'{{{a},{b}}}'
        records.append({'relation': relation, 'residual': residual})
        max_residual = max(max_residual, residual)
        if residual > tol:
            failing.append(relation)

    if failing:
        logger.warning(f"Poincare closure failed for {len(failing)} relations at {point.to_dict()}")
    return {
        'point': point.to_dict(),
        'max_residual': max_residual,
        'tolerance': tol,
        'failing': failing,
        'records': records
    }


def random_phase_space_point(rng: np.random.Generator, spin: bool = True, scale: float = 2.0) -> PhaseSpacePoint:
    """Point with components uniform in [-scale, scale] and Mc in [0.5, 5]"""
    z = rng.uniform(-scale, scale, 3)
    h = rng.uniform(-scale, scale, 3)
    S = rng.uniform(-scale, scale, 3) if spin else np.zeros(3)
    return PhaseSpacePoint(z, h, S, float(rng.uniform(0.5, 5.0)))


def spin_from_grassmann(xi_perp: Sequence[GrassmannElement]) -> List[GrassmannElement]:
    """S^r = -(i/2) eps^{ruv} xi_perp^u xi_perp^v"""
    if len(xi_perp) != 3:
        raise ValueError(f"xi_perp needs 3 components, got {len(xi_perp)}")
    spin = []
    for r in range(3):
        element = GrassmannElement.zero(xi_perp[0].table)
        for u in range(3):
            for v in range(3):
                if LEVI_CIVITA[r, u, v]:
                    element = element + (xi_perp[u] * xi_perp[v]).scale(-0.5j * LEVI_CIVITA[r, u, v])
        spin.append(element)
    return spin


def boost_spin_from_grassmann(spin: Sequence[GrassmannElement], momentum: Sequence[float],
                              sgn: int = None) -> List[GrassmannElement]:
    """S^{oi} = -eps^{ijr} P^j S^r / (P^0 + sqrt(sgn P^2)) at a numeric time-like P"""
    sgn = get_signature() if sgn is None else sgn
    P = np.asarray(momentum, dtype=float)
    invariant = sgn * float(P @ minkowski_metric(sgn) @ P)
    if invariant <= 0 or P[0] <= 0:
        raise ValueError(f"Momentum must be future time-like, got {P.tolist()}")
    denominator = P[0] + np.sqrt(invariant)
    boost = []
    for i in range(3):
        element = GrassmannElement.zero(spin[0].table)
        for j in range(3):
            for r in range(3):
                if LEVI_CIVITA[i, j, r] and P[j + 1]:
                    element = element + spin[r].scale(-LEVI_CIVITA[i, j, r] * P[j + 1] / denominator)
        boost.append(element)
    return boost


def spin_structure_sign(sgn: int = None) -> int:
    """
    Structure constant sign of {S^r, S^s}* = sign * eps^{rsu} S^u for the
    Grassmann spin. Fixed by {xi_perp^r, xi_perp^s}* = -i eta^{rs}, which is
    +i delta^{rs} for sgn = +1, together with the graded bracket.
    """
    sgn = get_signature() if sgn is None else sgn
    return -sgn


def spin_algebra_residuals(spin: Sequence[GrassmannElement], reduction: DiracReduction,
                           sign: int = None) -> List[Dict[str, Any]]:
    """Residual of {S^r, S^s}* - sign eps^{rsu} S^u for every ordered pair r != s"""
    sign = spin_structure_sign(reduction.spec.sgn) if sign is None else sign
    records = []
    for r in range(3):
        for s in range(3):
            if r == s:
                continue
            bracket = reduction.bracket(spin[r], spin[s])
            expected = GrassmannElement.zero(spin[0].table)
            for u in range(3):
                if LEVI_CIVITA[r, s, u]:
                    expected = expected + spin[u].scale(sign * LEVI_CIVITA[r, s, u])
            records.append({
                'relation': f'{{S{r + 1},S{s + 1}}}*',
                'residual': (bracket - expected).max_abs()
            })
    return records
