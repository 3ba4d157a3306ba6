"""
Quantization of the pseudo-classical variables
Fermi oscillators for the levels, the physical two-level subspace, the Pauli dipole and the photon mode
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import qutip as qt

from quantum.operators import (Layout, OperatorMatrix, PAULI, single_leg, tensor_lift)

logger = logging.getLogger(__name__)

# every two-dimensional level leg uses index 0 = Psi(+), index 1 = Psi(-)
LEVEL_SPACE = Layout.of(('alpha', 2), ('beta', 2))
LEVEL_LEG = ('level', 2)
DIPOLE_LEG = ('dipole', 2)

# flat indices of the physical states in the alpha x beta space
PHI_PLUS_INDEX = 2   # Psi_alpha(-) x Psi_beta(+)
PHI_MINUS_INDEX = 1  # Psi_alpha(+) x Psi_beta(-)


def fock_leg(cutoff: int) -> Tuple[str, int]:
    return ('fock', cutoff + 1)


def _check_hbar(hbar: float):
    if not hbar > 0:
        raise ValueError(f"hbar must be positive, got {hbar}")


def fermi_oscillators(hbar: float) -> Dict[str, OperatorMatrix]:
    """
    Level oscillators on the 4-dimensional alpha x beta space.

    a-hat empties Psi_alpha(-) into Psi_alpha(+); b-hat empties Psi_beta(+)
    into Psi_beta(-). Both carry sqrt(hbar), so [a, a-dagger]_+ = hbar, and
    they act on different legs, so they commute.

    Returns:
        Dict with keys 'a', 'a_dag', 'b', 'b_dag'
    """
    _check_hbar(hbar)
    root = np.sqrt(hbar)
    a_leg = single_leg(root * np.array([[0, 1], [0, 0]]), 'alpha')
    b_leg = single_leg(root * np.array([[0, 0], [1, 0]]), 'beta')
    a = tensor_lift(a_leg, LEVEL_SPACE)
    b = tensor_lift(b_leg, LEVEL_SPACE)
    return {'a': a, 'a_dag': a.dagger(), 'b': b, 'b_dag': b.dagger()}


def level_number_and_constraint(hbar: float) -> Tuple[OperatorMatrix, OperatorMatrix, OperatorMatrix]:
    """N_a = a-dag a, N_b = b-dag b and the level constraint C = N_b - N_a"""
    ops = fermi_oscillators(hbar)
    number_a = ops['a_dag'] @ ops['a']
    number_b = ops['b_dag'] @ ops['b']
    return number_a, number_b, number_b - number_a


@dataclass(frozen=True, eq=False)
class PhysicalSpace:
    """
    The two-dimensional kernel of the level constraint with basis
    {Phi(+), Phi(-)} and the lowering operator acting inside it
    """
    projector: np.ndarray
    c: OperatorMatrix
    c_dag: OperatorMatrix
    hbar: float

    def project(self, op: OperatorMatrix) -> OperatorMatrix:
        """Pi op Pi-dagger as an operator on the level leg"""
        if op.layout != LEVEL_SPACE:
            raise ValueError(f"Projection expects the alpha x beta layout, got {op.layout.legs}")
        return OperatorMatrix(self.projector @ op.matrix @ self.projector.conj().T, Layout.of(LEVEL_LEG))

    def embed(self, amplitudes) -> np.ndarray:
        """Physical-space amplitudes as a vector of the 4-dimensional level space"""
        return self.projector.conj().T @ np.asarray(amplitudes, dtype=complex)

    def basis(self) -> Dict[str, np.ndarray]:
        return {'Phi(+)': self.embed([1, 0]), 'Phi(-)': self.embed([0, 1])}


def physical_projector_and_c(hbar: float) -> PhysicalSpace:
    """
    Isometry onto ker(C) and c = Pi (b a) Pi-dagger / hbar.

    b a lowers both occupations and so preserves C; it maps Phi(+) to
    hbar Phi(-) and annihilates Phi(-). b-dagger a raises C by 2 hbar and has
    no component inside the kernel (see literal_hop_projection).
    """
    ops = fermi_oscillators(hbar)
    projector = np.zeros((2, 4), dtype=complex)
    projector[0, PHI_PLUS_INDEX] = 1.0
    projector[1, PHI_MINUS_INDEX] = 1.0
    projector.setflags(write=False)

    space = PhysicalSpace(projector, None, None, hbar)
    c = space.project(ops['b'] @ ops['a']) * (1.0 / hbar)
    return PhysicalSpace(projector, c, c.dagger(), hbar)


def literal_hop_projection(hbar: float) -> OperatorMatrix:
    """Pi (b-dagger a) Pi-dagger / hbar, which vanishes identically"""
    ops = fermi_oscillators(hbar)
    return physical_projector_and_c(hbar).project(ops['b_dag'] @ ops['a']) * (1.0 / hbar)


def dipole_operator(d: float, hbar: float) -> List[OperatorMatrix]:
    """
    d^r = -i d (hbar/2) eps^{ruv} sigma^u sigma^v on the dipole leg,
    which equals hbar d sigma^r
    """
    _check_hbar(hbar)
    components = []
    for r in range(3):
        matrix = np.zeros((2, 2), dtype=complex)
        for u, v, sign in ((r + 1, r + 2, 1.0), (r + 2, r + 1, -1.0)):
            matrix += sign * PAULI[u % 3] @ PAULI[v % 3]
        components.append(single_leg(-1j * d * 0.5 * hbar * matrix, DIPOLE_LEG[0]))
    return components


def transverse_dipole_image(hbar: float) -> List[OperatorMatrix]:
    """xi_perp^r -> sqrt(hbar/2) sigma^r"""
    _check_hbar(hbar)
    return [single_leg(np.sqrt(hbar / 2.0) * sigma, DIPOLE_LEG[0]) for sigma in PAULI]


def fock_operators(cutoff: int) -> Tuple[OperatorMatrix, OperatorMatrix, OperatorMatrix]:
    """Truncated ladder operators a, a-dagger and n for photon numbers 0..N"""
    if cutoff < 1:
        raise ValueError(f"Fock cutoff must be at least 1, got {cutoff}")
    annihilate = single_leg(qt.destroy(cutoff + 1).full(), 'fock')
    return annihilate, annihilate.dagger(), single_leg(qt.num(cutoff + 1).full(), 'fock')


class QuantizationMap:
    """Classical symbol -> operator factory table"""

    def __init__(self, hbar: float, cutoff: Optional[int] = None):
        _check_hbar(hbar)
        self.hbar = hbar
        self.cutoff = cutoff
        self._factories: Dict[str, Callable[[], OperatorMatrix]] = {}

        for r in range(3):
            self._factories[f'xi_perp{r + 1}'] = (lambda r=r: transverse_dipole_image(self.hbar)[r])
        for symbol, key in (('alpha', 'a'), ('alpha*', 'a_dag'), ('beta', 'b'), ('beta*', 'b_dag')):
            self._factories[symbol] = (lambda key=key: fermi_oscillators(self.hbar)[key])
        self._factories['c'] = lambda: physical_projector_and_c(self.hbar).c
        self._factories['c*'] = lambda: physical_projector_and_c(self.hbar).c_dag
        if cutoff is not None:
            for index, symbol in enumerate(('a_em', 'a_em*', 'n_em')):
                self._factories[symbol] = (lambda index=index: fock_operators(self.cutoff)[index])

    def symbols(self) -> List[str]:
        return sorted(self._factories)

    def quantize(self, symbol: str) -> OperatorMatrix:
        if symbol not in self._factories:
            raise ValueError(f"No quantization rule for symbol '{symbol}'")
        return self._factories[symbol]()

    def dipole(self, d: float) -> List[OperatorMatrix]:
        return dipole_operator(d, self.hbar)

    def to_dict(self):
        return {'hbar': self.hbar, 'cutoff': self.cutoff, 'symbols': self.symbols()}
