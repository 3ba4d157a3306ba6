"""
Dense operators on tensor-product spaces
Leg layouts on top of qutip tensor products, standard single-leg matrices and the matrix export format
"""

import json
import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
import qutip as qt

logger = logging.getLogger(__name__)

# single-leg matrices; index 0 is the sigma_z = +1 state
SIGMA_X = qt.sigmax().full()
SIGMA_Y = qt.sigmay().full()
SIGMA_Z = qt.sigmaz().full()
SIGMA_PLUS = qt.sigmap().full()
SIGMA_MINUS = qt.sigmam().full()
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class LayoutError(ValueError):
    """Raised when operators or states with incompatible leg layouts are combined"""


@dataclass(frozen=True)
class Layout:
    """Ordered tensor legs as (name, dimension) pairs"""
    legs: Tuple[Tuple[str, int], ...]

    def __post_init__(self):
        legs = tuple((str(name), int(dim)) for name, dim in self.legs)
        names = [name for name, _ in legs]
        if len(set(names)) != len(names):
            raise LayoutError(f"Leg names must be unique: {names}")
        if any(dim < 1 for _, dim in legs):
            raise LayoutError(f"Leg dimensions must be positive: {legs}")
        object.__setattr__(self, 'legs', legs)

    @classmethod
    def of(cls, *legs: Tuple[str, int]) -> 'Layout':
        return cls(tuple(legs))

    @property
    def names(self) -> List[str]:
        return [name for name, _ in self.legs]

    @property
    def dims(self) -> List[int]:
        return [dim for _, dim in self.legs]

    @property
    def size(self) -> int:
        return int(np.prod(self.dims)) if self.legs else 1

    def dim(self, name: str) -> int:
        return dict(self.legs)[name]

    def __add__(self, other: 'Layout') -> 'Layout':
        return Layout(self.legs + other.legs)

    def to_dict(self):
        return {'legs': [{'name': name, 'dim': dim} for name, dim in self.legs]}


class OperatorMatrix:
    """Immutable dense complex operator with a leg layout"""

    __array_ufunc__ = None

    def __init__(self, matrix, layout: Layout):
        matrix = np.array(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise LayoutError(f"Operator matrix must be square, got shape {matrix.shape}")
        if matrix.shape[0] != layout.size:
            raise LayoutError(f"Matrix dimension {matrix.shape[0]} does not match layout size {layout.size}")
        matrix.setflags(write=False)
        self.matrix = matrix
        self.layout = layout

    @classmethod
    def identity(cls, layout: Layout) -> 'OperatorMatrix':
        return cls(np.eye(layout.size), layout)

    @classmethod
    def zeros(cls, layout: Layout) -> 'OperatorMatrix':
        return cls(np.zeros((layout.size, layout.size)), layout)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def _check(self, other: 'OperatorMatrix'):
        if not isinstance(other, OperatorMatrix):
            raise TypeError(f"Expected OperatorMatrix, got {type(other).__name__}")
        if other.layout != self.layout:
            raise LayoutError(f"Layout mismatch: {self.layout.legs} vs {other.layout.legs}")

    def dagger(self) -> 'OperatorMatrix':
        return OperatorMatrix(self.matrix.conj().T, self.layout)

    def __add__(self, other):
        self._check(other)
        return OperatorMatrix(self.matrix + other.matrix, self.layout)

    def __sub__(self, other):
        self._check(other)
        return OperatorMatrix(self.matrix - other.matrix, self.layout)

    def __neg__(self):
        return OperatorMatrix(-self.matrix, self.layout)

    def __mul__(self, scalar):
        if isinstance(scalar, OperatorMatrix):
            raise TypeError("Use @ for operator products")
        return OperatorMatrix(self.matrix * complex(scalar), self.layout)

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check(other)
        return OperatorMatrix(self.matrix @ other.matrix, self.layout)

    def commutator(self, other: 'OperatorMatrix') -> 'OperatorMatrix':
        return self @ other - other @ self

    def anticommutator(self, other: 'OperatorMatrix') -> 'OperatorMatrix':
        return self @ other + other @ self

    def norm(self) -> float:
        """Spectral norm"""
        if not self.matrix.any():
            return 0.0
        return float(np.linalg.norm(self.matrix, 2))

    def hermiticity_defect(self, relative: bool = True) -> float:
        defect = float(np.linalg.norm(self.matrix - self.matrix.conj().T, 2)) if self.matrix.any() else 0.0
        scale = self.norm() if relative else 1.0
        return defect / scale if scale > 0 else defect

    def is_hermitian(self, tol: float = 1e-13) -> bool:
        return self.hermiticity_defect() <= tol

    def is_close(self, other: 'OperatorMatrix', tol: float = 1e-14) -> bool:
        self._check(other)
        return float(np.abs(self.matrix - other.matrix).max(initial=0.0)) <= tol

    def to_qobj(self) -> qt.Qobj:
        """The operator as a qutip object with one subsystem per leg"""
        dims = self.layout.dims or [1]
        return qt.Qobj(np.array(self.matrix), dims=[dims, dims])

    def kron(self, other: 'OperatorMatrix') -> 'OperatorMatrix':
        return OperatorMatrix(qt.tensor(self.to_qobj(), other.to_qobj()).full(), self.layout + other.layout)

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def __repr__(self):
        return f"OperatorMatrix(layout={self.layout.legs})"


def single_leg(matrix, name: str) -> OperatorMatrix:
    matrix = np.asarray(matrix, dtype=complex)
    return OperatorMatrix(matrix, Layout.of((name, matrix.shape[0])))


def tensor_lift(op: OperatorMatrix, target: Layout) -> OperatorMatrix:
    """
    Embed op into the target layout with identities on the remaining legs.

    Args:
        op: operator whose legs are a subset of the target legs
        target: layout to lift into

    Returns:
        The lifted operator
    """
    target_legs = dict(target.legs)
    for name, dim in op.layout.legs:
        if target_legs.get(name) != dim:
            raise LayoutError(f"Leg ({name}, {dim}) is not part of target layout {target.legs}")

    rest = [(name, dim) for name, dim in target.legs if name not in op.layout.names]
    lifted = op.to_qobj()
    if rest:
        lifted = qt.tensor(lifted, *[qt.qeye(dim) for _, dim in rest])
    order = op.layout.names + [name for name, _ in rest]
    if order != target.names:
        lifted = lifted.permute([order.index(name) for name in target.names])
    return OperatorMatrix(lifted.full(), target)


def export_matrix(op: OperatorMatrix, stem: str) -> Dict[str, str]:
    """
    Write op as little-endian doubles, row-major, each entry as (re, im),
    plus a JSON header describing the shape and layout and a text copy.

    Returns:
        Paths of the binary, header and text files
    """
    directory = os.path.dirname(stem)
    if directory:
        os.makedirs(directory, exist_ok=True)
    interleaved = np.empty(op.matrix.shape + (2,), dtype='<f8')
    interleaved[..., 0] = op.matrix.real
    interleaved[..., 1] = op.matrix.imag
    binary_path = f"{stem}.bin"
    header_path = f"{stem}.json"
    with open(binary_path, 'wb') as handle:
        handle.write(np.ascontiguousarray(interleaved).tobytes(order='C'))
    header = {
        'rows': op.dim,
        'cols': op.dim,
        'dtype': '<f8',
        'order': 'row-major',
        'entry': ['re', 'im'],
        'layout': op.layout.to_dict()
    }
    with open(header_path, 'w') as handle:
        json.dump(header, handle, indent=2, sort_keys=True)
        handle.write('\n')
    text_path = f"{stem}.txt"
    with open(text_path, 'w') as handle:
        handle.write(matrix_to_text(op))
    logger.info(f"Exported {op.dim}x{op.dim} operator to {binary_path}")
    return {'binary': binary_path, 'header': header_path, 'text': text_path}


def load_matrix(stem: str) -> OperatorMatrix:
    """Read an operator written by export_matrix"""
    with open(f"{stem}.json") as handle:
        header = json.load(handle)
    raw = np.fromfile(f"{stem}.bin", dtype='<f8').reshape(header['rows'], header['cols'], 2)
    layout = Layout(tuple((leg['name'], leg['dim']) for leg in header['layout']['legs']))
    return OperatorMatrix(raw[..., 0] + 1j * raw[..., 1], layout)


def matrix_to_text(op: OperatorMatrix) -> str:
    """One row per line, entries 're,im' separated by spaces"""
    lines = []
    for row in op.matrix:
        lines.append(' '.join(f"{float(entry.real)!r},{float(entry.imag)!r}" for entry in row))
    return '\n'.join(lines) + '\n'
