"""
Graded Poisson and Dirac brackets
Fundamental bracket tables, the second-class constraint sets of the atom and their reduction
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from algebra.element import GrassmannElement, reorder_sign
from algebra.generators import GeneratorTable, TableMismatchError, LEVEL_KINDS
from relativity.signature import get_signature, minkowski_metric

logger = logging.getLogger(__name__)

# a constraint matrix this close to singular is treated as not second class
SINGULAR_RCOND = 1e-12


class SecondClassError(ValueError):
    """Raised when the constraint bracket matrix cannot be inverted"""


class BracketSpec:
    """
    Fundamental graded Poisson brackets between generators.

    All generators are odd, so every stored bracket is symmetric:
    {a, b} = {b, a}.
    """

    def __init__(self, table: GeneratorTable, pairs: Dict[Tuple[str, str], complex], sgn: Optional[int] = None):
        self.table = table
        self.sgn = get_signature() if sgn is None else sgn
        self._values: Dict[Tuple[int, int], complex] = {}
        for (a, b), value in pairs.items():
            i, j = table.position(a), table.position(b)
            value = complex(value)
            if (j, i) in self._values and self._values[(j, i)] != value:
                raise ValueError(f"Odd-odd bracket {{{a}, {b}}} must be symmetric")
            if value != 0:
                self._values[(i, j)] = value
                self._values[(j, i)] = value

    def value(self, a: str, b: str) -> complex:
        return self._values.get((self.table.position(a), self.table.position(b)), 0j)

    def entries(self) -> List[Tuple[int, int, complex]]:
        """Every ordered nonzero pair, sorted"""
        return sorted((i, j, v) for (i, j), v in self._values.items())

    def dump(self) -> str:
        """Stable text form, one unordered pair per line"""
        lines = []
        for i, j, v in self.entries():
            if i <= j:
                lines.append(f"{{{self.table.name(i)}, {self.table.name(j)}}} = ({v.real:+.15g}{v.imag:+.15g}j)")
        return '\n'.join(lines)

    def to_dict(self):
        return {
            'sgn': self.sgn,
            'brackets': [
                {'a': self.table.name(i), 'b': self.table.name(j), 're': v.real, 'im': v.imag}
                for i, j, v in self.entries() if i <= j
            ]
        }


def standard_bracket_spec(table: GeneratorTable, sgn: Optional[int] = None) -> BracketSpec:
    """{xi^mu, pi^nu} = -eta^{mu nu}; {v, pi_v} = -1 for each level variable"""
    sgn = get_signature() if sgn is None else sgn
    eta = minkowski_metric(sgn)
    pairs = {}
    for entry in table.entries:
        if entry.kind != 'momentum':
            continue
        target = next(e for e in table.entries if e.name == entry.target)
        if target.kind == 'xi':
            for other in table.entries:
                if other.kind == 'momentum':
                    continue
                if other.kind == 'xi' and eta[other.index, target.index] != 0:
                    pairs[(other.name, entry.name)] = -eta[other.index, target.index]
        else:
            pairs[(target.name, entry.name)] = -1.0
    return BracketSpec(table, pairs, sgn)


def graded_poisson_bracket(a: GrassmannElement, b: GrassmannElement, spec: BracketSpec) -> GrassmannElement:
    """
    {A, B} = sum_ij (A d<-/dg_i) {g_i, g_j} (d->/dg_j B)

    Args:
        a: left argument
        b: right argument
        spec: fundamental bracket table

    Returns:
        The bracket as a GrassmannElement
    """
    if a.table != spec.table or b.table != spec.table:
        raise TableMismatchError("Bracket arguments and bracket table use different generator tables")

    right_derivatives: Dict[int, GrassmannElement] = {}
    left_derivatives: Dict[int, GrassmannElement] = {}
    result = GrassmannElement.zero(spec.table)
    for i, j, value in spec.entries():
        if i not in right_derivatives:
            right_derivatives[i] = a.right_derivative(spec.table.name(i))
        if right_derivatives[i].is_zero():
            continue
        if j not in left_derivatives:
            left_derivatives[j] = b.left_derivative(spec.table.name(j))
        if left_derivatives[j].is_zero():
            continue
        result = result + (right_derivatives[i] * left_derivatives[j]).scale(value)
    return result


class DiracReduction:
    """
    Dirac bracket for a fixed second-class constraint set.

    The constraint matrix C_ij = {chi_i, chi_j} must be purely numeric; it is
    inverted once and reused for every bracket.
    """

    def __init__(self, constraints: Sequence[GrassmannElement], spec: BracketSpec):
        self.constraints = list(constraints)
        self.spec = spec
        self.matrix = constraint_matrix(self.constraints, spec)

        size = self.matrix.shape[0]
        if size and np.linalg.matrix_rank(self.matrix, tol=SINGULAR_RCOND * max(1.0, np.abs(self.matrix).max())) < size:
            logger.error(f"Constraint matrix of {size} constraints is singular")
            raise SecondClassError("constraints not second class: constraint bracket matrix is singular")
        self.inverse = np.linalg.inv(self.matrix) if size else self.matrix
        logger.debug(f"Dirac reduction prepared for {size} constraints")

    def bracket(self, a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
        """{A,B}* = {A,B} - {A,chi_i} (C^-1)_ij {chi_j,B}"""
        result = graded_poisson_bracket(a, b, self.spec)
        left = [graded_poisson_bracket(a, chi, self.spec) for chi in self.constraints]
        right = [graded_poisson_bracket(chi, b, self.spec) for chi in self.constraints]
        for i, left_i in enumerate(left):
            if left_i.is_zero():
                continue
            for j, right_j in enumerate(right):
                weight = self.inverse[i, j]
                if weight == 0 or right_j.is_zero():
                    continue
                result = result - (left_i * right_j).scale(weight)
        return result

    def to_dict(self):
        return {
            'constraints': len(self.constraints),
            'matrix_re': self.matrix.real.tolist(),
            'matrix_im': self.matrix.imag.tolist()
        }


def constraint_matrix(constraints: Sequence[GrassmannElement], spec: BracketSpec, tol: float = 1e-14) -> np.ndarray:
    """Numeric matrix of constraint brackets; Grassmann-valued entries are rejected"""
    size = len(constraints)
    matrix = np.zeros((size, size), dtype=complex)
    for i, chi_i in enumerate(constraints):
        for j, chi_j in enumerate(constraints):
            value = graded_poisson_bracket(chi_i, chi_j, spec)
            if not value.soul.is_zero(tol):
                raise ValueError(f"Bracket of constraints {i} and {j} is Grassmann-valued")
            matrix[i, j] = value.body
    return matrix


def dirac_bracket(a: GrassmannElement, b: GrassmannElement,
                  constraints: Sequence[GrassmannElement], spec: BracketSpec) -> GrassmannElement:
    """One-off Dirac bracket; build a DiracReduction when computing many"""
    return DiracReduction(constraints, spec).bracket(a, b)


def _gen(table: GeneratorTable, name: str) -> GrassmannElement:
    return GrassmannElement.generator(table, name)


def _level_names(table: GeneratorTable) -> Dict[str, str]:
    return {e.kind: e.name for e in table.entries if e.kind in LEVEL_KINDS}


def standard_constraints(table: GeneratorTable) -> List[GrassmannElement]:
    """
    Second-class constraints from the Grassmann momenta, in the sign
    convention that yields {xi^mu, xi^nu}* = -i eta^{mu nu} and
    {alpha, alpha*}* = {beta, beta*}* = -i.

    Order: chi^0..chi^3, chi_alpha, chi*_alpha, chi_beta, chi*_beta.
    """
    half_i = 0.5j
    constraints = [
        _gen(table, table.momentum_of(xi)) + _gen(table, xi).scale(half_i)
        for xi in table.xi_names()
    ]
    levels = _level_names(table)
    for var, star in (('alpha', 'alpha*'), ('beta', 'beta*')):
        if var not in levels:
            continue
        constraints.append(_gen(table, table.momentum_of(levels[var])) + _gen(table, levels[star]).scale(half_i))
        constraints.append(_gen(table, table.momentum_of(levels[star])) + _gen(table, levels[var]).scale(half_i))
    return constraints


def literal_constraints(table: GeneratorTable) -> List[GrassmannElement]:
    """
    The constraint signs as usually printed:
    chi^mu = pi^mu - (i/2) xi^mu, chi = pi_v + (i/2) v*, chi* = pi*_v - (i/2) v.

    Their level block is singular, so a Dirac reduction over them fails.
    """
    half_i = 0.5j
    constraints = [
        _gen(table, table.momentum_of(xi)) - _gen(table, xi).scale(half_i)
        for xi in table.xi_names()
    ]
    levels = _level_names(table)
    for var, star in (('alpha', 'alpha*'), ('beta', 'beta*')):
        if var not in levels:
            continue
        constraints.append(_gen(table, table.momentum_of(levels[var])) + _gen(table, levels[star]).scale(half_i))
        constraints.append(_gen(table, table.momentum_of(levels[star])) - _gen(table, levels[var]).scale(half_i))
    return constraints


def transversality_constraint(table: GeneratorTable, h_upper: Sequence[float], sgn: Optional[int] = None) -> GrassmannElement:
    """Phi = h_mu xi^mu at a fixed numeric direction h^mu (lowered with eta)"""
    h_lower = minkowski_metric(sgn) @ np.asarray(h_upper, dtype=float)
    result = GrassmannElement.zero(table)
    for mu, xi in enumerate(table.xi_names()):
        result = result + _gen(table, xi).scale(h_lower[mu])
    return result


def level_constraint(table: GeneratorTable) -> GrassmannElement:
    """alpha* alpha + beta* beta, the first-class two-level condition"""
    levels = _level_names(table)
    return (GrassmannElement.monomial(table, [levels['alpha*'], levels['alpha']])
            + GrassmannElement.monomial(table, [levels['beta*'], levels['beta']]))


def reduce_level_shell(element: GrassmannElement) -> GrassmannElement:
    """
    Impose alpha* alpha + beta* beta = 0 by replacing every beta* beta
    factor with -alpha* alpha.

    beta* beta is even, so it can be pulled to the front of a monomial
    without signs beyond the canonical reordering.
    """
    table = element.table
    levels = _level_names(table)
    beta_star = table.position(levels['beta*'])
    beta = table.position(levels['beta'])
    pair_mask = (1 << beta_star) | (1 << beta)
    pair = GrassmannElement.monomial(table, [levels['beta*'], levels['beta']])
    pair_sign = pair.terms[pair_mask]
    substitute = -GrassmannElement.monomial(table, [levels['alpha*'], levels['alpha']])

    result = GrassmannElement.zero(table)
    for mask, c in element.terms.items():
        if mask & pair_mask != pair_mask:
            result = result + GrassmannElement(table, {mask: c})
            continue
        rest = mask ^ pair_mask
        # monomial(mask) = k * (beta* beta) * monomial(rest)
        k = (pair_sign * reorder_sign(pair_mask, rest)).real
        result = result + (substitute * GrassmannElement(table, {rest: c})).scale(k)
    return result
