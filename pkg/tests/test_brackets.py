"""
Tests for graded Poisson brackets and the Dirac reduction
"""
import numpy as np
import pytest

from algebra.brackets import (BracketSpec, DiracReduction, SecondClassError, constraint_matrix, dirac_bracket,
                              graded_poisson_bracket, level_constraint, literal_constraints, reduce_level_shell,
                              standard_bracket_spec, standard_constraints, transversality_constraint)
from algebra.element import GrassmannElement
from algebra.generators import TableMismatchError, dipole_table
from relativity.kinematics import RapidityVector, transverse_dipole_variables
from relativity.signature import minkowski_metric


def _gen(table, name):
    return GrassmannElement.generator(table, name)


def test_fundamental_brackets(table, spec):
    """Test {xi, pi} = -eta and {v, pi_v} = -1 at sgn = +1."""
    assert graded_poisson_bracket(_gen(table, 'xi0'), _gen(table, 'pi_xi0'), spec).body == -1
    assert graded_poisson_bracket(_gen(table, 'xi2'), _gen(table, 'pi_xi2'), spec).body == 1
    assert graded_poisson_bracket(_gen(table, 'xi1'), _gen(table, 'pi_xi2'), spec).is_zero()
    assert graded_poisson_bracket(_gen(table, 'alpha*'), _gen(table, 'pi_alpha*'), spec).body == -1
    assert spec.value('pi_beta', 'beta') == -1


def test_fundamental_brackets_flip_with_signature(table):
    """Test the xi block follows the metric sign."""
    spec = standard_bracket_spec(table, -1)
    assert graded_poisson_bracket(_gen(table, 'xi0'), _gen(table, 'pi_xi0'), spec).body == 1
    assert graded_poisson_bracket(_gen(table, 'alpha'), _gen(table, 'pi_alpha'), spec).body == -1


def test_bracket_spec_must_be_symmetric(table):
    """Test contradictory entries for an odd pair are rejected."""
    with pytest.raises(ValueError):
        BracketSpec(table, {('xi0', 'pi_xi0'): 1.0, ('pi_xi0', 'xi0'): -1.0}, 1)


def test_odd_brackets_are_symmetric(table, spec):
    """Test {A, B} = {B, A} for odd A and B."""
    a = _gen(table, 'xi0') + _gen(table, 'pi_xi1').scale(2)
    b = _gen(table, 'pi_xi0') + GrassmannElement.monomial(table, ['xi1', 'alpha', 'beta'])
    assert graded_poisson_bracket(a, b, spec).is_close(graded_poisson_bracket(b, a, spec))


def test_even_odd_bracket_is_antisymmetric(table, spec):
    """Test {A, B} = -{B, A} for even A and odd B."""
    even = GrassmannElement.monomial(table, ['xi0', 'xi1'])
    odd = _gen(table, 'pi_xi0')
    assert graded_poisson_bracket(even, odd, spec) == _gen(table, 'xi1')
    assert graded_poisson_bracket(odd, even, spec) == -_gen(table, 'xi1')


def test_bracket_table_mismatch(table, spec):
    """Test bracket arguments must live on the bracket's table."""
    with pytest.raises(TableMismatchError):
        graded_poisson_bracket(_gen(dipole_table(), 'xi0'), _gen(table, 'xi0'), spec)


def test_dirac_brackets_of_generators(table, spec):
    """Test {xi, xi}* = -i eta and {alpha, alpha*}* = -i."""
    reduction = DiracReduction(standard_constraints(table), spec)
    eta = minkowski_metric(1)
    xis = GrassmannElement.generators(table, table.xi_names())
    for mu in range(4):
        for nu in range(4):
            bracket = reduction.bracket(xis[mu], xis[nu])
            assert bracket.soul.is_zero(1e-15)
            assert bracket.body == pytest.approx(-1j * eta[mu, nu], abs=1e-15)

    alpha, alpha_star = _gen(table, 'alpha'), _gen(table, 'alpha*')
    assert reduction.bracket(alpha, alpha_star).body == pytest.approx(-1j, abs=1e-15)
    assert reduction.bracket(alpha, alpha).is_zero(1e-15)
    assert reduction.bracket(alpha, _gen(table, 'beta*')).is_zero(1e-15)


def test_constraints_are_strongly_zero(table, spec):
    """Test every constraint has vanishing Dirac bracket with every generator."""
    constraints = standard_constraints(table)
    reduction = DiracReduction(constraints, spec)
    for chi in constraints:
        for name in ('xi3', 'pi_xi0', 'beta', 'pi_alpha*'):
            assert reduction.bracket(chi, _gen(table, name)).is_zero(1e-14)


def test_constraint_matrix_is_invertible(table, spec):
    """Test the standard constraint matrix is regular and purely imaginary."""
    matrix = constraint_matrix(standard_constraints(table), spec)
    assert matrix.shape == (8, 8)
    assert np.allclose(matrix.real, 0.0)
    assert abs(np.linalg.det(matrix)) > 0.5


def test_literal_constraint_signs_are_singular(table, spec):
    """Test the printed constraint signs are not second class."""
    with pytest.raises(SecondClassError):
        DiracReduction(literal_constraints(table), spec)
    with pytest.raises(SecondClassError):
        dirac_bracket(_gen(table, 'alpha'), _gen(table, 'alpha*'), literal_constraints(table), spec)


def test_grassmann_valued_constraint_matrix(table, spec):
    """Test constraints whose brackets are not numbers are rejected."""
    chi = GrassmannElement.monomial(table, ['pi_xi1', 'pi_xi2', 'xi3'])
    with pytest.raises(ValueError):
        constraint_matrix([chi, _gen(table, 'xi1')], spec)


@pytest.mark.parametrize('sgn', [1, -1])
def test_transverse_dipole_brackets(table, sgn):
    """Test {xi_perp^r, xi_perp^s}* = i sgn delta once h.xi = 0 is imposed."""
    spec = standard_bracket_spec(table, sgn)
    h = np.array([0.4, -1.1, 0.7])
    h_upper = RapidityVector(h).four_velocity().components
    reduction = DiracReduction(standard_constraints(table) + [transversality_constraint(table, h_upper, sgn)], spec)
    xi_perp = transverse_dipole_variables(table, h)
    for r in range(3):
        for s in range(3):
            bracket = reduction.bracket(xi_perp[r], xi_perp[s])
            expected = GrassmannElement.scalar(table, 1j * sgn * (r == s))
            assert bracket.is_close(expected, 1e-13)


def test_level_bilinear_squares_to_zero_on_shell(table):
    """Test (beta* alpha + alpha* beta)^2 needs the level constraint to vanish."""
    hop = GrassmannElement.monomial(table, ['beta*', 'alpha']) + GrassmannElement.monomial(table, ['alpha*', 'beta'])
    square = hop * hop
    assert not square.is_zero()
    assert reduce_level_shell(square).is_zero()


def test_level_constraint_reduces_to_zero(table):
    """Test the level constraint itself vanishes on the shell."""
    assert not level_constraint(table).is_zero()
    assert reduce_level_shell(level_constraint(table)).is_zero()
    xi = _gen(table, 'xi0')
    assert reduce_level_shell(xi) == xi


def test_bracket_spec_dump_is_stable(table, spec):
    """Test the text form lists each unordered pair once."""
    lines = spec.dump().splitlines()
    assert len(lines) == 8
    assert lines == standard_bracket_spec(table, 1).dump().splitlines()
    assert spec.to_dict()['sgn'] == 1
