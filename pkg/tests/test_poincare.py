"""
Tests for the external Poincare realization and the Grassmann spin
"""
import numpy as np
import pytest
import sympy

from algebra.brackets import DiracReduction, standard_bracket_spec, standard_constraints, transversality_constraint
from algebra.generators import dipole_table
from relativity.kinematics import RapidityVector, transverse_dipole_variables
from relativity.poincare import (GENERATOR_LABELS, STRUCTURE_TABLE, PhaseSpacePoint, boost_spin_from_grassmann,
                                 check_poincare_algebra, external_generators, poisson_bracket,
                                 random_phase_space_point, spin_algebra_residuals, spin_from_grassmann,
                                 spin_structure_sign)


def _symbolic_structure_table():
    """Regenerate the structure constants from x^mu p^nu - x^nu p^mu with {x^mu, p^nu} = -eta^{mu nu}."""
    x = sympy.symbols('x0:4')
    p = sympy.symbols('p0:4')
    eta = sympy.diag(1, -1, -1, -1)

    generators = {f'P{mu}': p[mu] for mu in range(4)}
    for mu in range(4):
        for nu in range(mu + 1, 4):
            generators[f'J{mu}{nu}'] = x[mu] * p[nu] - x[nu] * p[mu]

    def bracket(f, g):
        return sympy.expand(sum(-eta[mu, nu] * (sympy.diff(f, x[mu]) * sympy.diff(g, p[nu])
                                                - sympy.diff(f, p[nu]) * sympy.diff(g, x[mu]))
                                for mu in range(4) for nu in range(4)))

    unknowns = sympy.symbols('c0:10')
    table = {}
    for i, a in enumerate(GENERATOR_LABELS):
        for b in GENERATOR_LABELS[i + 1:]:
            residual = sympy.expand(bracket(generators[a], generators[b])
                                    - sum(c * generators[label] for c, label in zip(unknowns, GENERATOR_LABELS)))
            equations = sympy.Poly(residual, *x, *p).coeffs()
            solution = sympy.solve(equations, unknowns, dict=True)[0]
            table[(a, b)] = {label: float(solution.get(c, 0)) for c, label in zip(unknowns, GENERATOR_LABELS)
                             if solution.get(c, 0) != 0}
    return table


def test_structure_table_matches_symbolic_oracle():
    """Test the frozen structure constants against an independent symbolic derivation."""
    assert len(STRUCTURE_TABLE) == 45
    assert STRUCTURE_TABLE == _symbolic_structure_table()


def test_structure_table_examples():
    """Test a few familiar relations."""
    assert STRUCTURE_TABLE[('P0', 'P3')] == {}
    assert STRUCTURE_TABLE[('P1', 'J12')] == {'P2': -1.0}
    assert STRUCTURE_TABLE[('J12', 'J23')] == {'J13': -1.0}


def test_external_generators():
    """Test P = Mc h and the antisymmetry of J."""
    point = PhaseSpacePoint([1.0, -2.0, 0.5], [0.3, 0.4, 1.2], [0.1, 0.0, -0.7], 2.0)
    generators = external_generators(point)
    h0 = RapidityVector(point.h).h0
    assert generators.P[0] == pytest.approx(2.0 * h0)
    assert np.allclose(generators.P[1:], 2.0 * point.h)
    assert np.allclose(generators.J, -generators.J.T)
    assert generators.value('J12') == pytest.approx(1.0 * 0.4 - (-2.0) * 0.3 - 0.7)
    assert set(generators.to_dict()) == set(GENERATOR_LABELS)


def test_phase_space_point_validation():
    """Test Mc must be positive and vectors must have three finite entries."""
    with pytest.raises(ValueError):
        PhaseSpacePoint([0, 0, 0], [0, 0, 0], [0, 0, 0], 0.0)
    with pytest.raises(ValueError):
        PhaseSpacePoint([0, 0], [0, 0, 0], [0, 0, 0], 1.0)
    with pytest.raises(ValueError):
        PhaseSpacePoint([0, 0, np.nan], [0, 0, 0], [0, 0, 0], 1.0)


def test_poisson_bracket_values():
    """Test momenta commute and rotations rotate momenta."""
    point = PhaseSpacePoint([0.2, 0.1, -0.3], [1.0, 2.0, 3.0], [0.5, 0.5, 0.5], 1.5)
    assert poisson_bracket('P1', 'P2', point) == 0.0
    assert poisson_bracket('P1', 'J12', point) == pytest.approx(-external_generators(point).value('P2'))
    with pytest.raises(ValueError):
        poisson_bracket('P1', 'K3', point)


def test_closure_at_random_points(rng):
    """Test every relation closes at random points with and without spin."""
    for spin in (True, False):
        for _ in range(10):
            report = check_poincare_algebra(random_phase_space_point(rng, spin=spin))
            assert report['failing'] == []
            assert report['max_residual'] < 1e-10
            assert len(report['records']) == 45


def test_closure_is_independent_of_mass_scale(rng):
    """Test rescaling Mc keeps the algebra closed."""
    point = random_phase_space_point(rng)
    for factor in (1e-3, 1.0, 1e3):
        assert check_poincare_algebra(point.scaled(factor), tol=1e-8)['failing'] == []


def test_spin_structure_sign():
    """Test the Grassmann spin structure sign is -sgn."""
    assert spin_structure_sign(1) == -1
    assert spin_structure_sign(-1) == 1


@pytest.mark.parametrize('sgn', [1, -1])
def test_grassmann_spin_algebra(sgn):
    """Test {S^r, S^s}* closes on eps S with the signature-dependent sign."""
    table = dipole_table()
    h = np.array([0.3, -0.4, 1.2])
    h_upper = RapidityVector(h).four_velocity().components
    spec = standard_bracket_spec(table, sgn)
    reduction = DiracReduction(standard_constraints(table) + [transversality_constraint(table, h_upper, sgn)], spec)
    spin = spin_from_grassmann(transverse_dipole_variables(table, h))
    records = spin_algebra_residuals(spin, reduction)
    assert len(records) == 6
    assert max(record['residual'] for record in records) < 1e-13
    wrong = spin_algebra_residuals(spin, reduction, sign=-spin_structure_sign(sgn))
    assert max(record['residual'] for record in wrong) > 1e-3


def test_spin_components_are_even():
    """Test S^r is an even bilinear whose square vanishes."""
    table = dipole_table()
    spin = spin_from_grassmann(transverse_dipole_variables(table, [0.0, 0.0, 0.0]))
    for component in spin:
        assert component.grades() == [2]
        assert (component * component).is_zero()
    assert spin[2].coefficient(['xi1', 'xi2']) == pytest.approx(-1j)
    with pytest.raises(ValueError):
        spin_from_grassmann(spin[:2])


def test_boost_spin():
    """Test S^{oi} vanishes at rest and needs a future time-like momentum."""
    table = dipole_table()
    spin = spin_from_grassmann(transverse_dipole_variables(table, [0.0, 0.0, 0.0]))
    assert all(element.is_zero() for element in boost_spin_from_grassmann(spin, [1.0, 0.0, 0.0, 0.0], 1))
    moving = boost_spin_from_grassmann(spin, [2.0, 0.0, 0.0, 1.0], 1)
    # -eps^{ijr} P^j S^r / (P^0 + M) with P = (2, 0, 0, 1), M = sqrt(3)
    assert moving[0].is_close(spin[1].scale(1.0 / (2.0 + np.sqrt(3.0))), 1e-14)
    with pytest.raises(ValueError):
        boost_spin_from_grassmann(spin, [1.0, 2.0, 0.0, 0.0], 1)
