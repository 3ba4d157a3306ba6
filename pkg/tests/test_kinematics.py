"""
Tests for four-vectors, Wigner tetrads and tetrad derivatives
"""
import numpy as np
import pytest

from algebra.generators import dipole_table
from relativity.autodiff import Dual, seed, sqrt
from relativity.kinematics import (FourVector, RapidityVector, center_of_mass_shift, embed_rest_frame,
                                   inverse_tetrad, tetrad_derivative, transverse_dipole_variables, wigner_tetrad)
from relativity.signature import get_signature, minkowski_metric, set_signature


def test_minkowski_metric_follows_signature():
    """Test eta = sgn diag(+, -, -, -) and the session setting."""
    assert np.array_equal(minkowski_metric(1), np.diag([1.0, -1.0, -1.0, -1.0]))
    assert np.array_equal(minkowski_metric(-1), np.diag([-1.0, 1.0, 1.0, 1.0]))
    set_signature(-1)
    assert get_signature() == -1
    assert minkowski_metric()[0, 0] == -1.0
    with pytest.raises(ValueError):
        set_signature(0)


def test_four_vector_validation():
    """Test component count, finiteness and unit tags are checked."""
    with pytest.raises(ValueError):
        FourVector([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        FourVector([1.0, np.nan, 0.0, 0.0])
    with pytest.raises(ValueError):
        FourVector([1.0, 0.0, 0.0, 0.0], units='seconds')
    with pytest.raises(ValueError):
        FourVector([1, 0, 0, 0], 'length') + FourVector([1, 0, 0, 0], 'momentum')


def test_four_vector_dot():
    """Test the invariant product of a unit time-like vector."""
    u = RapidityVector([0.3, -2.0, 1.5]).four_velocity()
    assert u.dot(u) == pytest.approx(1.0)
    assert FourVector(u.components, sgn=-1).dot(FourVector(u.components, sgn=-1)) == pytest.approx(-1.0)


def test_rapidity_vector_rejects_non_finite():
    """Test non-finite rapidities are rejected."""
    with pytest.raises(ValueError):
        RapidityVector([np.inf, 0.0, 0.0])
    with pytest.raises(ValueError):
        RapidityVector([0.0, 0.0])


@pytest.mark.parametrize('h', [(0.0, 0.0, 0.0), (0.2, -0.1, 0.4), (3.0, 4.0, -5.0), (-7.0, 6.0, 2.5)])
def test_tetrad_orthonormality(h):
    """Test eps^T eta eps = eta and eps^mu_tau = h^mu."""
    tetrad = wigner_tetrad(h)
    scale = tetrad.h.h0 ** 2
    assert tetrad.orthonormality_residual() / scale < 1e-12
    assert tetrad.time_column_residual() / scale < 1e-12
    assert np.linalg.det(tetrad.matrix) == pytest.approx(1.0, rel=1e-10)


def test_tetrad_orthonormality_under_both_signatures():
    """Test orthonormality does not depend on the sign convention."""
    h = (1.0, -2.0, 0.5)
    for sgn in (1, -1):
        set_signature(sgn)
        assert wigner_tetrad(h).orthonormality_residual() < 1e-12


def test_inverse_tetrad():
    """Test the metric-built inverse agrees with the matrix inverse."""
    forward = wigner_tetrad([1.2, 0.3, -0.8])
    inverse = inverse_tetrad(forward)
    assert inverse.kind == 'inverse'
    assert np.allclose(inverse.matrix @ forward.matrix, np.eye(4), atol=1e-12)
    with pytest.raises(ValueError):
        inverse_tetrad(inverse)


def test_embed_rest_frame():
    """Test z = x0 + eps sigma and the length-unit requirement."""
    x0 = FourVector([1.0, 2.0, 3.0, 4.0], 'length')
    sigma = [0.5, 1.0, -1.0, 2.0]
    assert np.allclose(embed_rest_frame(x0, [0.0, 0.0, 0.0], sigma).components, x0.components + np.array(sigma))

    h = [0.6, 0.0, -0.2]
    z = embed_rest_frame(x0, h, sigma)
    assert np.allclose(z.components, x0.components + wigner_tetrad(h).matrix @ np.array(sigma))
    assert z.units == 'length'
    with pytest.raises(ValueError):
        embed_rest_frame(FourVector([0, 0, 0, 0], 'momentum'), h, sigma)


def test_dual_numbers():
    """Test forward-mode gradients of a small expression."""
    x, y = seed([3.0, 4.0])
    r = sqrt(x * x + y * y)
    assert r.value == pytest.approx(5.0)
    assert np.allclose(r.grad, [0.6, 0.8])
    q = 1.0 / (x - 2.0 * y)
    assert isinstance(q, Dual)
    assert np.allclose(q.grad, [-1.0 / 25.0, 2.0 / 25.0])


def _inverse_tetrad_at(p_lower, sgn):
    eta = np.diag(minkowski_metric(sgn))
    p_upper = eta * p_lower
    norm = np.sqrt(sgn * p_lower @ p_upper)
    return inverse_tetrad(wigner_tetrad(p_upper[1:] / norm)).matrix


@pytest.mark.parametrize('sgn', [1, -1])
def test_tetrad_derivative_matches_finite_differences(sgn):
    """Test dual-number tetrad derivatives against central differences."""
    set_signature(sgn)
    h = RapidityVector([0.7, -0.4, 1.1])
    mc = 2.5
    derivative = tetrad_derivative(h, mc, sgn)
    p_lower = np.diag(minkowski_metric(sgn)) * (mc * h.four_velocity().components)
    step = 1e-6
    for mu in range(4):
        shift = np.zeros(4)
        shift[mu] = step
        numeric = (_inverse_tetrad_at(p_lower + shift, sgn) - _inverse_tetrad_at(p_lower - shift, sgn)) / (2 * step)
        assert np.allclose(derivative[mu], numeric, atol=1e-7)


def test_tetrad_derivative_rejects_bad_mass():
    """Test Mc must be positive."""
    with pytest.raises(ValueError):
        tetrad_derivative([0.0, 0.0, 0.0], 0.0)


def test_transverse_variables_at_rest():
    """Test xi_perp^r = xi^r at h = 0."""
    table = dipole_table()
    xi_perp = transverse_dipole_variables(table, [0.0, 0.0, 0.0])
    for r in range(3):
        assert xi_perp[r].coefficient([f'xi{r + 1}']) == pytest.approx(1.0)
        assert len(xi_perp[r].terms) == 1


def test_transverse_variables_are_orthogonal_to_h():
    """Test xi_perp carries no component along h^mu."""
    table = dipole_table()
    h = RapidityVector([1.0, 2.0, -0.5])
    forward = wigner_tetrad(h)
    for element in transverse_dipole_variables(table, h):
        row = np.array([element.coefficient([name]).real for name in table.xi_names()])
        # the row is eps^r_mu, so eps^r_mu eps^mu_tau vanishes
        assert abs(row @ forward.matrix[:, 0]) < 1e-12


def test_center_of_mass_shift():
    """Test the shift vanishes at rest and is an even bilinear elsewhere."""
    table = dipole_table()
    rest = center_of_mass_shift([0.0, 0.0, 0.0], 1.0, transverse_dipole_variables(table, [0.0, 0.0, 0.0]), 1)
    assert all(element.is_zero(1e-15) for element in rest)

    h = [0.5, -0.3, 0.8]
    moving = center_of_mass_shift(h, 1.0, transverse_dipole_variables(table, h), 1)
    assert len(moving) == 4
    assert any(not element.is_zero(1e-12) for element in moving)
    assert all(element.grades() in ([], [2]) for element in moving)
    with pytest.raises(ValueError):
        center_of_mass_shift(h, 1.0, transverse_dipole_variables(table, h)[:2])
