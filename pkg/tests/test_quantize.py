"""
Tests for operators, the level oscillators and the quantization map
"""
import numpy as np
import pytest
import qutip as qt

from quantum.operators import (Layout, LayoutError, OperatorMatrix, PAULI, SIGMA_MINUS, SIGMA_PLUS, export_matrix,
                               load_matrix, matrix_to_text, single_leg, tensor_lift)
from quantum.quantize import (LEVEL_SPACE, PHI_MINUS_INDEX, PHI_PLUS_INDEX, QuantizationMap, dipole_operator,
                              fermi_oscillators, fock_operators, level_number_and_constraint,
                              literal_hop_projection, physical_projector_and_c, transverse_dipole_image)


def test_layout_validation():
    """Test leg names must be unique and dimensions positive."""
    with pytest.raises(LayoutError):
        Layout.of(('fock', 3), ('fock', 2))
    with pytest.raises(LayoutError):
        Layout.of(('level', 0))
    layout = Layout.of(('level', 2), ('fock', 5))
    assert layout.size == 10
    assert layout.dim('fock') == 5


def test_tensor_lift_reorders_legs():
    """Test lifting a single-leg operator places it on the right tensor factor."""
    layout = Layout.of(('level', 2), ('fock', 3))
    number = single_leg(np.diag([0.0, 1.0, 2.0]), 'fock')
    lifted = tensor_lift(number, layout)
    assert np.allclose(lifted.matrix, np.kron(np.eye(2), np.diag([0.0, 1.0, 2.0])))

    pair = Layout.of(('fock', 3), ('level', 2))
    joint = OperatorMatrix(np.kron(np.diag([0.0, 1.0, 2.0]), SIGMA_PLUS), pair)
    assert np.allclose(tensor_lift(joint, layout).matrix, np.kron(SIGMA_PLUS, np.diag([0.0, 1.0, 2.0])))
    with pytest.raises(LayoutError):
        tensor_lift(single_leg(np.eye(4), 'fock'), layout)


def test_operator_layout_mismatch():
    """Test operators on different layouts cannot be combined."""
    with pytest.raises(LayoutError):
        single_leg(np.eye(2), 'level') + single_leg(np.eye(2), 'dipole')


def test_export_and_load_matrix(tmp_path):
    """Test the binary export stores the exact entries and layout."""
    op = tensor_lift(single_leg(PAULI[1], 'level'), Layout.of(('level', 2), ('fock', 2))) * (0.5 + 0.25j)
    paths = export_matrix(op, str(tmp_path / 'h'))
    raw = np.fromfile(paths['binary'], dtype='<f8')
    assert raw.size == 2 * op.dim ** 2
    # entry (0, 2) is -i (0.5 + 0.25i)
    assert (raw[4], raw[5]) == (0.25, -0.5)
    loaded = load_matrix(str(tmp_path / 'h'))
    assert loaded.layout == op.layout
    assert np.array_equal(loaded.matrix, op.matrix)
    with open(paths['text']) as handle:
        rows = handle.read().splitlines()
    assert len(rows) == op.dim
    assert rows[0].split()[2] == '0.25,-0.5'


@pytest.mark.parametrize('hbar', [1.0, 0.37])
def test_fermi_oscillator_relations(hbar):
    """Test [a, a-dagger]_+ = hbar, a^2 = 0 and that the two oscillators commute."""
    ops = fermi_oscillators(hbar)
    identity = OperatorMatrix.identity(LEVEL_SPACE)
    assert ops['a'].anticommutator(ops['a_dag']).is_close(identity * hbar)
    assert ops['b'].anticommutator(ops['b_dag']).is_close(identity * hbar)
    assert (ops['a'] @ ops['a']).is_close(OperatorMatrix.zeros(LEVEL_SPACE))
    assert ops['a'].commutator(ops['b']).is_close(OperatorMatrix.zeros(LEVEL_SPACE))
    assert ops['a'].commutator(ops['b_dag']).is_close(OperatorMatrix.zeros(LEVEL_SPACE))


def test_hbar_must_be_positive():
    """Test non-positive hbar is rejected."""
    with pytest.raises(ValueError):
        fermi_oscillators(0.0)
    with pytest.raises(ValueError):
        QuantizationMap(-1.0)


def test_level_constraint_kernel():
    """Test C = N_b - N_a is Hermitian with the two physical states as its kernel."""
    _, _, constraint = level_number_and_constraint(1.0)
    assert constraint.is_hermitian()
    values = constraint.eigvalsh()
    assert int(np.sum(np.abs(values) < 1e-14)) == 2
    for index in (PHI_PLUS_INDEX, PHI_MINUS_INDEX):
        assert np.allclose(constraint.matrix @ np.eye(4)[index], 0.0)


def test_physical_lowering_operator():
    """Test c = sigma_-, its adjoint and c-dagger c = Pi N_b Pi-dagger / hbar."""
    hbar = 0.8
    space = physical_projector_and_c(hbar)
    assert np.allclose(space.projector @ space.projector.conj().T, np.eye(2))
    assert np.allclose(space.c.matrix, SIGMA_MINUS)
    assert np.allclose(space.c_dag.matrix, SIGMA_PLUS)
    ops = fermi_oscillators(hbar)
    number_b = ops['b_dag'] @ ops['b']
    assert np.allclose((space.c_dag @ space.c).matrix, space.project(number_b).matrix / hbar)
    basis = space.basis()
    assert np.allclose(basis['Phi(+)'], np.eye(4)[PHI_PLUS_INDEX])
    assert np.allclose((ops['b'] @ ops['a']).matrix @ basis['Phi(+)'], hbar * basis['Phi(-)'])


def test_literal_hop_projection_vanishes():
    """Test b-dagger a has no component inside the physical subspace."""
    assert np.allclose(literal_hop_projection(1.0).matrix, 0.0)


def test_projection_needs_level_layout():
    """Test projecting an operator on another layout is rejected."""
    with pytest.raises(ValueError):
        physical_projector_and_c(1.0).project(single_leg(np.eye(2), 'level'))


def test_dipole_operator_is_pauli():
    """Test the epsilon-sum dipole equals hbar d sigma."""
    hbar, d = 0.5, 1.7
    for r, component in enumerate(dipole_operator(d, hbar)):
        assert np.allclose(component.matrix, hbar * d * PAULI[r])
        assert component.layout.names == ['dipole']


def test_transverse_dipole_image_anticommutators():
    """Test [xi^r, xi^s]_+ = hbar delta and the spin image (hbar/2) sigma."""
    hbar = 2.0
    xi = transverse_dipole_image(hbar)
    for r in range(3):
        for s in range(3):
            assert np.allclose(xi[r].anticommutator(xi[s]).matrix, hbar * (r == s) * np.eye(2))
    spin_z = (xi[0] @ xi[1] - xi[1] @ xi[0]) * (-0.5j)
    assert np.allclose(spin_z.matrix, 0.5 * hbar * PAULI[2])


def test_fock_operators():
    """Test the truncated ladder operators."""
    a, a_dag, n = fock_operators(4)
    assert a.dim == 5
    assert np.allclose((a_dag @ a).matrix, n.matrix)
    commutator = a.commutator(a_dag).matrix
    assert np.allclose(np.diag(commutator)[:-1], 1.0)
    assert np.diag(commutator)[-1] == pytest.approx(-4.0)
    with pytest.raises(ValueError):
        fock_operators(0)


def test_quantization_map_symbols():
    """Test the symbol table with and without the photon mode."""
    plain = QuantizationMap(1.0)
    assert 'a_em' not in plain.symbols()
    assert set(plain.symbols()) == {'alpha', 'alpha*', 'beta', 'beta*', 'c', 'c*',
                                    'xi_perp1', 'xi_perp2', 'xi_perp3'}
    assert np.allclose(plain.quantize('c').matrix, SIGMA_MINUS)
    assert np.allclose(plain.quantize('xi_perp3').matrix, np.sqrt(0.5) * PAULI[2])

    with_field = QuantizationMap(1.0, cutoff=3)
    assert with_field.quantize('n_em').dim == 4
    assert with_field.to_dict()['cutoff'] == 3
    with pytest.raises(ValueError):
        plain.quantize('a_em')


def test_kron_concatenates_layouts():
    """Test the Kronecker product keeps the leg order of its factors."""
    product = single_leg(SIGMA_PLUS, 'level').kron(single_leg(np.eye(3), 'fock'))
    assert product.layout == Layout.of(('level', 2), ('fock', 3))
    assert np.allclose(product.matrix, np.kron(SIGMA_PLUS, np.eye(3)))


def test_matrix_to_text():
    """Test the text form keeps full precision."""
    text = matrix_to_text(single_leg(np.array([[0.1, 1j], [-1j, 2.0]]), 'level'))
    assert text == '0.1,0.0 0.0,1.0\n0.0,-1.0 2.0,0.0\n'


def test_tensor_lift_into_middle_leg():
    """Test a lift onto an inner leg agrees with the explicit qutip tensor product."""
    layout = Layout.of(('level', 2), ('dipole', 2), ('fock', 3))
    lowered = tensor_lift(single_leg(SIGMA_MINUS, 'dipole'), layout)
    assert np.allclose(lowered.matrix, qt.tensor(qt.qeye(2), qt.sigmam(), qt.qeye(3)).full())
    number = tensor_lift(fock_operators(2)[2], layout)
    assert np.allclose(number.matrix, qt.tensor(qt.qeye(2), qt.qeye(2), qt.num(3)).full())
    assert lowered.to_qobj().dims == [[2, 2, 3], [2, 2, 3]]
