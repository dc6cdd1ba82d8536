import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm
from scipy.stats import poisson

from uscsim import HilbertConfig, InvalidSpaceError, Operator, QuantumState, Space
from uscsim.operators import (
    coherent_state,
    composite_state,
    displacement,
    field_identity,
    fock_annihilator,
    fock_creator,
    fock_state,
    lift_field,
    number_operator,
    parity,
    quadratures,
    qubit_operators,
    qubit_state,
    rotated_basis,
    rotated_qubit_state,
    tensor,
)

Q = qubit_operators()
dims = st.integers(min_value=2, max_value=24)
small_alpha = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


def test_hilbert_config_validation():
    assert HilbertConfig(5).composite_dim == 10
    with pytest.raises(InvalidSpaceError):
        HilbertConfig(1)
    with pytest.raises(InvalidSpaceError):
        HilbertConfig(4, qubit_dim=3)


def test_annihilator_two_levels():
    a = fock_annihilator(HilbertConfig(2)).matrix
    assert np.array_equal(a, [[0, 1], [0, 0]])


def test_annihilator_lowers_one_to_zero():
    cfg = HilbertConfig(6)
    out = fock_annihilator(cfg) @ fock_state(1, cfg)
    assert np.array_equal(out.amplitudes, fock_state(0, cfg).amplitudes)


@given(dims)
def test_ladder_action_and_commutator_block(n):
    cfg = HilbertConfig(n)
    a, ad = fock_annihilator(cfg).matrix, fock_creator(cfg).matrix
    for k in range(1, n):
        v = np.zeros(n)
        v[k] = 1
        w = np.zeros(n)
        w[k - 1] = np.sqrt(k)
        assert np.allclose(a @ v, w)
    comm = a @ ad - ad @ a
    assert np.allclose(comm[: n - 1, : n - 1], np.eye(n - 1))
    assert np.isclose(comm[-1, -1], -(n - 1))      # truncation artifact on the last level


def test_coherent_mean_photon_number():
    cfg = HilbertConfig(30)
    psi = coherent_state(1.0, cfg)
    assert abs(number_operator(cfg).expect(psi).real - 1.0) < 1e-6


def test_pauli_definitions():
    g, e = qubit_state("g"), qubit_state("e")
    assert np.allclose((Q["sigma_z"] @ g).amplitudes, -g.amplitudes)
    assert np.allclose((Q["sigma"] @ e).amplitudes, g.amplitudes)       # sigma lowers e -> g
    anti = Q["sigma_plus"].matrix @ Q["sigma"].matrix + Q["sigma"].matrix @ Q["sigma_plus"].matrix
    assert np.allclose(anti, np.eye(2))
    comm = Q["sigma_x"].matrix @ Q["sigma_y"].matrix - Q["sigma_y"].matrix @ Q["sigma_x"].matrix
    assert np.allclose(comm, 2j * Q["sigma_z"].matrix)


@pytest.mark.parametrize("name", ["sigma_x", "sigma_y", "sigma_z"])
def test_paulis_hermitian_traceless_involutive(name):
    m = Q[name].matrix
    assert Q[name].is_hermitian()
    assert abs(np.trace(m)) < 1e-15
    assert np.allclose(m @ m, np.eye(2))


def test_tensor_examples():
    cfg = HilbertConfig(5)
    eye = tensor(Q["identity"], field_identity(cfg))
    assert np.array_equal(eye.matrix, np.eye(10))
    gz = composite_state("g", 0, cfg)
    out = tensor(Q["sigma_z"], field_identity(cfg)) @ gz
    assert np.allclose(out.amplitudes, -gz.amplitudes)
    x, _ = quadratures(cfg)
    assert tensor(Q["sigma_x"], x).is_hermitian()


def test_tensor_space_checks():
    cfg = HilbertConfig(4)
    with pytest.raises(InvalidSpaceError):
        tensor(field_identity(cfg), Q["sigma_x"])
    with pytest.raises(InvalidSpaceError):
        lift_field(Q["sigma_x"])
    with pytest.raises(InvalidSpaceError):
        field_identity(cfg) + field_identity(HilbertConfig(5))
    with pytest.raises(InvalidSpaceError):
        Q["sigma_x"] @ fock_state(0, cfg)


@given(st.integers(2, 6), st.integers(0, 2 ** 16))
def test_tensor_mixed_product_and_bilinearity(n, seed):
    rng = np.random.default_rng(seed)
    cfg = HilbertConfig(n)

    def rnd(k, space):
        return Operator(rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k)), space)

    a1, a2 = rnd(2, Space.QUBIT), rnd(2, Space.QUBIT)
    b = rnd(n, Space.FIELD)
    lhs = tensor(a1, field_identity(cfg)) @ tensor(Q["identity"], b)
    assert lhs.allclose(tensor(a1, b), atol=1e-10)
    c = 0.7 - 0.2j
    assert tensor(a1 + c * a2, b).allclose(tensor(a1, b) + c * tensor(a2, b), atol=1e-10)


def test_displacement_zero_is_identity():
    cfg = HilbertConfig(10)
    assert np.allclose(displacement(0, cfg).matrix, np.eye(10))


def test_displacement_unitary_and_poisson():
    cfg = HilbertConfig(30)
    d = displacement(1.0, cfg).matrix
    assert np.linalg.norm(d.conj().T @ d - np.eye(30)) < 1e-8
    probs = np.abs(d[:, 0]) ** 2
    assert np.max(np.abs(probs - poisson.pmf(np.arange(30), 1.0))) < 1e-6


def test_displacement_matches_scipy_expm():
    cfg = HilbertConfig(12)
    alpha = 0.4 - 0.3j
    a = fock_annihilator(cfg).matrix
    ref = expm(alpha * a.conj().T - np.conj(alpha) * a)
    assert np.allclose(displacement(alpha, cfg).matrix, ref, atol=1e-12)


@given(small_alpha)
def test_displacement_inverse_is_negative_argument(alpha):
    cfg = HilbertConfig(30)
    d = displacement(alpha, cfg).matrix
    assert np.max(np.abs(displacement(-alpha, cfg).matrix - d.conj().T)) < 1e-10


def test_parity():
    cfg = HilbertConfig(6)
    p = parity(cfg)
    assert np.allclose((p @ fock_state(0, cfg)).amplitudes, fock_state(0, cfg).amplitudes)
    assert np.allclose((p @ fock_state(1, cfg)).amplitudes, -fock_state(1, cfg).amplitudes)
    assert np.allclose(p.matrix @ p.matrix, np.eye(6))


def test_rotated_qubit_states():
    assert np.allclose(rotated_qubit_state(1, 0).amplitudes, np.array([1, 1]) / np.sqrt(2))
    assert np.allclose(rotated_qubit_state(1, np.pi / 2).amplitudes, np.array([1, -1j]) / np.sqrt(2))


@given(st.floats(-2 * np.pi, 2 * np.pi))
def test_rotated_basis_orthonormal(phi):
    plus, minus = rotated_qubit_state(1, phi), rotated_qubit_state(-1, phi)
    assert abs(plus.overlap(minus)) < 1e-15
    u = rotated_basis(phi)
    assert np.allclose(u.conj().T @ u, np.eye(2))


def test_state_normalisation_and_errors():
    s = QuantumState([3, 4], Space.QUBIT)
    assert np.isclose(s.norm, 1.0)
    with pytest.raises(ValueError):
        QuantumState([0, 0], Space.QUBIT)
    with pytest.raises(InvalidSpaceError):
        fock_state(5, HilbertConfig(5))
    with pytest.raises(ValueError):
        rotated_qubit_state(0)


def test_operators_are_immutable():
    op = qubit_operators()["sigma_x"]
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 2
