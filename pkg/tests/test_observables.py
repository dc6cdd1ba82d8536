import numpy as np
import pytest
from hypothesis import given, strategies as st

from uscsim import (
    DensityMatrix,
    HilbertConfig,
    InvalidSpaceError,
    PostselectionError,
    SystemParams,
    cat_amplitude,
    cat_reference,
    derive_effective_params,
    fidelity,
    fit_cat_phase,
    mhz,
    partial_trace_qubit,
    photon_distribution,
    postselect_qubit,
    qubit_populations,
    wigner,
    wigner_negativity,
)
from uscsim.observables import (
    WIGNER_BOUND,
    TimeSeries,
    photon_number_series,
    quadrature_series,
    wigner_integral,
)
from uscsim.operators import Space, QuantumState, coherent_state, composite_state, fock_state, tensor, qubit_state
from uscsim.protocols import effective_trajectory, exact_interaction_trajectory

C32 = HilbertConfig(32)
P = SystemParams.reference()
T_CAT = np.pi / derive_effective_params(P).g_eff          # g_eff t = pi


def _rho(state):
    return DensityMatrix.pure(state)


@pytest.fixture(scope="module")
def cat_run():
    return effective_trajectory(P, [0, T_CAT], C32).final


@pytest.fixture(scope="module")
def massive_run():
    p = P.replace(Omega_2=mhz(10))
    return effective_trajectory(p, [0, T_CAT], C32).final


def test_qubit_populations_examples():
    assert qubit_populations(composite_state("g", 0, C32)) == (1.0, 0.0)
    v = (composite_state("g", 0, C32).amplitudes + composite_state("e", 1, C32).amplitudes) / np.sqrt(2)
    pg, pe = qubit_populations(QuantumState(v, Space.COMPOSITE))
    assert np.isclose(pg, 0.5) and np.isclose(pe, 0.5)


@given(st.integers(0, 2 ** 16))
def test_populations_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    psi = QuantumState(rng.normal(size=16) + 1j * rng.normal(size=16), Space.COMPOSITE)
    assert abs(sum(qubit_populations(psi)) - 1) < 1e-10


def test_partial_trace_examples():
    rho = partial_trace_qubit(composite_state("g", 0, C32))
    assert np.allclose(rho.matrix, _rho(fock_state(0, C32)).matrix)
    a = coherent_state(2.0, C32).amplitudes
    b = coherent_state(-2.0, C32).amplitudes
    psi = QuantumState(np.concatenate([a, b]), Space.COMPOSITE)
    rho = partial_trace_qubit(psi).matrix
    assert np.allclose(rho, 0.5 * (np.outer(a, a.conj()) + np.outer(b, b.conj())), atol=1e-12)


@given(st.integers(0, 2 ** 16))
def test_density_matrix_invariants(seed):
    rng = np.random.default_rng(seed)
    psi = QuantumState(rng.normal(size=20) + 1j * rng.normal(size=20), Space.COMPOSITE)
    rho = partial_trace_qubit(psi)
    m = rho.matrix
    assert abs(rho.trace - 1) < 1e-9
    assert np.linalg.norm(m - m.conj().T) < 1e-12
    assert np.linalg.eigvalsh(m).min() >= -1e-10
    assert abs(photon_distribution(rho).sum() - 1) < 1e-9


@given(st.integers(0, 2 ** 16))
def test_postselection_reconstructs_trace(seed):
    rng = np.random.default_rng(seed)
    psi = QuantumState(rng.normal(size=12) + 1j * rng.normal(size=12), Space.COMPOSITE)
    fg, pg = postselect_qubit(psi, "g")
    fe, pe = postselect_qubit(psi, "e")
    rebuilt = pg * _rho(fg).matrix + pe * _rho(fe).matrix
    assert np.allclose(rebuilt, partial_trace_qubit(psi).matrix, atol=1e-12)
    assert np.isclose(pg + pe, 1.0)
    fp, pp = postselect_qubit(psi, "plus")
    fm, pm = postselect_qubit(psi, "-")
    assert np.allclose(pp * _rho(fp).matrix + pm * _rho(fm).matrix, rebuilt, atol=1e-12)


def test_postselection_examples():
    field, prob = postselect_qubit(composite_state("g", 0, C32), "ground")
    assert prob == 1.0 and np.allclose(field.amplitudes, fock_state(0, C32).amplitudes)
    with pytest.raises(PostselectionError):
        postselect_qubit(composite_state("g", 0, C32), "e")
    with pytest.raises(ValueError):
        postselect_qubit(composite_state("g", 0, C32), "sideways")


def test_postselected_cat_fidelity(cat_run):
    field, prob = postselect_qubit(cat_run, "g")
    assert 0.3 < prob < 0.7
    assert fidelity(cat_reference(-2.0, 0.0, C32), field) >= 0.95


def test_cat_amplitude_formula():
    d = derive_effective_params(P)
    assert np.isclose(cat_amplitude(d.g_eff, d.omega_eff, T_CAT), -2.0)
    assert np.isclose(cat_amplitude(d.g_eff, 0.0, T_CAT), -1j * np.pi)
    assert np.isclose(cat_amplitude(d.g_eff, 1e-30, 1e-9), cat_amplitude(d.g_eff, 0.0, 1e-9))


def test_cat_reference_examples():
    for theta in (0.0, 1.0):
        assert fidelity(fock_state(0, C32), cat_reference(0.0, theta, C32)) > 1 - 1e-12
    even, odd = cat_reference(2.0, 0.0, C32), cat_reference(2.0, np.pi, C32)
    assert abs(even.overlap(odd)) < 1e-3
    with pytest.raises(ValueError):
        cat_reference(0.0, np.pi, C32)


def test_fit_cat_phase_recovers_known_phase():
    theta, f = fit_cat_phase(cat_reference(1.5, 1.0, C32), 1.5, n_grid=3600)
    assert abs(theta - 1.0) < 2e-3 and f > 1 - 1e-5


def test_fitted_cat_phase_of_effective_model_is_even(cat_run):
    field, _ = postselect_qubit(cat_run, "g")
    theta, f = fit_cat_phase(field, -2.0)
    assert theta == 0.0 and f >= 0.99


def test_fidelity_examples():
    s = coherent_state(0.5, C32)
    assert np.isclose(fidelity(s, s), 1.0)
    assert fidelity(fock_state(0, C32), fock_state(1, C32)) == 0.0
    assert np.isclose(fidelity(s, _rho(s)), 1.0)
    with pytest.raises(InvalidSpaceError):
        fidelity(s, fock_state(0, HilbertConfig(8)))


# --- Wigner -------------------------------------------------------------------

def test_wigner_fock_values():
    vac = wigner(_rho(fock_state(0, C32)), (0, 0), 1)
    one = wigner(_rho(fock_state(1, C32)), (0, 0), 1)
    assert abs(vac.values[0, 0] - 2 / np.pi) < 1e-6
    assert abs(one.values[0, 0] + 2 / np.pi) < 1e-6


def test_wigner_coherent_state_gaussian():
    cfg = HilbertConfig(40)
    w = wigner(_rho(coherent_state(1.0, cfg)), (-2.5, 2.5), 41)
    xx, yy = np.meshgrid(w.x_axis, w.y_axis)
    ref = (2 / np.pi) * np.exp(-2 * ((xx - 1.0) ** 2 + yy ** 2))
    assert np.max(np.abs(w.values - ref)) < 1e-5


def test_wigner_axis_convention():
    # alpha = x + i y: a state displaced along +i peaks at positive y
    w = wigner(_rho(coherent_state(1j, C32)), (-2, 2), 41)
    i, j = np.unravel_index(np.argmax(w.values), w.values.shape)
    assert np.isclose(w.y_axis[i], 1.0) and np.isclose(w.x_axis[j], 0.0)


def test_wigner_fast_path_matches_literal():
    rho = _rho(cat_reference(1.2, 0.7, HilbertConfig(20)))
    fast = wigner(rho, (-2, 2), 9)
    slow = wigner(rho, (-2, 2), 9, fast=False)
    assert np.max(np.abs(fast.values - slow.values)) < 1e-10


def test_wigner_padding_removes_truncation_artifacts():
    rho = _rho(coherent_state(2.0, C32))
    padded = wigner(rho, (-3.5, 3.5), 29)
    clipped = wigner(rho, (-3.5, 3.5), 29, eval_dim=32)
    assert padded.values.min() > -1e-6 and padded.eval_dim > 32
    assert clipped.outside_safe_radius and not padded.outside_safe_radius


def test_wigner_bound_and_normalisation(cat_run):
    field, _ = postselect_qubit(cat_run, "g")
    for rho in (_rho(field), partial_trace_qubit(cat_run), _rho(fock_state(3, C32))):
        w = wigner(rho, (-3.5, 3.5), 71)
        assert np.max(np.abs(w.values)) <= WIGNER_BOUND + 1e-6
        assert abs(wigner_integral(w) - 1) < 1e-2


def test_wigner_negativity_examples(cat_run, massive_run):
    vac = wigner(_rho(fock_state(0, C32)), (-3, 3), 31)
    assert wigner_negativity(vac)[0] >= -1e-6
    one = wigner(_rho(fock_state(1, C32)), (-3, 3), 31)
    mn, integral = wigner_negativity(one)
    assert np.isclose(mn, -2 / np.pi, atol=1e-9) and integral > 0
    field, _ = postselect_qubit(cat_run, "g")
    assert wigner_negativity(wigner(_rho(field), n_points=61))[0] < -0.1
    assert wigner_negativity(wigner(partial_trace_qubit(cat_run), n_points=61))[0] >= -1e-3
    assert wigner_negativity(wigner(partial_trace_qubit(massive_run), n_points=61))[0] < -1e-3


def test_exact_model_traced_wigner_residual():
    """Off-resonant terms leave a small negativity in the exact model (recorded, not hidden)."""
    psi = exact_interaction_trajectory(P, [0, T_CAT], C32).final
    mn = wigner_negativity(wigner(partial_trace_qubit(psi), n_points=61))[0]
    assert -1e-2 < mn < 0


# --- time series ----------------------------------------------------------------

def test_quadratures_of_vacuum_and_photon_numbers():
    from uscsim import build_jc, propagate
    p = P.replace(g=0.0)
    traj = propagate(build_jc(p, C32), composite_state("g", 0, C32), np.linspace(0, 1e-8, 5))
    assert np.allclose(quadrature_series(traj, "x").values, 0)
    assert np.allclose(photon_number_series(traj).values, 0)
    with pytest.raises(ValueError):
        quadrature_series(traj, "z")


def test_quadrature_relates_to_field_amplitude():
    from uscsim.evolution import TrajectoryResult, PropagationSettings
    beta = 0.8 - 0.3j
    psi = tensor(qubit_state("g"), coherent_state(beta, C32))
    traj = TrajectoryResult(np.zeros(1), psi.amplitudes[None, :], PropagationSettings(), 0.0)
    assert np.isclose(quadrature_series(traj, "x").values[0], np.sqrt(2) * beta.real)
    assert np.isclose(quadrature_series(traj, "p").values[0], np.sqrt(2) * beta.imag)


def test_photon_number_at_half_and_full_revival():
    ts = np.array([0, 0.05e-6, 0.1e-6])
    n = photon_number_series(effective_trajectory(P, ts, C32)).values
    assert abs(n[1] - 4.0) <= 0.05 * 4 and n[2] <= 1e-3


def test_time_series_length_check():
    with pytest.raises(ValueError):
        TimeSeries(np.zeros(3), np.zeros(2), "bad")
