import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_rdm, brute_force_rdm_vector, dense_vector, jw_annihilators, random_sector_state
from orbcorr.fock import SectorLabel, StateVector, enumerate_sector_basis
from orbcorr.groundstate import ground_state
from orbcorr.models import HubbardParams, analytic_state, configuration_state, hubbard_hamiltonian
from orbcorr.rdm import (
    DensityMatrix,
    SymmetryLeakError,
    intrinsic_correlation,
    mode_partial_trace,
    natural_slater_overlap,
    one_orbital_rdm,
    one_particle_rdm,
    pure_density_matrix,
    two_orbital_rdm,
)


def random_state(seed, n_orb, n, ms2):
    rng = np.random.default_rng(seed)
    basis = enumerate_sector_basis(2 * n_orb, SectorLabel.from_ms2(n, ms2))
    return StateVector(basis, rng.standard_normal(basis.dim) + 1j * rng.standard_normal(basis.dim))


sectors = st.sampled_from([(3, 3, 1), (3, 2, 0), (4, 4, 0), (4, 3, -1), (4, 5, 1)])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), sectors, st.data())
def test_two_orbital_rdm_matches_brute_force(seed, sector, data):
    n_orb, n, ms2 = sector
    state = random_state(seed, n_orb, n, ms2)
    i, j = data.draw(st.lists(st.integers(0, n_orb - 1), min_size=2, max_size=2, unique=True))
    rho = two_orbital_rdm(state, i, j)
    ref = brute_force_rdm(dense_vector(state), 2 * n_orb, (2 * i, 2 * i + 1, 2 * j, 2 * j + 1))
    assert np.abs(rho.matrix - ref[np.ix_(rho.configs, rho.configs)]).max() < 1e-12
    assert np.abs(rho.matrix[~rho.sector_mask]).max(initial=0) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), sectors, st.data())
def test_one_orbital_rdm_matches_brute_force(seed, sector, data):
    n_orb, n, ms2 = sector
    state = random_state(seed, n_orb, n, ms2)
    k = data.draw(st.integers(0, n_orb - 1))
    rho, spectrum = one_orbital_rdm(state, k)
    ref = brute_force_rdm(dense_vector(state), 2 * n_orb, (2 * k, 2 * k + 1))
    assert np.abs(np.diag(ref).real - spectrum.as_array()).max() < 1e-12
    assert np.abs(ref - np.diag(np.diag(ref))).max() < 1e-12


def test_partial_trace_of_density_matrix_matches_state_path():
    state = random_state(5, 4, 4, 0)
    full = pure_density_matrix(state)
    for kept in [(0, 1, 4, 5), (6, 7, 2, 3), (3, 0)]:
        a = mode_partial_trace(state, kept)
        b = mode_partial_trace(full, kept)
        assert np.abs(a.matrix - b.matrix).max() < 1e-12


def test_partial_trace_is_nested():
    state = random_state(9, 4, 4, 0)
    two = two_orbital_rdm(state, 1, 3)
    one_direct, _ = one_orbital_rdm(state, 1)
    one_nested = mode_partial_trace(two, (2, 3))
    assert np.abs(one_direct.matrix - one_nested.matrix).max() < 1e-12


def test_rdm_properties_and_validation():
    rho = two_orbital_rdm(random_state(1, 3, 3, 1), 0, 2)
    ev = np.linalg.eigvalsh(rho.matrix)
    assert ev.min() > -1e-12 and abs(ev.sum() - 1) < 1e-12
    with pytest.raises(ValueError):
        DensityMatrix((0,), np.arange(2), np.array([[0.5, 0.1], [0.0, 0.5]]))
    with pytest.raises(ValueError):
        DensityMatrix((0,), np.arange(2), np.eye(2))
    with pytest.raises(ValueError):
        two_orbital_rdm(random_state(1, 3, 3, 1), 1, 1)


def test_symmetry_leak_is_reported():
    # fixed N but mixed S_z breaks the two-orbital sector mask
    basis = enumerate_sector_basis(4, SectorLabel(2))
    state = StateVector(basis, np.ones(basis.dim))
    with pytest.raises(SymmetryLeakError):
        two_orbital_rdm(state, 0, 1)


def test_table_states_spectra():
    _, p = one_orbital_rdm(analytic_state("one_electron"), 0)
    assert np.allclose(p.as_array(), [0.5, 0.5, 0, 0], atol=1e-15)
    _, p = one_orbital_rdm(analytic_state("dissociated_h2"), 1)
    assert np.allclose(p.as_array(), [0, 0.5, 0.5, 0], atol=1e-15)


def test_one_particle_rdm_matches_brute_force():
    state = random_state(3, 3, 3, 1)
    psi = dense_vector(state)
    c = jw_annihilators(6)
    ref = np.array([[np.vdot(psi, c[j].T @ c[i] @ psi) for j in range(6)] for i in range(6)])
    gamma = one_particle_rdm(state)
    assert np.abs(gamma.gamma - ref).max() < 1e-12
    assert gamma.trace == pytest.approx(3)


def test_configuration_state_is_uncorrelated():
    s = configuration_state(8, [0, 1, 2, 5])
    occ = one_particle_rdm(s).natural_occupations()
    assert intrinsic_correlation(occ) == pytest.approx(0, abs=1e-14)
    assert natural_slater_overlap(s).overlap == pytest.approx(1, abs=1e-12)


def test_rotated_slater_determinant_has_unit_overlap():
    # ground state of a non-interacting chain is a Slater determinant in the
    # hopping eigenbasis, not a single configuration of site orbitals
    res = ground_state(hubbard_hamiltonian(HubbardParams(1.0, 0.0, 4)))
    occ = one_particle_rdm(res.state).natural_occupations()
    assert intrinsic_correlation(occ) < 1e-10
    assert natural_slater_overlap(res.state).overlap == pytest.approx(1, abs=1e-10)


def test_intrinsic_correlation_direct_values():
    assert intrinsic_correlation([1, 1, 0, 0], 2) == 0
    assert intrinsic_correlation([0.9, 0.9, 0.1, 0.1], 2) == pytest.approx(0.4)


def test_intrinsic_bounds_on_hubbard_chain():
    res = ground_state(hubbard_hamiltonian(HubbardParams(1.0, 4.0, 4)))
    occ = one_particle_rdm(res.state).natural_occupations()
    d = intrinsic_correlation(occ)
    deficit = 1 - natural_slater_overlap(res.state).overlap
    assert d / (2 * 4) - 1e-10 <= deficit <= d / 2 + 1e-10


def test_vector_oracle_agrees_with_dense_oracle():
    psi = random_sector_state(np.random.default_rng(11), 8, 4, 0)
    for kept in [(0, 1, 2, 3), (2, 3, 6, 7), (6, 7, 0, 1), (4, 5)]:
        assert np.abs(brute_force_rdm(psi, 8, kept) - brute_force_rdm_vector(psi, kept)).max() < 1e-15
