"""Hamiltonian assembly and observables against hand-built oracles."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import sparse

from twoatom.basis import build_basis, excitation_numbers, index_of_bare_state
from twoatom.config import LatticeConfig, ModelConfig
from twoatom.errors import DomainError
from twoatom.operators import (
    BoundedObservable,
    HermitianOperator,
    build_hamiltonian,
    exchange_projector,
    excitation_observable_b,
    gershgorin_floor,
    local_photon_observable,
    read_triplets,
    spectral_bounds,
    write_triplets,
)
from twoatom.propagator import StateVector, expectation, prepare_initial_state


def mode_coupling(cfg, k, omega):
    return cfg.coupling_strength * math.sqrt(omega / cfg.box_length) * math.exp(
        -((omega / cfg.cutoff) ** 2)
    )


def test_decoupled_hamiltonian_is_diagonal():
    cfg = ModelConfig(num_modes=4, n_max=2, coupling_strength=0.0)
    basis = build_basis(cfg)
    ham = build_hamiltonian(basis)
    off = ham.matrix - sparse.diags(ham.matrix.diagonal())
    off.eliminate_zeros()
    assert off.nnz == 0
    # eigenvalues are the bare sums of level energies and photon frequencies
    omegas = np.asarray(basis.modes.omega)
    expected = np.array(
        [
            a * cfg.omega_a + b * cfg.omega_b + float(np.dot(omegas, occ))
            for a, b, occ in basis.states
        ]
    )
    assert_allclose(ham.matrix.diagonal().real, expected, rtol=0, atol=0)


def test_single_excitation_block_hand_oracle():
    # one mode, one photon, rotating wave: the single-excitation sector is a
    # 3x3 block over (e_A g_B 0), (g_A g_B 1), (g_A e_B 0)
    cfg = ModelConfig(num_modes=1, n_max=1, coupling_form="rotating_wave")
    basis = build_basis(cfg)
    ham = build_hamiltonian(basis).matrix.toarray()

    k, omega = basis.modes.k[0], basis.modes.omega[0]
    g0 = mode_coupling(cfg, k, omega)
    idx = [
        index_of_bare_state(basis, 1, 0, (0,)),
        index_of_bare_state(basis, 0, 0, (1,)),
        index_of_bare_state(basis, 0, 1, (0,)),
    ]
    block = ham[np.ix_(idx, idx)]

    c_a = g0 * np.exp(1j * k * cfg.x_a)
    c_b = g0 * np.exp(1j * k * cfg.x_b)
    hand = np.array(
        [
            [cfg.omega_a, c_a, 0.0],
            [np.conjugate(c_a), omega, np.conjugate(c_b)],
            [0.0, c_b, cfg.omega_b],
        ]
    )
    assert_allclose(block, hand, rtol=0, atol=1e-15)

    # closed-form eigenvalues of the hand block (characteristic polynomial
    # factors since the three diagonal entries coincide)
    r = math.hypot(abs(c_a), abs(c_b))
    expected = np.sort([omega - r, omega, omega + r])
    assert_allclose(np.linalg.eigvalsh(block), expected, atol=1e-14)


def test_counter_rotating_terms_change_excitation_by_two():
    cfg_full = ModelConfig(num_modes=3, n_max=2, coupling_form="full")
    cfg_rwa = ModelConfig(num_modes=3, n_max=2, coupling_form="rotating_wave")
    basis = build_basis(cfg_full)
    h_full = build_hamiltonian(basis).matrix
    h_rwa = build_hamiltonian(build_basis(cfg_rwa)).matrix
    diff = (h_full - h_rwa).tocoo()
    counts = excitation_numbers(basis)
    jumps = np.abs(counts[diff.row] - counts[diff.col])
    assert diff.nnz > 0
    assert np.all(jumps == 2.0)


def test_excitation_number_commutator():
    basis = build_basis(ModelConfig(num_modes=3, n_max=2, coupling_form="rotating_wave"))
    n_op = sparse.diags(excitation_numbers(basis))
    h = build_hamiltonian(basis).matrix
    comm = h @ n_op - n_op @ h
    assert np.abs(comm.toarray()).max() == 0.0

    basis_full = build_basis(ModelConfig(num_modes=3, n_max=2, coupling_form="full"))
    h_full = build_hamiltonian(basis_full).matrix
    comm_full = h_full @ n_op - n_op @ h_full
    assert np.abs(comm_full.toarray()).max() > 0.0


def test_hermiticity_is_exact():
    for cfg in (
        ModelConfig(num_modes=6, n_max=2, coupling_form="full"),
        LatticeConfig(num_sites=6, site_a=1, site_b=4),
    ):
        ham = build_hamiltonian(build_basis(cfg))
        gap = ham.matrix - ham.matrix.conjugate().T
        gap.eliminate_zeros()
        assert gap.nnz == 0


def test_constructor_rejects_non_hermitian():
    bad = sparse.csr_matrix(np.array([[0.0, 1.0], [0.5, 0.0]], dtype=complex))
    with pytest.raises(ValueError):
        HermitianOperator(bad, 0.0)


def test_spectral_floor_is_lower_bound():
    basis = build_basis(ModelConfig(num_modes=4, n_max=2, coupling_strength=0.4))
    ham = build_hamiltonian(basis)
    w = np.linalg.eigvalsh(ham.matrix.toarray())
    assert ham.spectral_floor <= w[0] + 1e-12


def test_gershgorin_floor_exact_for_diagonal():
    mat = sparse.diags([3.0, -1.5, 2.0]).tocsr()
    assert gershgorin_floor(mat) == -1.5


def test_excitation_observable_b():
    basis = build_basis(ModelConfig(num_modes=2, n_max=1))
    obs = excitation_observable_b(basis)
    assert obs.is_projector
    psi0 = prepare_initial_state(basis)
    assert expectation(obs, psi0) == 0.0
    exchanged = np.zeros(basis.dimension, dtype=complex)
    exchanged[index_of_bare_state(basis, 0, 1, basis.vacuum)] = 1.0
    psi_ex = StateVector(exchanged, basis)
    assert expectation(obs, psi_ex) == 1.0
    # B excited on exactly half of a two-level-B basis
    trace = float(np.real(obs.matrix.diagonal().sum()))
    assert trace == basis.dimension / 2
    # projector: O^2 = O exactly
    assert (obs.matrix @ obs.matrix != obs.matrix).nnz == 0


def test_exchange_projector():
    basis = build_basis(ModelConfig(num_modes=2, n_max=1))
    obs = exchange_projector(basis)
    assert float(np.real(obs.matrix.diagonal().sum())) == 1.0
    psi0 = prepare_initial_state(basis)
    assert expectation(obs, psi0) == 0.0
    target = np.zeros(basis.dimension, dtype=complex)
    target[index_of_bare_state(basis, 0, 1, basis.vacuum)] = 1.0
    assert expectation(obs, StateVector(target, basis)) == 1.0
    assert (obs.matrix @ obs.matrix != obs.matrix).nnz == 0


def one_photon_state(basis, mode_index):
    occ = [0] * basis.num_slots
    occ[mode_index] = 1
    amp = np.zeros(basis.dimension, dtype=complex)
    amp[index_of_bare_state(basis, 0, 0, tuple(occ))] = 1.0
    return StateVector(amp, basis)


def test_photon_observable_full_box_completeness():
    cfg = ModelConfig(num_modes=4, n_max=1)
    basis = build_basis(cfg)
    obs = local_photon_observable(basis, (0.0, cfg.box_length))
    for j in range(basis.num_slots):
        assert expectation(obs, one_photon_state(basis, j)) == pytest.approx(1.0, abs=1e-12)


def test_photon_observable_vacuum():
    cfg = ModelConfig(num_modes=4, n_max=1)
    basis = build_basis(cfg)
    obs = local_photon_observable(basis, (0.0, cfg.box_length / 2))
    vac = np.zeros(basis.dimension, dtype=complex)
    vac[index_of_bare_state(basis, 0, 0, basis.vacuum)] = 1.0
    assert expectation(obs, StateVector(vac, basis)) == 0.0


def test_photon_observable_half_box_dense_oracle():
    # independent spectral oracle: build the one-photon region kernel from
    # the overlap integrals of exp(ikx)/sqrt(L), diagonalize, saturate at 1
    cfg = ModelConfig(num_modes=6, n_max=1)
    basis = build_basis(cfg)
    lo, hi = 0.0, cfg.box_length / 2
    obs = local_photon_observable(basis, (lo, hi))

    k = np.asarray(basis.modes.k)
    m = len(k)
    kernel = np.empty((m, m), dtype=complex)
    for j in range(m):
        for l in range(m):
            q = k[l] - k[j]
            if q == 0:
                kernel[j, l] = (hi - lo) / cfg.box_length
            else:
                kernel[j, l] = (np.exp(1j * q * hi) - np.exp(1j * q * lo)) / (
                    1j * q * cfg.box_length
                )
    lam, vec = np.linalg.eigh(kernel)
    clipped = np.clip(lam, 0.0, 1.0)
    oracle = (vec * clipped) @ vec.conjugate().T

    for j in range(m):
        got = expectation(obs, one_photon_state(basis, j))
        assert_allclose(got, oracle[j, j].real, atol=1e-12)
        # for a single mode the diagonal entry is just the region fraction
        assert_allclose(got, 0.5, atol=1e-12)


def test_photon_observable_spectrum_in_unit_interval():
    cfg = ModelConfig(num_modes=4, n_max=2)
    basis = build_basis(cfg)
    obs = local_photon_observable(basis, (1.0, 4.0))
    w = np.linalg.eigvalsh(obs.matrix.toarray())
    assert w[0] >= -1e-12
    assert w[-1] <= 1.0 + 1e-12


def test_photon_observable_bad_region():
    basis = build_basis(ModelConfig(num_modes=2, n_max=1))
    with pytest.raises(DomainError):
        local_photon_observable(basis, (2.0, 2.0))
    with pytest.raises(DomainError):
        local_photon_observable(basis, (-1.0, 2.0))
    with pytest.raises(DomainError):
        local_photon_observable(
            build_basis(LatticeConfig(num_sites=4, site_a=0, site_b=3)), (0.0, 1.0)
        )


def test_spectral_bounds_decoupled():
    basis = build_basis(ModelConfig(num_modes=4, n_max=2, coupling_strength=0.0))
    ham = build_hamiltonian(basis)
    lo, hi = spectral_bounds(ham)
    diag = ham.matrix.diagonal().real
    assert lo == pytest.approx(diag.min(), abs=1e-12)
    assert hi == pytest.approx(diag.max(), abs=1e-12)


def test_spectral_bounds_iterative_path():
    basis = build_basis(ModelConfig(num_modes=6, n_max=2, coupling_strength=0.3))
    ham = build_hamiltonian(basis)
    dense_lo, dense_hi = spectral_bounds(ham)
    iter_lo, iter_hi = spectral_bounds(ham, dense_limit=1)
    assert iter_lo <= dense_lo + 1e-8
    assert iter_hi >= dense_hi - 1e-8
    assert abs(iter_lo - dense_lo) < 1e-6
    assert abs(iter_hi - dense_hi) < 1e-6


def test_rayleigh_quotient_within_bounds():
    basis = build_basis(ModelConfig(num_modes=4, n_max=2, coupling_strength=0.4))
    ham = build_hamiltonian(basis)
    lo, hi = spectral_bounds(ham)
    rng = np.random.default_rng(11)
    for _ in range(100):
        v = rng.standard_normal(basis.dimension) + 1j * rng.standard_normal(basis.dimension)
        v /= np.linalg.norm(v)
        q = float(np.real(np.vdot(v, ham.matrix @ v)))
        assert lo - 1e-10 <= q <= hi + 1e-10


def test_bounded_observable_on_random_states():
    basis = build_basis(ModelConfig(num_modes=3, n_max=2))
    observables = [
        excitation_observable_b(basis),
        exchange_projector(basis),
        local_photon_observable(basis, (0.0, basis.config.box_length / 2)),
    ]
    rng = np.random.default_rng(5)
    for _ in range(50):
        v = rng.standard_normal(basis.dimension) + 1j * rng.standard_normal(basis.dimension)
        state = StateVector(v / np.linalg.norm(v), basis)
        for obs in observables:
            val = expectation(obs, state)
            assert -1e-12 <= val <= 1.0 + 1e-12


def test_triplet_round_trip(tmp_path):
    basis = build_basis(ModelConfig(num_modes=3, n_max=1, coupling_form="full"))
    ham = build_hamiltonian(basis)
    path = tmp_path / "ham.txt"
    write_triplets(ham, path)
    back = read_triplets(path)
    assert (back != ham.matrix).nnz == 0
    # rewriting produces identical bytes
    second = tmp_path / "ham2.txt"
    write_triplets(HermitianOperator(back, ham.spectral_floor), second)
    assert path.read_bytes() == second.read_bytes()


def test_lattice_hamiltonian_structure():
    cfg = LatticeConfig(num_sites=5, site_a=1, site_b=3)
    basis = build_basis(cfg)
    ham = build_hamiltonian(basis).matrix
    # single-photon hopping block: nearest-neighbor chain, open ends
    states = [(0, 0, tuple(1 if i == j else 0 for i in range(5))) for j in range(5)]
    idx = [basis.index[s] for s in states]
    block = ham.toarray()[np.ix_(idx, idx)]
    hand = np.diag([cfg.site_frequency] * 5).astype(complex)
    for j in range(4):
        hand[j, j + 1] = hand[j + 1, j] = -cfg.hopping
    assert_allclose(block, hand, atol=1e-15)


def test_observable_wrapper_defaults():
    basis = build_basis(ModelConfig(num_modes=1, n_max=1))
    op = build_hamiltonian(basis)
    wrapped = BoundedObservable(exchange_projector(basis).operator, is_projector=True)
    assert wrapped.sqrt_factor is not None
    assert wrapped.dimension == op.dimension
