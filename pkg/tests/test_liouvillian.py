import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_hermitian
from dissprep.errors import DuplicateModeError, InvalidModeIndexError, NegativeRateError, NonHermitianError
from dissprep.liouvillian import (
    Frame,
    devectorize,
    dissipator,
    engineered_liouvillian,
    hamiltonian_part,
    lindblad_rhs,
    natural_liouvillian,
    total_liouvillian,
    trace_row,
    vectorize,
)
from dissprep.metrics import fidelity, mode_occupations, purity
from dissprep.model import ChainSpec, NoiseSpec, ReservoirSpec
from dissprep.operators import (
    basis_state,
    chain_hamiltonian,
    jw_mode_operators,
    ket_to_dm,
    mode_excitation_state,
    random_density_matrix,
    site_operator,
    vacuum_state,
)
from dissprep.solvers import SolverOptions, evolve, steady_state

SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
UP, DOWN = basis_state("u"), basis_state("d")
PLUS = (UP + DOWN) / np.sqrt(2)


def test_vectorize_column_stacking():
    a, b, c, d = 1.0, 2.0, 3.0, 4.0
    np.testing.assert_array_equal(vectorize(np.array([[a, c], [b, d]])), [a, b, c, d])


def test_vectorize_round_trip(rng):
    X = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    assert np.array_equal(devectorize(vectorize(X)), X)


def test_vec_kron_identity(rng):
    for _ in range(10):
        A, X, B = (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)) for _ in range(3))
        assert np.abs(vectorize(A @ X @ B) - np.kron(B.T, A) @ vectorize(X)).max() <= 1e-13


def test_devectorize_rejects_bad_length():
    with pytest.raises(ValueError):
        devectorize(np.zeros(5))
    with pytest.raises(ValueError):
        vectorize(np.zeros((2, 3)))


def test_trace_row():
    rho = np.arange(9).reshape(3, 3)
    assert trace_row(3) @ vectorize(rho) == np.trace(rho)


def test_hamiltonian_part_examples(rng):
    assert hamiltonian_part(np.zeros((4, 4))).matrix.nnz == 0
    Z = np.diag([1.0, -1.0])
    drho = hamiltonian_part(Z).apply(ket_to_dm(PLUS))
    # -i[Z, |+><+|] worked out by hand
    np.testing.assert_allclose(drho, [[0, -1j], [1j, 0]], atol=1e-15)
    H = random_hermitian(rng, 4)
    for _ in range(5):
        rho = random_density_matrix(4, rng)
        out = hamiltonian_part(H).apply(rho)
        assert np.abs(out - (-1j) * (H @ rho - rho @ H)).max() <= 1e-13
        assert abs(np.trace(out)) <= 1e-13


def test_hamiltonian_part_rejects_non_hermitian():
    with pytest.raises(NonHermitianError):
        hamiltonian_part(np.array([[0, 1], [0, 0]]))


def test_dissipator_decay_examples():
    gamma = 0.7
    D = dissipator(SIGMA_MINUS, gamma)
    np.testing.assert_allclose(D.apply(ket_to_dm(UP)), gamma * (ket_to_dm(DOWN) - ket_to_dm(UP)),
                               atol=1e-15)
    # coherence of |+><+| decays at gamma/2: d rho_01/dt = -(gamma/2) rho_01
    drho = D.apply(ket_to_dm(PLUS))
    assert drho[0, 1] == pytest.approx(-gamma / 2 * 0.5)
    assert drho[1, 0] == pytest.approx(-gamma / 2 * 0.5)


def test_dephasing_leaves_populations(rng):
    D = dissipator(np.diag([1.0, -1.0]), 0.3)
    rho = np.diag(rng.random(2))
    np.testing.assert_allclose(D.apply(rho), 0, atol=1e-15)


def test_dissipator_matches_direct_formula(rng):
    for d in (2, 4, 8):
        L = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        rate = rng.random()
        D = dissipator(L, rate)
        for _ in range(3):
            rho = random_density_matrix(d, rng)
            assert np.abs(D.apply(rho) - lindblad_rhs(rho, None, [(L, rate)])).max() <= 1e-13


def test_dissipator_negative_rate():
    with pytest.raises(NegativeRateError):
        dissipator(SIGMA_MINUS, -1.0)


def test_engineered_empty_is_zero():
    assert engineered_liouvillian(ChainSpec(3, 1.0), []).matrix.nnz == 0


def test_engineered_rejects_duplicates_and_bad_modes():
    spec = ChainSpec(3, 1.0)
    with pytest.raises(DuplicateModeError):
        engineered_liouvillian(spec, [ReservoirSpec(1, "e", 1.0), ReservoirSpec(1, "g", 1.0)])
    with pytest.raises(InvalidModeIndexError):
        engineered_liouvillian(spec, [ReservoirSpec(4, "e", 1.0)])


def test_engineered_pump_two_sites_reaches_target():
    # pumping mode 1 alone never touches mode 2, so |0> flows to f_1^dag |0>
    spec = ChainSpec(2, 1.0)
    L = engineered_liouvillian(spec, [ReservoirSpec(1, "excited", 1.0)])
    t = np.linspace(0, 40, 5)
    final = evolve(L, ket_to_dm(vacuum_state(2)), t)[-1]
    assert fidelity(final, mode_excitation_state(spec, 1)) >= 1 - 1e-10


def test_cooling_every_mode_empties_chain(rng):
    spec = ChainSpec(3, 1.0)
    L = engineered_liouvillian(spec, [ReservoirSpec(k, "ground", 1.0) for k in (1, 2, 3)])
    vac = vacuum_state(3)
    t = np.linspace(0, 60, 4)
    for _ in range(5):
        final = evolve(L, random_density_matrix(8, rng), t)[-1]
        assert fidelity(final, vac) >= 1 - 1e-9


def test_natural_single_site_decay_and_thermal():
    spec = ChainSpec(1, 1.0)
    rho = steady_state(natural_liouvillian(spec, NoiseSpec(kappa=1.0)))
    np.testing.assert_allclose(rho, ket_to_dm(DOWN), atol=1e-12)
    for nbar in (0.1, 0.5, 2.0):
        rho = steady_state(natural_liouvillian(spec, NoiseSpec(kappa=0.8, nbar=nbar)))
        # detailed balance: kappa (1 + nbar) p_e = kappa nbar (1 - p_e)
        assert rho[0, 0].real == pytest.approx(nbar / (1 + 2 * nbar), abs=1e-12)


def test_pure_dephasing_keeps_populations(rng):
    spec = ChainSpec(2, 1.0)
    L = natural_liouvillian(spec, NoiseSpec(kappa=0.0, kappa_phi=0.5))
    rho0 = random_density_matrix(4, rng)
    for rho in evolve(L, rho0, np.linspace(0, 3, 4)):
        np.testing.assert_allclose(np.diag(rho), np.diag(rho0), atol=1e-9)


def test_pure_hamiltonian_evolution_preserves_purity(rng):
    spec = ChainSpec(3, 1.0)
    L = total_liouvillian(spec, [], NoiseSpec(kappa=0.0))
    rho0 = random_density_matrix(8, rng, rank=2)
    p0 = purity(rho0)
    opts = SolverOptions(ode_rel_tol=1e-11, ode_abs_tol=1e-13)
    for rho in evolve(L, rho0, np.linspace(0, 5, 6), opts):
        assert purity(rho) == pytest.approx(p0, abs=1e-9)


def test_interaction_frame_engineered_fixed_point():
    spec = ChainSpec(4, 1.0)
    res = [ReservoirSpec(1, "e", 1.0)] + [ReservoirSpec(k, "g", 1.0) for k in (2, 3, 4)]
    L = total_liouvillian(spec, res, NoiseSpec(kappa=0.0), frame="interaction")
    final = evolve(L, ket_to_dm(vacuum_state(4)), np.linspace(0, 40, 3))[-1]
    assert fidelity(final, mode_excitation_state(spec, 1)) >= 1 - 1e-8


def test_frames_agree_on_mode_occupations_without_dephasing():
    spec = ChainSpec(3, 5.0)
    res = [ReservoirSpec(1, "e", 3.0), ReservoirSpec(2, "g", 2.0), ReservoirSpec(3, "g", 2.0)]
    noise = NoiseSpec(kappa=1.0, kappa_phi=0.0, nbar=0.0)
    occ = {
        frame: mode_occupations(steady_state(total_liouvillian(spec, res, noise, frame)), spec)
        for frame in Frame
    }
    np.testing.assert_allclose(occ[Frame.LAB], occ[Frame.INTERACTION], atol=1e-10)


def _random_setup(rng, N):
    spec = ChainSpec(N, float(rng.uniform(0.5, 3)))
    modes = rng.permutation(np.arange(1, N + 1))[: rng.integers(1, N + 1)]
    res = [ReservoirSpec(int(k), "e" if i == 0 else "g", float(rng.uniform(0.1, 5)))
           for i, k in enumerate(modes)]
    noise = NoiseSpec(*rng.uniform(0.05, 1.5, size=3))
    return spec, res, noise


def _direct_rhs(rho, spec, res, noise, frame):
    """Master-equation right-hand side assembled from explicit operators."""
    N = spec.N
    f = jw_mode_operators(spec)
    jumps = []
    for r in res:
        L = f[r.mode_index - 1]
        jumps.append((L.conj().T if r.polarization.value == "excited" else L, r.gamma))
    for j in range(1, N + 1):
        jumps += [
            (site_operator(N, j, "Minus"), noise.kappa * (1 + noise.nbar)),
            (site_operator(N, j, "Plus"), noise.kappa * noise.nbar),
            (site_operator(N, j, "Z"), noise.kappa_phi),
        ]
    H = chain_hamiltonian(spec) if frame == "lab" else None
    return lindblad_rhs(rho, H, jumps)


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("frame", ["lab", "interaction"])
def test_superoperator_matches_direct_rhs(rng, N, frame):
    spec, res, noise = _random_setup(rng, N)
    L = total_liouvillian(spec, res, noise, frame)
    for _ in range(20):
        rho = random_density_matrix(2**N, rng)
        assert np.abs(L.apply(rho) - _direct_rhs(rho, spec, res, noise, frame)).max() <= 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1), st.sampled_from(["lab", "interaction"]))
def test_trace_annihilation_and_hermiticity(N, seed, frame):
    rng = np.random.default_rng(seed)
    spec, res, noise = _random_setup(rng, N)
    L = total_liouvillian(spec, res, noise, frame)
    assert np.abs(trace_row(2**N) @ L.matrix).max() <= 1e-12
    out = L.apply(random_hermitian(rng, 2**N))
    assert np.abs(out - out.conj().T).max() <= 1e-12
    assert abs(np.trace(out)) <= 1e-12


@pytest.mark.parametrize("N", [1, 2, 3])
def test_spectral_stability(rng, N):
    spec, res, noise = _random_setup(rng, N)
    ev = np.linalg.eigvals(total_liouvillian(spec, res, noise).matrix.toarray())
    assert ev.real.max() <= 1e-10
    assert np.abs(ev.real).min() <= 1e-10


def test_assembly_stays_sparse():
    spec = ChainSpec(5, 1.0)
    L = total_liouvillian(spec, [ReservoirSpec(k, "g", 1.0) for k in range(1, 6)], NoiseSpec(1, 1, 0.1))
    assert sp.isspmatrix_csr(L.matrix)
    assert L.matrix.nnz < 0.05 * L.dim**2


def test_parts_record_rates():
    spec = ChainSpec(2, 1.0)
    L = total_liouvillian(spec, [ReservoirSpec(1, "e", 2.0)], NoiseSpec(1.0, 0.5, 0.1))
    assert sorted(L.rates()) == pytest.approx(sorted([2.0, 1.1, 0.1, 0.5]))
    assert L.parts["frame"][0][0] == "lab"
