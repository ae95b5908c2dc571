import math

import numpy as np
import pytest
import scipy.sparse as sp

from dissprep.errors import DimensionMismatchError, NonUniqueSteadyStateError, SolverError
from dissprep.liouvillian import Liouvillian, dissipator, total_liouvillian, zero_liouvillian
from dissprep.metrics import fidelity
from dissprep.model import ChainSpec, NoiseSpec, ReservoirSpec
from dissprep.operators import (
    basis_state,
    ket_to_dm,
    mode_excitation_state,
    random_density_matrix,
    vacuum_state,
)
from dissprep.solvers import (
    Method,
    SolverOptions,
    check_density_matrix,
    convergence_time,
    evolve,
    relative_residual,
    stable_step,
    steady_state,
)

SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.T.copy()
UP, DOWN = ket_to_dm(basis_state("u")), ket_to_dm(basis_state("d"))
TM = SolverOptions(method="time_marching")


def trace_distance(a, b):
    return 0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum()


def engineered_n5(frame="interaction", noise=NoiseSpec(kappa=0.0)):
    spec = ChainSpec(5, 1.0)
    res = [ReservoirSpec(1, "e", 1.0)] + [ReservoirSpec(k, "g", 1.0) for k in range(2, 6)]
    return spec, total_liouvillian(spec, res, noise, frame)


@pytest.mark.parametrize("opts", [SolverOptions(), TM], ids=["direct", "time_marching"])
def test_single_qubit_decay(opts):
    rho = steady_state(dissipator(SIGMA_MINUS, 1.0), opts)
    np.testing.assert_allclose(rho, DOWN, atol=1e-9)


def test_single_qubit_thermal():
    L = dissipator(SIGMA_MINUS, 1.5) + dissipator(SIGMA_PLUS, 0.5)
    rho = steady_state(L)
    assert rho[0, 0].real == pytest.approx(0.25, abs=1e-12)
    assert abs(rho[0, 1]) <= 1e-12


@pytest.mark.parametrize("opts", [SolverOptions(), TM], ids=["direct", "time_marching"])
def test_engineered_fixed_point_n5(opts):
    spec, L = engineered_n5()
    rho = steady_state(L, opts)
    assert fidelity(rho, mode_excitation_state(spec, 1)) >= 1 - 1e-8


def test_steady_state_properties(rng):
    spec = ChainSpec(4, 3.0)
    res = [ReservoirSpec(2, "e", 4.0), ReservoirSpec(1, "g", 2.0)]
    L = total_liouvillian(spec, res, NoiseSpec(1.0, 0.3, 0.05))
    rho = steady_state(L)
    check_density_matrix(rho)
    assert relative_residual(L, rho) <= 1e-10


def test_evolve_matches_exponential_decay():
    kappa = 2.0
    L = dissipator(SIGMA_MINUS, kappa)
    t = np.linspace(0, 1 / kappa, 11)
    states = evolve(L, UP, t)
    for ti, rho in zip(t, states):
        assert rho[0, 0].real == pytest.approx(math.exp(-kappa * ti), abs=1e-6)


def test_evolve_long_time_matches_direct(rng):
    spec = ChainSpec(3, 2.0)
    res = [ReservoirSpec(1, "e", 2.0), ReservoirSpec(3, "g", 1.0)]
    L = total_liouvillian(spec, res, NoiseSpec(1.0, 0.5, 0.1))
    final = evolve(L, random_density_matrix(8, rng), np.linspace(0, 200, 3))[-1]
    assert trace_distance(final, steady_state(L)) <= 1e-6


def test_evolve_first_state_is_initial(rng):
    _, L = engineered_n5()
    rho0 = random_density_matrix(32, rng)
    np.testing.assert_allclose(evolve(L, rho0, [0.0])[0], rho0, atol=1e-15)


def test_evolve_rejects_bad_input(rng):
    L = dissipator(SIGMA_MINUS, 1.0)
    with pytest.raises(ValueError):
        evolve(L, UP, [0.0, 1.0, 0.5])
    with pytest.raises(ValueError):
        evolve(L, UP, [0.5, 1.0])
    with pytest.raises(DimensionMismatchError):
        evolve(L, random_density_matrix(4, rng), [0.0, 1.0])


@pytest.mark.parametrize("frame", ["lab", "interaction"])
def test_direct_and_time_marching_agree(frame):
    spec = ChainSpec(3, 50.0)
    res = [ReservoirSpec(1, "e", 20.0), ReservoirSpec(2, "g", 20.0), ReservoirSpec(3, "g", 20.0)]
    L = total_liouvillian(spec, res, NoiseSpec(1.0, 1.0, 0.01), frame)
    a = steady_state(L)
    b = steady_state(L, TM)
    assert trace_distance(a, b) <= 1e-6


def test_time_marching_independent_of_initial_state(rng):
    spec = ChainSpec(3, 1.0)
    res = [ReservoirSpec(1, "e", 1.0), ReservoirSpec(2, "g", 1.0)]
    L = total_liouvillian(spec, res, NoiseSpec(1.0, 0.2, 0.1))
    states = [steady_state(L, TM, random_density_matrix(8, rng)) for _ in range(5)]
    for rho in states[1:]:
        assert trace_distance(rho, states[0]) <= 1e-6


def test_auto_switches_on_dimension():
    _, L = engineered_n5()
    small_cap = SolverOptions(method="auto", max_direct_dim=16)
    rho = steady_state(L, small_cap)
    assert trace_distance(rho, steady_state(L)) <= 1e-6
    with pytest.raises(SolverError):
        steady_state(L, SolverOptions(method="direct", max_direct_dim=16))


def test_zero_liouvillian_is_not_unique():
    with pytest.raises(NonUniqueSteadyStateError):
        steady_state(zero_liouvillian(4))


def test_degenerate_liouvillian_is_not_unique():
    # pure dephasing keeps every diagonal state stationary
    with pytest.raises(NonUniqueSteadyStateError):
        steady_state(dissipator(np.diag([1.0, -1.0]), 1.0))


def test_stable_step():
    L = dissipator(SIGMA_MINUS, 4.0)
    assert stable_step(L) == pytest.approx(1 / abs(L.matrix).sum(axis=1).max())
    assert stable_step(zero_liouvillian(2)) == np.inf


def test_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(residual_tol=0)
    with pytest.raises(ValueError):
        SolverOptions(max_time=-1)
    with pytest.raises(ValueError):
        SolverOptions(method="magic")
    assert SolverOptions(method="auto").method is Method.AUTO


def test_check_density_matrix():
    check_density_matrix(UP)
    with pytest.raises(SolverError):
        check_density_matrix(2 * UP)
    with pytest.raises(SolverError):
        check_density_matrix(np.diag([1.1, -0.1]))


def test_convergence_time_zero_at_target():
    spec, L = engineered_n5()
    target = mode_excitation_state(spec, 1)
    t = np.linspace(0, 1, 5)
    assert convergence_time(L, ket_to_dm(target), target, 0.99, t) == 0.0


def test_convergence_time_unreachable():
    L = dissipator(SIGMA_MINUS, 1.0)
    assert convergence_time(L, DOWN, basis_state("u"), 0.5, np.linspace(0, 5, 6)) == math.inf


def test_convergence_time_falls_with_gamma():
    spec = ChainSpec(3, 1.0)
    target = mode_excitation_state(spec, 1)
    rho0 = ket_to_dm(vacuum_state(3))
    t = np.linspace(0, 20, 401)
    times = []
    for gamma in (0.5, 1.0, 2.0, 4.0):
        res = [ReservoirSpec(1, "e", gamma)] + [ReservoirSpec(k, "g", gamma) for k in (2, 3)]
        L = total_liouvillian(spec, res, NoiseSpec(kappa=0.0), "interaction")
        times.append(convergence_time(L, rho0, target, 0.99, t))
    assert all(np.isfinite(times))
    assert all(a > b for a, b in zip(times, times[1:]))


def test_convergence_time_bad_threshold():
    with pytest.raises(ValueError):
        convergence_time(zero_liouvillian(2), UP, basis_state("u"), 1.5, [0.0, 1.0])


def test_liouvillian_shape_check():
    with pytest.raises(ValueError):
        Liouvillian(sp.csr_matrix((3, 3)))
