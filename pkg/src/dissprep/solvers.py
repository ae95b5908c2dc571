"""Steady states and time evolution under a :class:`Liouvillian`."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import RK45, solve_ivp

from .errors import (
    DimensionMismatchError,
    NoConvergenceError,
    NonUniqueSteadyStateError,
    SolverError,
    StepSizeUnderflowError,
)
from .metrics import fidelity
from .liouvillian import Liouvillian, devectorize, trace_row, vectorize
from .operators import ket_to_dm, vacuum_state

DIRECT_MAX_DIM = 4**6
PSD_TOL = 1e-8
TRACE_DRIFT_TOL = 1e-8


class Method(str, enum.Enum):
    DIRECT = "direct"
    TIME_MARCHING = "time_marching"
    AUTO = "auto"  # direct up to max_direct_dim, time marching beyond


@dataclass(frozen=True)
class SolverOptions:
    method: Method = Method.DIRECT
    residual_tol: float = 1e-10
    ode_rel_tol: float = 1e-8
    ode_abs_tol: float = 1e-10
    max_time: float | None = None  # None -> 50 / smallest nonzero rate
    convergence_tol: float = 1e-9
    max_direct_dim: int = DIRECT_MAX_DIM

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        for name in ("residual_tol", "ode_rel_tol", "ode_abs_tol", "convergence_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.max_time is not None and not self.max_time > 0:
            raise ValueError("max_time must be > 0")


def relative_residual(L: Liouvillian, rho) -> float:
    """``||L vec(rho)||_2 / ||L||_F``."""
    norm = sp.linalg.norm(L.matrix)
    if norm == 0:
        return 0.0
    return float(np.linalg.norm(L.matrix @ vectorize(rho)) / norm)


def default_max_time(L: Liouvillian) -> float:
    rates = L.rates()
    return 50.0 / min(rates) if rates else 50.0


def stable_step(L: Liouvillian) -> float:
    """Step bound ``1 / ||L||_inf`` keeping every eigenvalue well inside the
    RK45 stability region.

    Without it the step controller settles on the stability boundary of the
    fastest (Hamiltonian) modes, which then never contract and the residual
    plateaus far above any useful tolerance.
    """
    bound = abs(L.matrix).sum(axis=1).max()
    return 1.0 / bound if bound > 0 else np.inf


def hermitize(rho) -> np.ndarray:
    rho = np.asarray(rho)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def check_density_matrix(rho, *, psd_tol: float = PSD_TOL) -> None:
    """Raise :class:`SolverError` if ``rho`` is not a valid density matrix."""
    rho = np.asarray(rho)
    if abs(rho - rho.conj().T).max() > 1e-10:
        raise SolverError("state is not Hermitian")
    if abs(np.trace(rho) - 1) > 1e-10:
        raise SolverError(f"trace {np.trace(rho).real:.12g} != 1")
    lowest = np.linalg.eigvalsh(rho)[0]
    if lowest < -psd_tol:
        raise SolverError(f"negative eigenvalue {lowest:.3e} beyond -{psd_tol:g}")


def steady_state(
    L: Liouvillian,
    opts: SolverOptions | None = None,
    rho0=None,
) -> np.ndarray:
    """Density matrix annihilated by ``L``.

    The direct method replaces the first row of ``L`` by the trace functional
    and solves the resulting nonsingular system with sparse LU. Time marching
    integrates from ``rho0`` (default: all spins down) until ``||L rho||`` drops
    below ``opts.convergence_tol``.

    Raises
    ------
    NonUniqueSteadyStateError
        The constrained system is singular or its solution misses the residual
        bound, both signs of a degenerate null space.
    NoConvergenceError
        Time marching ran past ``max_time``.
    """
    opts = opts or SolverOptions()
    method = opts.method
    if method is Method.AUTO:
        method = Method.DIRECT if L.dim <= opts.max_direct_dim else Method.TIME_MARCHING
    if method is Method.DIRECT:
        rho = _steady_direct(L, opts)
    else:
        rho = _steady_time_marching(L, opts, rho0)
    rho = hermitize(rho)
    res = relative_residual(L, rho)
    if res > opts.residual_tol:
        if method is Method.DIRECT:
            raise NonUniqueSteadyStateError(
                f"residual {res:.3e} exceeds {opts.residual_tol:g} after row replacement"
            )
        raise NoConvergenceError(f"residual {res:.3e} exceeds {opts.residual_tol:g}")
    check_density_matrix(rho)
    return rho


def _steady_direct(L: Liouvillian, opts: SolverOptions) -> np.ndarray:
    if L.dim > opts.max_direct_dim:
        raise SolverError(
            f"Liouvillian dimension {L.dim} exceeds the direct-solve limit "
            f"{opts.max_direct_dim}; use method='time_marching'"
        )
    d = L.hilbert_dim
    A = L.matrix.tolil(copy=True)
    A[0, :] = trace_row(d)
    b = np.zeros(L.dim, dtype=complex)
    b[0] = 1.0
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", spla.MatrixRankWarning)
            lu = spla.splu(A.tocsc(), permc_spec="COLAMD")
    except (RuntimeError, spla.MatrixRankWarning) as exc:
        raise NonUniqueSteadyStateError(f"constrained system is singular: {exc}") from exc
    v = lu.solve(b)
    if not np.all(np.isfinite(v)):
        raise NonUniqueSteadyStateError("constrained system is singular")
    return devectorize(v)


def _steady_time_marching(L: Liouvillian, opts: SolverOptions, rho0) -> np.ndarray:
    d = L.hilbert_dim
    rho0 = ket_to_dm(vacuum_state(int(math.log2(d)))) if rho0 is None else rho0
    max_time = opts.max_time or default_max_time(L)
    matrix = L.matrix
    stepper = RK45(
        lambda t, v: matrix @ v,
        0.0,
        vectorize(np.asarray(rho0, dtype=complex)),
        t_bound=max_time,
        rtol=opts.ode_rel_tol,
        atol=opts.ode_abs_tol,
        max_step=stable_step(L),
    )
    # RK45 is first-same-as-last: stepper.f is L @ y at the accepted point
    while np.linalg.norm(stepper.f) >= opts.convergence_tol:
        if stepper.status != "running":
            raise NoConvergenceError(
                f"||L rho|| = {np.linalg.norm(stepper.f):.3e} after t = {stepper.t:.4g}"
            )
        message = stepper.step()
        if stepper.status == "failed":
            raise StepSizeUnderflowError(message or "step size underflow")
    return devectorize(stepper.y)


def evolve(
    L: Liouvillian,
    rho0,
    t_grid,
    opts: SolverOptions | None = None,
) -> list[np.ndarray]:
    """States on ``t_grid`` from adaptive Dormand-Prince 5(4) integration.

    Each returned state is re-symmetrized. Trace drift beyond 1e-8 or an
    eigenvalue below -1e-8 raises :class:`SolverError` rather than being
    silently repaired.
    """
    opts = opts or SolverOptions()
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or t_grid[0] != 0:
        raise ValueError("t_grid must be a non-empty 1-D grid starting at 0")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (L.hilbert_dim, L.hilbert_dim):
        raise DimensionMismatchError(f"rho0 shape {rho0.shape} vs Liouvillian {L.dim}")

    if t_grid.size == 1:
        vecs = vectorize(rho0)[:, None]
    else:
        matrix = L.matrix
        sol = solve_ivp(
            lambda t, v: matrix @ v,
            (t_grid[0], t_grid[-1]),
            vectorize(rho0),
            method="RK45",
            t_eval=t_grid,
            rtol=opts.ode_rel_tol,
            atol=opts.ode_abs_tol,
        )
        if sol.status != 0:
            raise StepSizeUnderflowError(sol.message)
        vecs = sol.y

    states = []
    for t, v in zip(t_grid, vecs.T):
        rho = devectorize(v)
        drift = abs(np.trace(rho) - 1)
        if drift > TRACE_DRIFT_TOL:
            raise SolverError(f"trace drift {drift:.3e} at t = {t:.4g}")
        rho = 0.5 * (rho + rho.conj().T)
        lowest = np.linalg.eigvalsh(rho)[0]
        if lowest < -PSD_TOL:
            raise SolverError(f"negative eigenvalue {lowest:.3e} at t = {t:.4g}")
        states.append(rho)
    return states


def convergence_time(L: Liouvillian, rho0, target, threshold: float, t_grid, opts=None) -> float:
    """First grid time at which the fidelity to ``target`` reaches ``threshold``.

    Returns ``math.inf`` if the threshold is never reached on the grid.
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    for t, rho in zip(t_grid, evolve(L, rho0, t_grid, opts)):
        if fidelity(rho, target) >= threshold:
            return float(t)
    return math.inf
