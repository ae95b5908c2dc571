"""Figures of merit for chain density matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatchError, InvalidSiteError, NegativeExpectationError
from .model import ChainSpec
from .operators import dagger, jw_mode_operators

CLAMP_TOL = 1e-10
EIG_CUTOFF = 1e-13

_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]])).real


@dataclass(frozen=True)
class MetricRecord:
    fidelity: float
    purity: float
    concurrence_pair: tuple[int, int]
    concurrence: float
    mode_occupations: tuple[float, ...]
    residual: float = float("nan")


def _clamp(value: float, lo: float, hi: float, name: str) -> float:
    if value < lo - CLAMP_TOL:
        raise NegativeExpectationError(f"{name} = {value:.3e} below {lo}")
    if value > hi + CLAMP_TOL:
        raise NegativeExpectationError(f"{name} = {value:.3e} above {hi}")
    return float(min(max(value, lo), hi))


def fidelity(rho, psi) -> float:
    """``sqrt(<psi| rho |psi>)``, the overlap with a pure target.

    This is already the Uhlmann fidelity for a pure target; do not take a
    further square root.
    """
    rho = np.asarray(rho)
    psi = np.asarray(psi).ravel()
    if rho.shape != (psi.size, psi.size):
        raise DimensionMismatchError(f"rho {rho.shape} vs state of length {psi.size}")
    overlap = np.vdot(psi, rho @ psi).real
    return float(np.sqrt(_clamp(overlap, 0.0, 1.0, "<psi|rho|psi>")))


def purity(rho) -> float:
    rho = np.asarray(rho)
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(rho) ** 2))


def _num_sites(dim: int) -> int:
    N = int(round(np.log2(dim)))
    if 2**N != dim:
        raise DimensionMismatchError(f"dimension {dim} is not a power of two")
    return N


def partial_trace(rho, keep) -> np.ndarray:
    """Reduced density matrix on the sorted 1-based sites in ``keep``."""
    rho = np.asarray(rho)
    N = _num_sites(rho.shape[0])
    keep = list(keep)
    if not keep or keep != sorted(set(keep)) or keep[0] < 1 or keep[-1] > N:
        raise InvalidSiteError(f"keep={keep} must be sorted distinct sites in [1, {N}]")
    kept = [j - 1 for j in keep]
    traced = [j for j in range(N) if j not in kept]
    t = rho.reshape([2] * (2 * N))
    order = kept + traced + [N + j for j in kept] + [N + j for j in traced]
    t = t.transpose(order)
    dk, dt = 2 ** len(kept), 2 ** len(traced)
    t = t.reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", t)


def concurrence(rho2) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    rho2 = np.asarray(rho2)
    if rho2.shape != (4, 4):
        raise DimensionMismatchError(f"concurrence needs a 4x4 matrix, got {rho2.shape}")
    # With rho = A A^dag, the Wootters lambdas are the singular values of
    # A^T (Y x Y) A. This avoids square roots of the near-zero eigenvalues
    # of rho rho~, which would turn 1e-17 round-off into 1e-9 errors.
    p, V = np.linalg.eigh(0.5 * (rho2 + rho2.conj().T))
    p = np.where(p > EIG_CUTOFF * max(p[-1], 0.0), p, 0.0)
    A = V * np.sqrt(p)
    lam = np.linalg.svd(A.T @ _YY @ A, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def pair_concurrence(rho, i: int, j: int) -> float:
    return concurrence(partial_trace(rho, sorted((i, j))))


def mode_occupations(rho, spec: ChainSpec, modes=None) -> np.ndarray:
    """``<f_k^dag f_k>`` for every eigenmode k = 1..N."""
    rho = np.asarray(rho)
    if rho.shape != (spec.dim, spec.dim):
        raise DimensionMismatchError(f"rho {rho.shape} vs chain dimension {spec.dim}")
    modes = jw_mode_operators(spec) if modes is None else modes
    occ = []
    for k, f in enumerate(modes, start=1):
        n_op = dagger(f) @ f
        if sp.issparse(n_op):
            value = n_op.multiply(rho.T).sum().real
        else:
            value = np.sum(n_op * rho.T).real
        occ.append(_clamp(value, 0.0, 1.0, f"n_{k}"))
    return np.array(occ)


def evaluate(rho, target, spec: ChainSpec, pair=(2, 3), residual=float("nan"), modes=None):
    """Bundle all metrics of ``rho`` into a :class:`MetricRecord`."""
    i, j = pair
    return MetricRecord(
        fidelity=fidelity(rho, target),
        purity=purity(rho),
        concurrence_pair=(i, j),
        concurrence=pair_concurrence(rho, i, j) if spec.N >= 2 else float("nan"),
        mode_occupations=tuple(mode_occupations(rho, spec, modes)),
        residual=residual,
    )
