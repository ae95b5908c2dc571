"""Vectorized Lindblad superoperators.

Density matrices are column-stacked, ``vec(A X B) = (B^T kron A) vec(X)``, so
``rho.flatten(order="F")`` is the state vector the superoperators act on.
Every superoperator is assembled in CSR form; nothing here densifies a
``4^N x 4^N`` matrix.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatchError, NegativeRateError, NonHermitianError
from .model import (
    ChainSpec,
    NoiseSpec,
    Polarization,
    check_distinct_modes,
    check_mode_index,
)
from .operators import as_sparse, chain_hamiltonian, dagger, jw_mode_operators, site_operator


class Frame(str, enum.Enum):
    LAB = "lab"
    INTERACTION = "interaction"


@dataclass(frozen=True)
class Liouvillian:
    """Sparse generator ``d vec(rho)/dt = matrix @ vec(rho)``.

    ``parts`` records which contributions were summed and with which rates.
    """

    matrix: sp.csr_matrix
    parts: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        n, m = self.matrix.shape
        d = int(round(np.sqrt(n)))
        if n != m or d * d != n:
            raise DimensionMismatchError(f"superoperator shape {self.matrix.shape} is not d^2 x d^2")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def hilbert_dim(self) -> int:
        return int(round(np.sqrt(self.dim)))

    def __add__(self, other: "Liouvillian") -> "Liouvillian":
        if self.dim != other.dim:
            raise DimensionMismatchError(f"cannot add {self.dim} and {other.dim}")
        parts = {**self.parts}
        for key, value in other.parts.items():
            parts[key] = parts.get(key, []) + value
        return Liouvillian((self.matrix + other.matrix).tocsr(), parts)

    def __matmul__(self, vec):
        return self.matrix @ vec

    def rates(self) -> list[float]:
        """All nonzero dissipative rates that went into this generator."""
        return [r for items in self.parts.values() for _, r in items if r > 0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """``L(rho)`` as a matrix."""
        return devectorize(self.matrix @ vectorize(rho))


def vectorize(rho) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {rho.shape}")
    return rho.flatten(order="F")


def devectorize(vec) -> np.ndarray:
    vec = np.asarray(vec).ravel()
    d = int(round(np.sqrt(vec.size)))
    if d * d != vec.size:
        raise DimensionMismatchError(f"length {vec.size} is not a perfect square")
    return vec.reshape((d, d), order="F")


def trace_row(d: int) -> np.ndarray:
    """Row vector ``t`` with ``t @ vec(rho) == trace(rho)``."""
    return vectorize(np.eye(d))


def zero_liouvillian(d: int) -> Liouvillian:
    return Liouvillian(sp.csr_matrix((d * d, d * d), dtype=complex))


def hamiltonian_part(H, label: str = "hamiltonian") -> Liouvillian:
    """``-i [H, .]`` as ``-i (I kron H - H^T kron I)``."""
    H = as_sparse(H).astype(complex)
    d = H.shape[0]
    herm_err = abs(H - dagger(H)).max() if H.nnz else 0.0
    if herm_err > 1e-12 * max(1.0, abs(H).max() if H.nnz else 1.0):
        raise NonHermitianError(f"Hamiltonian not Hermitian (error {herm_err:.3e})")
    eye = sp.identity(d, dtype=complex, format="csr")
    mat = -1j * (sp.kron(eye, H, format="csr") - sp.kron(H.T, eye, format="csr"))
    return Liouvillian(mat.tocsr(), {label: []})


def dissipator(L, rate: float, label: str = "dissipator") -> Liouvillian:
    """``(rate/2) (2 L rho L^dag - rho L^dag L - L^dag L rho)``.

    Raises
    ------
    NegativeRateError
        If ``rate < 0``.
    """
    if rate < 0:
        raise NegativeRateError(f"rate must be >= 0, got {rate}")
    L = as_sparse(L).astype(complex)
    d = L.shape[0]
    if rate == 0:
        return Liouvillian(sp.csr_matrix((d * d, d * d), dtype=complex), {label: [(label, 0.0)]})
    LdL = (dagger(L) @ L).tocsr()
    eye = sp.identity(d, dtype=complex, format="csr")
    mat = 0.5 * rate * (
        2 * sp.kron(L.conj(), L, format="csr")
        - sp.kron(eye, LdL, format="csr")
        - sp.kron(LdL.T, eye, format="csr")
    )
    return Liouvillian(mat.tocsr(), {label: [(label, float(rate))]})


def _sum(terms: list[Liouvillian], d: int) -> Liouvillian:
    total = zero_liouvillian(d)
    for term in terms:
        total = total + term
    return total


def engineered_liouvillian(spec: ChainSpec, reservoirs) -> Liouvillian:
    """Eigenmode pumping (``f_k^dag`` jumps) and cooling (``f_k`` jumps)."""
    reservoirs = list(reservoirs)
    for res in reservoirs:
        check_mode_index(spec, res.mode_index)
    check_distinct_modes(reservoirs)
    d = spec.dim
    if not reservoirs:
        return Liouvillian(zero_liouvillian(d).matrix, {"engineered": []})
    modes = jw_mode_operators(spec, sparse=True)
    terms = []
    for res in reservoirs:
        f = modes[res.mode_index - 1]
        if res.polarization is Polarization.EXCITED:
            jump, tag = dagger(f), f"pump[{res.mode_index}]"
        else:
            jump, tag = f, f"cool[{res.mode_index}]"
        term = dissipator(jump, res.gamma, label="engineered")
        terms.append(Liouvillian(term.matrix, {"engineered": [(tag, res.gamma)]}))
    return _sum(terms, d)


def natural_liouvillian(spec: ChainSpec, noise: NoiseSpec) -> Liouvillian:
    """Site-local thermal damping and ``Z`` dephasing on every spin."""
    N, d = spec.N, spec.dim
    items = [
        ("Minus", noise.kappa * (1 + noise.nbar), "decay"),
        ("Plus", noise.kappa * noise.nbar, "thermal"),
        ("Z", noise.kappa_phi, "dephasing"),
    ]
    mat = sp.csr_matrix((d * d, d * d), dtype=complex)
    parts = []
    for which, rate, tag in items:
        if rate == 0:
            continue
        for j in range(1, N + 1):
            mat = mat + dissipator(site_operator(N, j, which, sparse=True), rate).matrix
        parts.append((tag, float(rate)))
    return Liouvillian(mat.tocsr(), {"natural": parts})


def total_liouvillian(
    spec: ChainSpec,
    reservoirs,
    noise: NoiseSpec,
    frame: Frame | str = Frame.LAB,
) -> Liouvillian:
    """Full generator; the lab frame adds ``-i [H_c, .]`` to the dissipators."""
    frame = Frame(frame)
    total = engineered_liouvillian(spec, reservoirs) + natural_liouvillian(spec, noise)
    if frame is Frame.LAB:
        total = hamiltonian_part(chain_hamiltonian(spec, sparse=True)) + total
    return Liouvillian(total.matrix, {**total.parts, "frame": [(frame.value, 0.0)]})


def lindblad_rhs(rho, H, jumps) -> np.ndarray:
    """Master-equation right-hand side from plain matrix products.

    ``jumps`` is a sequence of ``(L, rate)`` pairs. Kept independent of the
    superoperator assembly so it can serve as a cross-check.
    """
    rho = np.asarray(rho, dtype=complex)
    out = -1j * (H @ rho - rho @ H) if H is not None else np.zeros_like(rho)
    for L, rate in jumps:
        L = np.asarray(L.toarray() if sp.issparse(L) else L, dtype=complex)
        Ld = L.conj().T
        LdL = Ld @ L
        out = out + 0.5 * rate * (2 * L @ rho @ Ld - rho @ LdL - LdL @ rho)
    return out
