"""Hilbert-space operators and states of the spin chain.

Conventions: site 1 is the leftmost (most significant) tensor factor, the
local basis is (|up>, |down>), and an up spin is an occupied fermion. The
Jordan-Wigner string on site ``l`` is the parity ``(-1)^{n_l} = -Z_l``, so
``c_j^dag |0> = S_j^+ |0>`` and the hopping term keeps its sign.

Operators come back as dense ``numpy`` arrays for N <= 6 and as CSR
matrices above that; pass ``sparse=`` to force either representation.
"""

from __future__ import annotations

from functools import reduce

import numpy as np
import scipy.sparse as sp

from .errors import InvalidSiteError
from .model import ChainSpec, check_mode_index, diagonalize, xy_coupling_matrix

DENSE_MAX_SITES = 6

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "PLUS": np.array([[0, 1], [0, 0]], dtype=complex),  # |up><down|
    "MINUS": np.array([[0, 0], [1, 0]], dtype=complex),  # |down><up|
}


def use_sparse(N: int, sparse: bool | None = None) -> bool:
    return N > DENSE_MAX_SITES if sparse is None else bool(sparse)


def _kron_chain(factors, sparse: bool):
    if sparse:
        mats = [sp.csr_matrix(f) for f in factors]
        return reduce(lambda a, b: sp.kron(a, b, format="csr"), mats)
    return reduce(np.kron, factors)


def as_dense(op) -> np.ndarray:
    return op.toarray() if sp.issparse(op) else np.asarray(op)


def as_sparse(op) -> sp.csr_matrix:
    return sp.csr_matrix(op)


def dagger(op):
    return op.conj().T


def _check_site(N: int, j: int) -> None:
    if int(j) != j or not 1 <= j <= N:
        raise InvalidSiteError(f"site {j!r} outside [1, {N}]")


def site_operator(N: int, j: int, which: str, sparse: bool | None = None):
    """Embed a single-site operator at site ``j`` of an ``N``-site chain.

    ``which`` is one of ``X``, ``Y``, ``Z``, ``Plus``, ``Minus``
    (case-insensitive).
    """
    _check_site(N, j)
    key = which.upper()
    if key not in _PAULI or key == "I":
        raise ValueError(f"unknown site operator {which!r}")
    factors = [_PAULI[key] if site == j else _PAULI["I"] for site in range(1, N + 1)]
    return _kron_chain(factors, use_sparse(N, sparse))


def site_annihilator(N: int, j: int, sparse: bool | None = None):
    """Jordan-Wigner fermion ``c_j = (prod_{l<j} -Z_l) S_j^-``."""
    _check_site(N, j)
    factors = (
        [-_PAULI["Z"]] * (j - 1) + [_PAULI["MINUS"]] + [_PAULI["I"]] * (N - j)
    )
    return _kron_chain(factors, use_sparse(N, sparse))


def number_operator(N: int, sparse: bool | None = None):
    """Total excitation number ``sum_j (Z_j + 1) / 2``; diagonal."""
    bits = (np.arange(2**N)[:, None] >> np.arange(N)[::-1]) & 1
    counts = (N - bits.sum(axis=1)).astype(complex)  # bit 0 is |up>
    if use_sparse(N, sparse):
        return sp.diags(counts, format="csr")
    return np.diag(counts)


def chain_hamiltonian(spec: ChainSpec, sparse: bool | None = None):
    """``J sum_j (S_j^+ S_{j+1}^- + S_j^- S_{j+1}^+)`` on the full 2^N space."""
    N = spec.N
    is_sparse = use_sparse(N, sparse)
    H = sp.csr_matrix((2**N, 2**N), dtype=complex) if is_sparse else np.zeros(
        (2**N, 2**N), dtype=complex
    )
    for j in range(1, N):
        factors = [_PAULI["I"]] * N
        factors[j - 1], factors[j] = _PAULI["PLUS"], _PAULI["MINUS"]
        hop = _kron_chain(factors, is_sparse)
        H = H + spec.J * (hop + dagger(hop))
    return H.tocsr() if is_sparse else H


def jw_mode_operator(spec: ChainSpec, k: int, sparse: bool | None = None):
    """Eigenmode annihilator ``f_k = sqrt(2/(N+1)) sum_j sin(j k pi/(N+1)) c_j``.

    The amplitudes are taken from the numerical diagonalization of the
    coupling matrix, which matches the closed form up to the fixed sign
    convention (first nonzero entry positive).
    """
    check_mode_index(spec, k)
    T = diagonalize(xy_coupling_matrix(spec)).transform
    return _mode_from_amplitudes(spec.N, T[:, k - 1], use_sparse(spec.N, sparse))


def _mode_from_amplitudes(N: int, amps, sparse: bool):
    f = None
    for j, a in enumerate(amps, start=1):
        if abs(a) < 1e-15:
            continue
        term = a * site_annihilator(N, j, sparse)
        f = term if f is None else f + term
    if f is None:
        f = sp.csr_matrix((2**N, 2**N), dtype=complex) if sparse else np.zeros(
            (2**N, 2**N), dtype=complex
        )
    return f.tocsr() if sparse else f


def jw_mode_operators(spec: ChainSpec, sparse: bool | None = None) -> list:
    """All ``f_k`` for k = 1..N, sharing a single diagonalization."""
    T = diagonalize(xy_coupling_matrix(spec)).transform
    is_sparse = use_sparse(spec.N, sparse)
    return [_mode_from_amplitudes(spec.N, T[:, k], is_sparse) for k in range(spec.N)]


def vacuum_state(N: int) -> np.ndarray:
    """All-down product state ``|0>_N``."""
    psi = np.zeros(2**N, dtype=complex)
    psi[-1] = 1.0
    return psi


def basis_state(spins: str) -> np.ndarray:
    """Product state from a string such as ``"udd"`` (u/1 = up, d/0 = down)."""
    index = 0
    for ch in spins:
        if ch not in "ud10":
            raise ValueError(f"bad spin label {ch!r} in {spins!r}")
        index = 2 * index + (ch in "d0")
    psi = np.zeros(2 ** len(spins), dtype=complex)
    psi[index] = 1.0
    return psi


def single_excitation_state(amplitudes) -> np.ndarray:
    """``sum_j a_j S_j^+ |0>`` for site amplitudes ``a`` (not renormalized)."""
    amplitudes = np.asarray(amplitudes, dtype=complex)
    N = amplitudes.size
    psi = np.zeros(2**N, dtype=complex)
    for j, a in enumerate(amplitudes):
        # only site j is up: index bits are all 1 except bit for site j
        psi[(2**N - 1) ^ (1 << (N - 1 - j))] = a
    return psi


def mode_excitation_state(spec: ChainSpec, k: int) -> np.ndarray:
    """Normalized ``f_k^dag |0>_N``."""
    f = jw_mode_operator(spec, k)
    psi = dagger(f) @ vacuum_state(spec.N)
    return np.asarray(psi).ravel() / np.linalg.norm(psi)


def ket_to_dm(psi) -> np.ndarray:
    psi = np.asarray(psi).ravel()
    return np.outer(psi, psi.conj())


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None):
    """Random full-rank (or given-rank) density matrix from a Ginibre draw."""
    rank = dim if rank is None else rank
    G = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real
