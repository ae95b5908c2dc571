"""Chain parameters, quadratic coupling matrices and their normal modes.

All mode and site indices exposed here are 1-based. The XY chain with open
boundaries has single-particle energies ``2 J cos(k pi / (N + 1))`` and mode
shapes ``sqrt(2 / (N + 1)) sin(j k pi / (N + 1))``; :func:`diagonalize`
recovers both numerically for any real symmetric coupling matrix.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DuplicateModeError, InvalidModeIndexError, NonSymmetricError

SYMMETRY_TOL = 1e-12
RWA_FACTOR = 10.0
WEAK_COUPLING_LIMIT = 0.1


@dataclass(frozen=True)
class ChainSpec:
    """Open isotropic XY chain of ``N`` spins with hopping ``J``."""

    N: int
    J: float = 1.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if not self.J > 0:
            raise ValueError(f"J must be positive, got {self.J!r}")

    @property
    def dim(self) -> int:
        return 2**self.N


class Polarization(str, enum.Enum):
    """State the reservoir two-level systems are prepared in."""

    EXCITED = "excited"  # pumps the mode
    GROUND = "ground"  # cools the mode

    @classmethod
    def parse(cls, value) -> "Polarization":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"e": "excited", "+": "excited", "pump": "excited",
                   "g": "ground", "-": "ground", "cool": "ground"}
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class ReservoirSpec:
    """One engineered reservoir acting on chain eigenmode ``mode_index``.

    ``gamma`` is the effective rate. ``lam``, ``tau`` and ``switch_rate`` are
    optional microscopic parameters; when all three are given they must
    reproduce ``gamma = switch_rate * (lam * tau)**2``.
    """

    mode_index: int
    polarization: Polarization
    gamma: float
    tls_frequency: float | None = None
    lam: float | None = None
    tau: float | None = None
    switch_rate: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "polarization", Polarization.parse(self.polarization))
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        for name in ("lam", "tau", "switch_rate"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")
        if None not in (self.lam, self.tau, self.switch_rate):
            expected = self.switch_rate * (self.lam * self.tau) ** 2
            if not math.isclose(self.gamma, expected, rel_tol=1e-9, abs_tol=0.0):
                raise ValueError(
                    f"gamma={self.gamma} inconsistent with "
                    f"switch_rate*(lam*tau)^2={expected}"
                )

    @property
    def weak_coupling(self) -> bool | None:
        """``lam * tau < 0.1``, or None when either is unknown."""
        if self.lam is None or self.tau is None:
            return None
        return self.lam * self.tau < WEAK_COUPLING_LIMIT

    def with_gamma(self, gamma: float) -> "ReservoirSpec":
        # microscopic provenance no longer matches a rescaled rate
        return replace(self, gamma=gamma, switch_rate=None)


@dataclass(frozen=True)
class NoiseSpec:
    """Site-local amplitude damping, thermal pumping and dephasing."""

    kappa: float = 1.0
    kappa_phi: float = 0.0
    nbar: float = 0.0

    def __post_init__(self):
        for name in ("kappa", "kappa_phi", "nbar"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class QuadraticModel:
    """Quadratic fermionic model ``sum_ij O_i^dag H_ij O_j``.

    ``transform`` holds the normal modes as columns, ``mode_frequencies`` the
    matching eigenvalues; both are ``None`` until :func:`diagonalize` runs.
    """

    coupling: np.ndarray
    mode_frequencies: np.ndarray | None = field(default=None, compare=False)
    transform: np.ndarray | None = field(default=None, compare=False)

    @property
    def size(self) -> int:
        return self.coupling.shape[0]

    @property
    def is_diagonalized(self) -> bool:
        return self.transform is not None

    @classmethod
    def from_parameters(cls, frequencies, couplings) -> "QuadraticModel":
        """Build from on-site frequencies and an off-diagonal coupling matrix."""
        frequencies = np.asarray(frequencies, dtype=float)
        H = np.array(couplings, dtype=float)
        np.fill_diagonal(H, frequencies)
        return cls(H)


def xy_coupling_matrix(spec: ChainSpec) -> QuadraticModel:
    """Single-particle hopping matrix of the open XY chain."""
    H = np.zeros((spec.N, spec.N))
    idx = np.arange(spec.N - 1)
    H[idx, idx + 1] = spec.J
    H[idx + 1, idx] = spec.J
    return QuadraticModel(H)


def _fix_column_signs(T: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    T = T.copy()
    for col in range(T.shape[1]):
        nonzero = np.flatnonzero(np.abs(T[:, col]) > tol)
        if nonzero.size and T[nonzero[0], col] < 0:
            T[:, col] *= -1
    return T


def diagonalize(model: QuadraticModel) -> QuadraticModel:
    """Orthogonally diagonalize the coupling matrix.

    Modes are ordered by decreasing frequency, which for the XY chain is the
    natural order k = 1..N of ``2 J cos(k pi / (N + 1))``. Each eigenvector is
    signed so that its first nonzero entry is positive.

    Raises
    ------
    NonSymmetricError
        If the coupling matrix is not symmetric to 1e-12.
    """
    H = np.asarray(model.coupling, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise NonSymmetricError(f"coupling must be square, got shape {H.shape}")
    asym = np.abs(H - H.T).max() if H.size else 0.0
    if asym > SYMMETRY_TOL:
        raise NonSymmetricError(f"coupling asymmetric by {asym:.3e}")
    evals, evecs = np.linalg.eigh(H)
    order = np.argsort(-evals, kind="stable")
    return QuadraticModel(
        H, mode_frequencies=evals[order], transform=_fix_column_signs(evecs[:, order])
    )


def xy_mode_frequencies(spec: ChainSpec) -> np.ndarray:
    """Closed-form dispersion ``2 J cos(k pi / (N + 1))`` for k = 1..N."""
    k = np.arange(1, spec.N + 1)
    return 2 * spec.J * np.cos(k * np.pi / (spec.N + 1))


def xy_mode_amplitudes(spec: ChainSpec, k: int) -> np.ndarray:
    """Closed-form site amplitudes of mode ``k``."""
    check_mode_index(spec, k)
    j = np.arange(1, spec.N + 1)
    return np.sqrt(2 / (spec.N + 1)) * np.sin(j * k * np.pi / (spec.N + 1))


def check_mode_index(spec: ChainSpec, k: int) -> None:
    if int(k) != k or not 1 <= k <= spec.N:
        raise InvalidModeIndexError(f"mode index {k!r} outside [1, {spec.N}]")


def check_distinct_modes(reservoirs) -> None:
    seen = set()
    for res in reservoirs:
        if res.mode_index in seen:
            raise DuplicateModeError(f"two reservoirs target mode {res.mode_index}")
        seen.add(res.mode_index)


def validate_rwa(spec: ChainSpec, reservoirs) -> list[str]:
    """Bookkeeping checks behind the rotating-wave reduction.

    Returns a list of human-readable warnings; an empty list means every
    reservoir with a known bare coupling satisfies ``sqrt(N) lam < J / 10``
    and no mode is addressed twice.
    """
    warnings = []
    counts: dict[int, int] = {}
    freqs = xy_mode_frequencies(spec)
    for res in reservoirs:
        check_mode_index(spec, res.mode_index)
        counts[res.mode_index] = counts.get(res.mode_index, 0) + 1
        if res.lam is not None and math.sqrt(spec.N) * res.lam >= spec.J / RWA_FACTOR:
            warnings.append(
                f"mode {res.mode_index}: sqrt(N)*lambda = "
                f"{math.sqrt(spec.N) * res.lam:.4g} is not << J = {spec.J:.4g}"
            )
        if res.weak_coupling is False:
            warnings.append(
                f"mode {res.mode_index}: lambda*tau = {res.lam * res.tau:.4g} "
                f"outside the weak-coupling regime"
            )
        if res.tls_frequency is not None and not math.isclose(
            res.tls_frequency, freqs[res.mode_index - 1], rel_tol=1e-9, abs_tol=1e-12
        ):
            warnings.append(
                f"mode {res.mode_index}: TLS frequency {res.tls_frequency:.6g} "
                f"not resonant with omega_k = {freqs[res.mode_index - 1]:.6g}"
            )
    for mode, count in sorted(counts.items()):
        if count > 1:
            warnings.append(f"mode {mode} is targeted by {count} reservoirs")
    return warnings
