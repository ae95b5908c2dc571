"""Dissipative preparation of entangled eigenmode states in XY spin chains."""

from .liouvillian import (
    Frame,
    Liouvillian,
    devectorize,
    dissipator,
    engineered_liouvillian,
    hamiltonian_part,
    natural_liouvillian,
    total_liouvillian,
    vectorize,
)
from .metrics import (
    MetricRecord,
    concurrence,
    fidelity,
    mode_occupations,
    pair_concurrence,
    partial_trace,
    purity,
)
from .model import (
    ChainSpec,
    NoiseSpec,
    Polarization,
    QuadraticModel,
    ReservoirSpec,
    diagonalize,
    validate_rwa,
    xy_coupling_matrix,
)
from .operators import (
    chain_hamiltonian,
    jw_mode_operator,
    mode_excitation_state,
    site_operator,
)
from .solvers import Method, SolverOptions, convergence_time, evolve, steady_state

__version__ = "0.1.0"
