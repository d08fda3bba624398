"""Entanglement of low-lying excited states in frustrated Heisenberg models.

Exact diagonalization of J1-J2 chains and 4x4 square and Shastry-Sutherland
lattices, nearest-neighbor concurrence of the (degenerate) first excited
level, location of its discontinuities and finite-size scaling fits.
"""

from .analysis import (
    DiscontinuityReport,
    LevelDiagram,
    SweepResult,
    energy_levels,
    fit_loglog,
    fit_rational_22,
    locate_discontinuities,
    solve_point,
    sweep,
)
from .eigensolver import EigenSolution, dense_all, lowest_k
from .entanglement import (
    LevelMixture,
    concurrence,
    energy_gaps,
    reduced_two_qubit,
    total_spin_of,
)
from .errors import (
    ClassificationError,
    ConfigurationError,
    ContractViolation,
    DataError,
    DomainError,
    ExcitedConcError,
    FitError,
    InsufficientLevelsError,
    MultipletOverflowError,
    SolverError,
)
from .hamiltonian import HamiltonianOperator, apply, hamiltonian, total_sz
from .lattice import Bond, Coupling, ModelKind, ModelSpec, build_bonds

__version__ = "0.1.0"

__all__ = [
    "Bond",
    "ClassificationError",
    "ConfigurationError",
    "ContractViolation",
    "Coupling",
    "DataError",
    "DiscontinuityReport",
    "DomainError",
    "EigenSolution",
    "ExcitedConcError",
    "FitError",
    "HamiltonianOperator",
    "InsufficientLevelsError",
    "LevelDiagram",
    "LevelMixture",
    "ModelKind",
    "ModelSpec",
    "MultipletOverflowError",
    "SolverError",
    "SweepResult",
    "apply",
    "build_bonds",
    "concurrence",
    "dense_all",
    "energy_gaps",
    "energy_levels",
    "fit_loglog",
    "fit_rational_22",
    "hamiltonian",
    "locate_discontinuities",
    "lowest_k",
    "reduced_two_qubit",
    "solve_point",
    "sweep",
    "total_spin_of",
    "total_sz",
]
