"""Exact transverse-field Ising rings and their quantum-correlation measures.

The library solves H = -J sum_n sx_n sx_{n+1} + B sum_n sz_n on periodic
rings of 2..12 spins by dense diagonalization and evaluates pairwise
discord/MID/AMID, global quantum discord, bipartition-entanglement
statistics, thermodynamic-limit Toeplitz correlators, and B/J sweep
analyses of all of the above.
"""

__version__ = "0.1.0"

from .density import (
    DensityMatrix,
    PureState,
    binary_entropy,
    dephase,
    mutual_information,
    partial_trace,
    pure_density,
    reduced_state,
    relative_entropy,
    rotation_matrix,
    shannon_entropy,
    von_neumann_entropy,
)
from .entanglement import (
    EntanglementStats,
    bipartition_entanglement,
    bipartitions,
    entanglement_stats,
)
from .errors import (
    CapacityError,
    ConvergenceWarning,
    EigensolverError,
    NonXStateWarning,
    QuadratureError,
    UnsupportedSectorError,
)
from .global_discord import (
    GDResult,
    MeasuredSpectrum,
    OptimizerConfig,
    gd_objective,
    gd_objective_full,
    global_discord,
    measured_spectrum,
)
from .pair_measures import (
    CorrelatorSet,
    XState,
    amid,
    discord,
    is_x_pattern,
    mid,
    reduced_two_spin,
    toeplitz_correlators,
    x_state_from_correlators,
)
from .ring import (
    MAX_SITES,
    FermionSector,
    RingConfig,
    build_hamiltonian,
    fermion_sector,
    free_fermion_energy,
    ghz_state,
    ground_state,
    parity_expectation,
    product_state_down,
)
from .sweep import (
    COLUMNS,
    DriftReport,
    PeakResult,
    ScalingFit,
    SweepTable,
    default_ratio_grid,
    find_peak,
    fit_scaling,
    peak_drift,
    sweep,
)

__all__ = [
    "__version__",
    # density
    "DensityMatrix",
    "PureState",
    "binary_entropy",
    "dephase",
    "mutual_information",
    "partial_trace",
    "pure_density",
    "reduced_state",
    "relative_entropy",
    "rotation_matrix",
    "shannon_entropy",
    "von_neumann_entropy",
    # entanglement
    "EntanglementStats",
    "bipartition_entanglement",
    "bipartitions",
    "entanglement_stats",
    # errors
    "CapacityError",
    "ConvergenceWarning",
    "EigensolverError",
    "NonXStateWarning",
    "QuadratureError",
    "UnsupportedSectorError",
    # global discord
    "GDResult",
    "MeasuredSpectrum",
    "OptimizerConfig",
    "gd_objective",
    "gd_objective_full",
    "global_discord",
    "measured_spectrum",
    # pair measures
    "CorrelatorSet",
    "XState",
    "amid",
    "discord",
    "is_x_pattern",
    "mid",
    "reduced_two_spin",
    "toeplitz_correlators",
    "x_state_from_correlators",
    # ring
    "MAX_SITES",
    "FermionSector",
    "RingConfig",
    "build_hamiltonian",
    "fermion_sector",
    "free_fermion_energy",
    "ghz_state",
    "ground_state",
    "parity_expectation",
    "product_state_down",
    # sweep
    "COLUMNS",
    "DriftReport",
    "PeakResult",
    "ScalingFit",
    "SweepTable",
    "default_ratio_grid",
    "find_peak",
    "fit_scaling",
    "peak_drift",
    "sweep",
]
