"""Trapped-ion frustrated Ising networks.

Pipeline: trap geometry -> equilibrium chain -> transverse phonon modes ->
detuning-controlled coupling matrix -> exact spin ground states, phase
diagrams, and the scaling of the ferromagnet/kink avoided crossing.
"""

from .chain import (
    ConvergenceError,
    DegenerateModes,
    IonChain,
    ModeSpectrum,
    TrapConfig,
    ZigzagInstability,
    equilibrium_positions,
    mode_spectrum,
    transverse_mode_matrix,
    transverse_modes,
    zigzag_stability,
)
from .couplings import (
    Bond,
    CouplingMatrix,
    DetuningSpec,
    ResonanceError,
    bond_graph,
    coupling_from_trap,
    coupling_matrix,
    resolve_detuning,
)
from .phases import (
    AlphaFit,
    AlphaScaling,
    GapPoint,
    PhaseTable,
    ScanGrid,
    alpha_vs_n,
    even_odd_symmetry_report,
    fit_alpha,
    fm_kink_interval,
    min_gap,
    phase_table,
    scan_2d,
    transition_width,
)
from .spins import (
    AmbiguousGround,
    GroundState,
    SpectrumResult,
    SpinOrder,
    apply_hamiltonian,
    canonicalize,
    classical_energy,
    classical_ground,
    cluster_polarization,
    cluster_projection,
    dense_hamiltonian,
    fm_basis,
    hamming_distance,
    kink_basis,
    lowest_eigenpairs,
    polarization,
    subspace_projection,
)

__version__ = "0.1.0"
