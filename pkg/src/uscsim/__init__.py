"""Driven qubit-cavity simulator for ultrastrong-coupling quantum simulation.

Two classical drives applied to a qubit coupled to a cavity mode produce,
in a suitable frame, an effective quantum Rabi model with tunable
parameters.  This package builds the lab, rotating-frame, interaction
picture, effective Rabi and Dirac Hamiltonians, integrates them and
extracts the observables (qubit populations, quadratures, Wigner functions,
cat-state fidelities).
"""
from .errors import (
    ConfigError,
    ConvergenceError,
    IntegrationError,
    InvalidGeneratorError,
    InvalidMappingError,
    InvalidParametersError,
    InvalidSpaceError,
    PostselectionError,
    USCSimError,
)
from .evolution import (
    FrameRotation,
    Method,
    PropagationSettings,
    TrajectoryResult,
    converge_dt,
    converge_fock_dim,
    frame_transform,
    propagate,
    step_propagator,
)
from .hamiltonians import (
    DerivedParams,
    Drive,
    SystemParams,
    TimeDependentHamiltonian,
    build_dirac,
    build_driven,
    build_driven_lab,
    build_effective,
    build_interaction_picture,
    build_jc,
    build_rabi,
    build_rotating_l1,
    check_rwa_validity,
    derive_effective_params,
    ghz,
    mhz,
    rotating_frame_generator,
    solve_resonance,
    strong_drive_generator,
)
from .observables import (
    DensityMatrix,
    TimeSeries,
    WignerGrid,
    cat_amplitude,
    cat_reference,
    fidelity,
    fit_cat_phase,
    partial_trace_qubit,
    photon_distribution,
    postselect_qubit,
    qubit_populations,
    wigner,
    wigner_negativity,
)
from .operators import (
    HilbertConfig,
    Operator,
    QuantumState,
    Space,
    coherent_state,
    composite_state,
    displacement,
    fock_state,
    qubit_operators,
    tensor,
)
from .protocols import (
    PulseSchedule,
    PulseSegment,
    RamseyConfig,
    TimeOrigin,
    dirac_trajectory,
    effective_trajectory,
    exact_interaction_trajectory,
    exact_trajectory,
    interaction_picture_readout,
    ramsey_readout,
    ramsey_sweep,
    run_schedule,
    two_tone_protocol,
)

__version__ = "0.1.0"
