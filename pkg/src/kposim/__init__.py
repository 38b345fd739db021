"""Simulation of Kerr parametric oscillator qubits read out by microwave
reflection: model construction, dissipative dynamics, reflection spectra,
and single-qubit state tomography."""

__version__ = "0.1.0"

from .errors import (
    AmbiguousLabelError,
    CalibrationError,
    ConfigError,
    DimensionMismatchError,
    InsensitiveProbeError,
    IntegratorFailureError,
    InvalidDimensionError,
    KposimError,
    MeasurementRangeError,
    SingularDenominatorError,
    StiffnessError,
    TruncationError,
)
from .fockspace import (
    annihilation,
    coherent_state,
    creation,
    displacement,
    fock_state,
    number,
    parity,
    state_fidelity,
    vacuum,
    wigner,
)
from .model import (
    KpoParams,
    Spectrum,
    SpectrumLabel,
    build_hamiltonian,
    cat_states,
    displaced_fock_overlap,
    effective_potential,
    eigenbasis_elements,
    fock_dim_for,
    top_spectrum,
)
from .pulses import PulseSchedule, make_ramp, make_rx_detuning, make_rz_drive
from .lindblad import (
    EvolutionResult,
    evolve,
    liouvillian,
    populations_in_eigenbasis,
    propagate_constant,
)
from .reflection import (
    ReflectionResult,
    TransitionTables,
    nominal_decay_rates,
    qubit_rhoF,
    reflection_coefficient,
    sensitivity,
    time_averaged_gamma,
    transition_tables,
)
from .tomography import (
    CalibrationResult,
    Gate,
    GateProgram,
    apply_angle_error,
    build_gate_program,
    calibrate_rx,
    error_injection_study,
    extract_rho00,
    ideal_gate_action,
    measure_state,
    reconstruct,
    run_protocol,
    tomography_measurements,
)
from .experiments import ExperimentConfig, list_experiments, run_experiment, validate_config
